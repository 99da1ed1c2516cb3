#pragma once

#include <cassert>
#include <functional>
#include <utility>

#include "ftm/instance.hpp"

namespace ftm {

enum class EventKind { proposal, rejection };

struct Event {
  EventKind kind;
  Match match;
  friend constexpr auto operator<=>(const Event&, const Event&) = default;
};

inline Event proposal(Match m) { return Event{EventKind::proposal, m}; }
inline Event rejection(Match m) { return Event{EventKind::rejection, m}; }

using EventSequence = std::vector<Event>;

/// Result of running the adapted deferred-acceptance engine on a truncated
/// instance: a maximal feasible event sequence and the derived match sets.
struct ExecResult {
  EventSequence sequence;
  MatchSet prop;  // proposed
  MatchSet rej;   // rejected
  MatchSet tent;  // proposed but not rejected
  MatchSet pend;  // tentative with the resident absent from the hospital list
};

/// The matches ousted from M: (r,h) in M such that the list of h holds at
/// least quota(h) residents of res_h(M), and r is either missing from that
/// list or preceded there by quota(h) or more residents of res_h(M).
inline MatchSet ousted(const Instance& inst, const MatchSet& m) {
  MatchSet out;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::set<int> at_h = residents_at(m, h);
    if (at_h.empty()) continue;
    const auto& pi = inst.hospital_list[h];
    int listed = 0;
    for (int r : pi)
      if (at_h.count(r)) ++listed;
    if (listed < inst.quota[h]) continue;
    for (int r : at_h) {
      int rank = inst.hospital_rank(h, r);
      if (rank < 0) {
        out.insert(Match{r, h});
        continue;
      }
      int preceding = 0;
      for (int i = 0; i < rank; ++i)
        if (at_h.count(pi[i])) ++preceding;
      if (preceding >= inst.quota[h]) out.insert(Match{r, h});
    }
  }
  return out;
}

namespace detail {

/// Flat engine state shared by the deterministic scheduler, the feasibility
/// replayer and the exact solvers. Buffers are reusable across runs.
struct DaState {
  int nr = 0, nh = 0;
  std::vector<int> rank;              // nh*nr: rank of r in list of h, or -1
  std::vector<int> next;              // per resident: next list position
  std::vector<char> matched;          // per resident
  std::vector<char> proposed;         // nr*nh
  std::vector<char> rejected;         // nr*nh
  std::vector<std::vector<int>> props_at;  // per hospital: proposers in order
  EventSequence sequence;

  int cell(int r, int h) const { return r * nh + h; }

  void reset(const Instance& inst) {
    nr = inst.n_residents();
    nh = inst.n_hospitals();
    rank.assign(static_cast<size_t>(nr) * nh, -1);
    for (int h = 0; h < nh; ++h) {
      const auto& pi = inst.hospital_list[h];
      for (int i = 0; i < static_cast<int>(pi.size()); ++i)
        rank[static_cast<size_t>(pi[i]) * nh + h] = i;
    }
    next.assign(nr, 0);
    matched.assign(nr, 0);
    proposed.assign(static_cast<size_t>(nr) * nh, 0);
    rejected.assign(static_cast<size_t>(nr) * nh, 0);
    props_at.assign(nh, {});
    for (auto& v : props_at) v.clear();
    sequence.clear();
  }

  bool is_tentative(int r, int h) const {
    return proposed[cell(r, h)] && !rejected[cell(r, h)];
  }

  void apply_proposal(const Instance& inst, int r) {
    int h = inst.resident_list[r][next[r]];
    ++next[r];
    matched[r] = 1;
    proposed[cell(r, h)] = 1;
    props_at[h].push_back(r);
    sequence.push_back(proposal(Match{r, h}));
  }

  void apply_rejection(const Instance& inst, Match m) {
    assert(is_tentative(m.resident, m.hospital));
    rejected[cell(m.resident, m.hospital)] = 1;
    matched[m.resident] = 0;
    sequence.push_back(rejection(m));
    (void)inst;
  }

  /// Rejections feasible now at hospital h: ousted(prop) \ rej restricted to
  /// h, ordered by list rank with unlisted proposers last.
  void feasible_rejections_at(const Instance& inst, int h,
                              std::vector<Match>* out) const {
    const auto& proposers = props_at[h];
    int listed = 0;
    for (int r : proposers)
      if (rank[static_cast<size_t>(r) * nh + h] >= 0) ++listed;
    if (listed < inst.quota[h]) return;
    std::vector<std::pair<int, int>> hits;  // (order key, resident)
    for (int r : proposers) {
      if (!is_tentative(r, h)) continue;
      int rk = rank[static_cast<size_t>(r) * nh + h];
      if (rk < 0) {
        hits.emplace_back(nh * nr + r, r);  // unlisted: after all listed
        continue;
      }
      int preceding = 0;
      for (int i = 0; i < rk; ++i) {
        int r2 = inst.hospital_list[h][i];
        if (proposed[cell(r2, h)]) ++preceding;
      }
      if (preceding >= inst.quota[h]) hits.emplace_back(rk, r);
    }
    std::sort(hits.begin(), hits.end());
    for (auto& [key, r] : hits) out->push_back(Match{r, h});
  }

  /// Deterministic run to quiescence: residents propose in declaration
  /// order; after each proposal, all feasible rejections are flushed in
  /// hospital-declaration then list order.
  void run(const Instance& inst) {
    std::vector<Match> rejections;
    for (;;) {
      int proposer = -1;
      for (int r = 0; r < nr; ++r) {
        if (!matched[r] &&
            next[r] < static_cast<int>(inst.resident_list[r].size())) {
          proposer = r;
          break;
        }
      }
      if (proposer < 0) break;
      int h = inst.resident_list[proposer][next[proposer]];
      apply_proposal(inst, proposer);
      // Only h gained a proposer, so only h can gain feasible rejections.
      rejections.clear();
      feasible_rejections_at(inst, h, &rejections);
      for (Match m : rejections) apply_rejection(inst, m);
    }
  }

  ExecResult result(const Instance& inst) const {
    ExecResult out;
    out.sequence = sequence;
    for (int r = 0; r < nr; ++r)
      for (int h = 0; h < nh; ++h) {
        if (!proposed[cell(r, h)]) continue;
        out.prop.insert(Match{r, h});
        if (rejected[cell(r, h)]) {
          out.rej.insert(Match{r, h});
        } else {
          out.tent.insert(Match{r, h});
          if (rank[static_cast<size_t>(r) * nh + h] < 0)
            out.pend.insert(Match{r, h});
        }
      }
    (void)inst;
    return out;
  }
};

}  // namespace detail

/// Runs the adapted resident-proposing deferred-acceptance engine to its
/// maximal feasible event sequence, using the deterministic schedule.
inline ExecResult run_da(const Instance& inst) {
  detail::DaState st;
  st.reset(inst);
  st.run(inst);
  return st.result(inst);
}

/// Runs the engine with an arbitrary schedule: at each step every feasible
/// event is collected and `pick(n)` chooses which one to apply. The event
/// multiset of the result is schedule-independent; this entry point exists
/// so tests can exercise that property.
template <class Picker>
ExecResult run_da_scheduled(const Instance& inst, Picker&& pick) {
  detail::DaState st;
  st.reset(inst);
  std::vector<Event> feasible;
  for (;;) {
    feasible.clear();
    for (int r = 0; r < st.nr; ++r)
      if (!st.matched[r] &&
          st.next[r] < static_cast<int>(inst.resident_list[r].size()))
        feasible.push_back(
            proposal(Match{r, inst.resident_list[r][st.next[r]]}));
    std::vector<Match> rejections;
    for (int h = 0; h < st.nh; ++h)
      st.feasible_rejections_at(inst, h, &rejections);
    for (Match m : rejections) feasible.push_back(rejection(m));
    if (feasible.empty()) break;
    const Event& e = feasible[pick(feasible.size())];
    if (e.kind == EventKind::proposal) {
      // apply_proposal consumes the next list entry of the resident.
      assert(inst.resident_list[e.match.resident][st.next[e.match.resident]] ==
             e.match.hospital);
      st.apply_proposal(inst, e.match.resident);
    } else {
      st.apply_rejection(inst, e.match);
    }
  }
  return st.result(inst);
}

/// Checks a sequence against the inductive feasibility rules.
inline bool is_feasible(const Instance& inst, const EventSequence& seq) {
  detail::DaState st;
  st.reset(inst);
  for (const Event& e : seq) {
    const auto [r, h] = e.match;
    if (r < 0 || r >= st.nr || h < 0 || h >= st.nh) return false;
    if (e.kind == EventKind::proposal) {
      if (st.matched[r]) return false;
      if (st.proposed[st.cell(r, h)]) return false;
      int pos = inst.resident_rank(r, h);
      if (pos < 0) return false;
      for (int i = 0; i < pos; ++i)
        if (!st.rejected[st.cell(r, inst.resident_list[r][i])]) return false;
      if (pos != st.next[r]) return false;  // implied by the checks above
      st.apply_proposal(inst, r);
    } else {
      std::vector<Match> rejections;
      st.feasible_rejections_at(inst, h, &rejections);
      if (std::find(rejections.begin(), rejections.end(), e.match) ==
          rejections.end())
        return false;
      st.apply_rejection(inst, e.match);
    }
  }
  return true;
}

/// True when every entry of every resident list is proposed by the engine,
/// i.e. no resident keeps an unconsumed tail.
inline bool is_resident_minimal(const Instance& inst) {
  detail::DaState st;
  st.reset(inst);
  st.run(inst);
  for (int r = 0; r < st.nr; ++r)
    if (st.next[r] < static_cast<int>(inst.resident_list[r].size()))
      return false;
  return true;
}

/// Cuts every resident list to its proposed prefix. The event multiset of
/// the engine is unchanged and the result is resident-minimal.
inline Instance resident_minimal_truncation(const Instance& inst) {
  detail::DaState st;
  st.reset(inst);
  st.run(inst);
  Instance out = inst;
  for (int r = 0; r < st.nr; ++r) out.resident_list[r].resize(st.next[r]);
  return out;
}

/// Extends every hospital list with its missing residents, appended in
/// lexicographic name order. Existing prefixes and resident lists are kept.
inline Instance hospital_complete_extension(const Instance& inst) {
  Instance out = inst;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::vector<int> missing;
    for (int r = 0; r < inst.n_residents(); ++r)
      if (inst.hospital_rank(h, r) < 0) missing.push_back(r);
    std::sort(missing.begin(), missing.end(), [&](int a, int b) {
      return inst.residents[a] < inst.residents[b];
    });
    for (int r : missing) out.hospital_list[h].push_back(r);
  }
  return out;
}

/// Extends every hospital list with a caller-specified tail; tails[h] must
/// be a permutation of the residents missing from the list of h.
inline Instance hospital_complete_extension(
    const Instance& inst, const std::vector<std::vector<int>>& tails) {
  if (static_cast<int>(tails.size()) != inst.n_hospitals())
    throw std::invalid_argument("one tail per hospital required");
  Instance out = inst;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::set<int> missing;
    for (int r = 0; r < inst.n_residents(); ++r)
      if (inst.hospital_rank(h, r) < 0) missing.insert(r);
    std::set<int> given(tails[h].begin(), tails[h].end());
    if (given != missing || tails[h].size() != missing.size())
      throw std::invalid_argument(
          "tail is not a permutation of the missing residents of " +
          inst.hospitals[h]);
    for (int r : tails[h]) out.hospital_list[h].push_back(r);
  }
  return out;
}

}  // namespace ftm
