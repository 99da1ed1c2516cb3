#pragma once

#include <limits>

#include "ftm/engine.hpp"
#include "ftm/marriage_digraph.hpp"
#include "ftm/prescription.hpp"
#include "ftm/safe.hpp"

namespace ftm {

enum class FtmOutcome { finalizable, not_finalizable, unknown };

struct FtmStats {
  long long nodes = 0;
  unsigned long long completions = 0;
};

/// Answer of an exact finalizability decision. A counterexample is present
/// exactly when the outcome is not_finalizable; it is a complete instance
/// extending the input whose engine run rejects the queried match.
struct FtmAnswer {
  FtmOutcome outcome = FtmOutcome::unknown;
  std::optional<Instance> counterexample;
  FtmStats stats;
  bool finalizable() const { return outcome == FtmOutcome::finalizable; }
};

namespace detail {

inline unsigned long long mul_sat(unsigned long long a, unsigned long long b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<unsigned long long>::max() / b)
    return std::numeric_limits<unsigned long long>::max();
  return a * b;
}

inline unsigned long long factorial_sat(int n) {
  unsigned long long f = 1;
  for (int i = 2; i <= n; ++i) f = mul_sat(f, static_cast<unsigned>(i));
  return f;
}

}  // namespace detail

/// Number of completions of an instance: the product, over all residents
/// and hospitals, of the factorial of the missing tail length. Saturates.
inline unsigned long long completion_count(const Instance& inst) {
  unsigned long long count = 1;
  for (const auto& lam : inst.resident_list)
    count = detail::mul_sat(
        count, detail::factorial_sat(inst.n_hospitals() -
                                     static_cast<int>(lam.size())));
  for (const auto& pi : inst.hospital_list)
    count = detail::mul_sat(
        count, detail::factorial_sat(inst.n_residents() -
                                     static_cast<int>(pi.size())));
  return count;
}

/// Decides finalizability by enumerating every completion and running the
/// complete-instance engine on each. Missing tails are appended after the
/// existing prefixes and enumerated as permutations in lexicographic order
/// over declaration indices, residents before hospitals. The first
/// completion without the queried match is returned as counterexample.
inline FtmAnswer ftm_bruteforce(const Instance& inst, Match m,
                                unsigned long long limit) {
  ExecResult base = run_da(inst);
  if (!base.tent.count(m))
    throw std::invalid_argument("queried match is not tentative");
  const unsigned long long total = completion_count(inst);
  if (total > limit)
    throw LimitExceeded("completion count exceeds limit", total);

  Instance j = inst;
  struct Tail {
    std::vector<int>* list;
    int begin;
  };
  std::vector<Tail> tails;
  for (int r = 0; r < inst.n_residents(); ++r) {
    auto& lam = j.resident_list[r];
    int begin = static_cast<int>(lam.size());
    for (int h = 0; h < inst.n_hospitals(); ++h)
      if (inst.resident_rank(r, h) < 0) lam.push_back(h);
    if (static_cast<int>(lam.size()) > begin + 1)
      tails.push_back(Tail{&lam, begin});
  }
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    auto& pi = j.hospital_list[h];
    int begin = static_cast<int>(pi.size());
    for (int r = 0; r < inst.n_residents(); ++r)
      if (inst.hospital_rank(h, r) < 0) pi.push_back(r);
    if (static_cast<int>(pi.size()) > begin + 1)
      tails.push_back(Tail{&pi, begin});
  }

  FtmAnswer ans;
  detail::DaState st;
  for (;;) {
    ++ans.stats.completions;
    st.reset(j);
    st.run(j);
    if (!st.is_tentative(m.resident, m.hospital)) {
      ans.outcome = FtmOutcome::not_finalizable;
      Instance witness = j;
      witness.query = m;
      ans.counterexample = std::move(witness);
      return ans;
    }
    int i = static_cast<int>(tails.size()) - 1;
    for (; i >= 0; --i)
      if (std::next_permutation(tails[i].list->begin() + tails[i].begin,
                                tails[i].list->end()))
        break;
    if (i < 0) break;  // every tail wrapped: enumeration done
  }
  ans.outcome = FtmOutcome::finalizable;
  return ans;
}

namespace detail {

/// Search state of the backtracking decider: the instance extended with the
/// resident-list entries chosen so far, the engine state run to quiescence,
/// and the pending matches rejected so far per hospital (in rejection
/// order). Those rejections are justified by hospital-list completions that
/// place the rejected residents at the very bottom; the k-th pending match
/// rejected at h is feasible in some such completion exactly when h has
/// been proposed by at least quota(h) + k + 1 residents.
struct BtState {
  Instance inst;
  DaState da;
  std::vector<std::vector<int>> pend_rejected;  // per hospital

  bool clean() const {
    for (const auto& v : pend_rejected)
      if (!v.empty()) return false;
    return true;
  }
  bool state_resident_minimal() const {
    for (int r = 0; r < da.nr; ++r)
      if (da.next[r] < static_cast<int>(inst.resident_list[r].size()))
        return false;
    return true;
  }
  bool pending_rejectable(int h, int quota) const {
    return static_cast<int>(da.props_at[h].size()) - 1 -
               static_cast<int>(pend_rejected[h].size()) >=
           quota;
  }

  /// Completion consistent with the path: canonical tails, with each
  /// hospital's rejected pendings at the bottom in reverse rejection order.
  Instance materialize(Match query) const {
    Instance j = inst;
    for (int r = 0; r < j.n_residents(); ++r)
      for (int h = 0; h < j.n_hospitals(); ++h)
        if (inst.resident_rank(r, h) < 0) j.resident_list[r].push_back(h);
    for (int h = 0; h < j.n_hospitals(); ++h) {
      const auto& stack = pend_rejected[h];
      std::set<int> in_stack(stack.begin(), stack.end());
      for (int r = 0; r < j.n_residents(); ++r)
        if (inst.hospital_rank(h, r) < 0 && !in_stack.count(r))
          j.hospital_list[h].push_back(r);
      for (auto it = stack.rbegin(); it != stack.rend(); ++it)
        j.hospital_list[h].push_back(*it);
    }
    j.query = query;
    return j;
  }
};

struct BtDriver {
  Match m;
  long long budget;
  bool allow_parking = true;  // may extensions target hospitals that do
                              // not list the resident?
  FtmStats stats;
  std::optional<Instance> counterexample;
  // States proven finalizable, keyed by the resident-list extensions and
  // the sets of enacted pending rejections; different move orders reach
  // the same state and share the verdict.
  std::set<std::vector<int>> finalizable_states;
  const std::vector<std::vector<int>>* base_lists = nullptr;
  // Hospitals that can ever host a pending match that stems from an
  // original list entry. An unlisted extension proposal (a "park") can
  // influence the execution only through the pending-rejection count at
  // its hospital; listed rejections never count unlisted proposers, and at
  // a hospital no original list entry can pend on, every pending is itself
  // a park, so clusters of parks there only shuffle each other and can be
  // dropped from any rejecting completion. Parking is therefore restricted
  // to these hospitals without losing completeness.
  std::vector<char> park_ok;

  // Appended list entries are always consumed immediately, so a state is
  // determined by each resident's extension set and current match plus the
  // per-hospital sets of enacted pending rejections; the orders the search
  // took to get there do not matter.
  std::vector<int> state_key(const BtState& st) const {
    std::vector<int> key;
    for (int r = 0; r < st.inst.n_residents(); ++r) {
      const auto& lam = st.inst.resident_list[r];
      std::vector<int> ext(lam.begin() + static_cast<long>((*base_lists)[r].size()),
                           lam.end());
      std::sort(ext.begin(), ext.end());
      key.insert(key.end(), ext.begin(), ext.end());
      key.push_back(st.da.matched[r] ? lam[st.da.next[r] - 1] : -3);
      key.push_back(-1);
    }
    for (const auto& stack : st.pend_rejected) {
      std::vector<int> sorted(stack);
      std::sort(sorted.begin(), sorted.end());
      key.insert(key.end(), sorted.begin(), sorted.end());
      key.push_back(-1);
    }
    return key;
  }

  FtmOutcome found(const BtState& st) {
    Instance j = st.materialize(m);
    ExecResult check = run_da(j);
    if (!check.rej.count(m))
      throw std::logic_error("backtrack counterexample failed verification");
    counterexample = std::move(j);
    return FtmOutcome::not_finalizable;
  }

  FtmOutcome search(BtState& st) {
    // closure: run the engine to quiescence over the current lists
    st.da.run(st.inst);
    std::vector<int> key = state_key(st);
    if (finalizable_states.count(key)) return FtmOutcome::finalizable;
    FtmOutcome outcome = search_closed(st);
    if (outcome == FtmOutcome::finalizable)
      finalizable_states.insert(std::move(key));
    return outcome;
  }

  FtmOutcome search_closed(BtState& st) {
    if (++stats.nodes > budget) return FtmOutcome::unknown;
    if (st.da.rejected[st.da.cell(m.resident, m.hospital)]) return found(st);

    if (st.clean()) {
      ExecResult exec = st.da.result(st.inst);
      if (maximal_safe_set(st.inst, exec).maximal_safe.count(m))
        return FtmOutcome::finalizable;
      if (st.inst.is_marriage() && st.inst.is_hospital_complete() &&
          st.state_resident_minimal()) {
        RmMarriageAnswer rm =
            ftm_rm_marriage(st.inst, exec, m, RootPolicy::p_only);
        if (rm.finalizable) return FtmOutcome::finalizable;
        BtState leaf = st;
        leaf.inst = gi_path_extension(st.inst, exec, *rm.witness_path);
        leaf.da.run(leaf.inst);
        if (!leaf.da.rejected[leaf.da.cell(m.resident, m.hospital)])
          throw std::logic_error("digraph witness failed to reject the match");
        return found(leaf);
      }
      // Certificate pruning through the resident-minimal truncation: if no
      // prescription targets m there, m is finalizable in the truncation
      // and therefore in this branch. On branches that are themselves
      // resident-minimal the certificate also decides the negative side.
      if (!exec.pend.count(m)) {
        Instance cut = st.inst;
        for (int r = 0; r < cut.n_residents(); ++r)
          cut.resident_list[r].resize(static_cast<size_t>(st.da.next[r]));
        ExecResult cut_exec = run_da(cut);
        bool capped = false;
        auto cert =
            rm_certificate_search(cut, cut_exec, m, 50'000, &capped);
        if (!cert && !capped) return FtmOutcome::finalizable;
        if (cert && st.state_resident_minimal()) {
          PrescriptionVerdict verdict =
              validate_prescription(cut, cut_exec, *cert, PrescMode::general);
          if (!verdict.valid || !verdict.target.count(m))
            throw std::logic_error(
                "certificate search produced an invalid prescription");
          auto [hc, projected] = project_prescription(cut, *cert);
          auto [ext, ext_exec] = prescription_to_extension(hc, projected);
          if (!ext_exec.rej.count(m))
            throw std::logic_error("certificate extension missed its target");
          BtState leaf;
          leaf.inst = std::move(ext);
          leaf.da.reset(leaf.inst);
          leaf.da.run(leaf.inst);
          leaf.pend_rejected.assign(leaf.inst.n_hospitals(), {});
          return found(leaf);
        }
      }
    }

    bool any_unknown = false;

    int branch_r = -1;
    for (int r = 0; r < st.da.nr; ++r) {
      const auto& lam = st.inst.resident_list[r];
      if (!st.da.matched[r] &&
          st.da.next[r] == static_cast<int>(lam.size()) &&
          static_cast<int>(lam.size()) < st.da.nh) {
        branch_r = r;
        break;
      }
    }
    if (branch_r >= 0) {
      // Every completion continues with some next proposal of this
      // resident; branching over its target partitions the completions.
      // Hospitals that list the resident come first: proposals there can
      // oust someone, while the rest only park the resident as pending.
      std::vector<int> candidates;
      for (int listed = 1; listed >= (allow_parking ? 0 : 1); --listed)
        for (int h = 0; h < st.da.nh; ++h) {
          if (st.inst.resident_rank(branch_r, h) >= 0) continue;
          bool is_listed = st.inst.hospital_rank(h, branch_r) >= 0;
          if (is_listed != (listed == 1)) continue;
          if (!is_listed && !park_ok[h]) continue;
          candidates.push_back(h);
        }
      for (int h : candidates) {
        BtState child = st;
        child.inst.resident_list[branch_r].push_back(h);
        FtmOutcome sub = search(child);
        if (sub == FtmOutcome::not_finalizable) return sub;
        if (sub == FtmOutcome::unknown) {
          if (stats.nodes > budget) return FtmOutcome::unknown;
          any_unknown = true;
        }
      }
    } else {
      for (int h = 0; h < st.da.nh; ++h) {
        for (int r : st.da.props_at[h]) {
          if (!st.da.is_tentative(r, h)) continue;
          if (st.da.rank[static_cast<size_t>(r) * st.da.nh + h] >= 0)
            continue;  // listed matches are handled by the closure
          if (!st.pending_rejectable(h, st.inst.quota[h])) continue;
          BtState child = st;
          child.da.apply_rejection(child.inst, Match{r, h});
          child.pend_rejected[h].push_back(r);
          FtmOutcome sub = search(child);
          if (sub == FtmOutcome::not_finalizable) return sub;
          if (sub == FtmOutcome::unknown) {
            if (stats.nodes > budget) return FtmOutcome::unknown;
            any_unknown = true;
          }
        }
      }
    }
    return any_unknown ? FtmOutcome::unknown : FtmOutcome::finalizable;
  }
};

}  // namespace detail

/// Depth-first exact decision. Branches on the next hospital of the first
/// resident whose list is exhausted (residents and candidate hospitals in
/// declaration order) and on rejections of pending matches justified by
/// adversarial hospital-list completions. A branch is pruned as finalizable
/// when the match enters its maximal safe set, and marriage branches that
/// are resident-minimal and hospital-complete are answered through the
/// tentative-match digraph. Returns unknown once `budget` nodes have been
/// explored.
inline FtmAnswer ftm_backtrack(const Instance& inst, Match m,
                               long long budget = 1'000'000) {
  detail::BtState root;
  root.inst = inst;
  root.inst.query.reset();
  root.da.reset(root.inst);
  root.pend_rejected.assign(inst.n_hospitals(), {});
  root.da.run(root.inst);
  if (!root.da.is_tentative(m.resident, m.hospital))
    throw std::invalid_argument("queried match is not tentative");
  {
    ExecResult exec = root.da.result(root.inst);
    if (maximal_safe_set(root.inst, exec).maximal_safe.count(m)) {
      FtmAnswer ans;
      ans.outcome = FtmOutcome::finalizable;
      ans.stats.nodes = 1;
      return ans;
    }
  }

  std::vector<char> park_ok(inst.n_hospitals(), 0);
  for (int r = 0; r < inst.n_residents(); ++r)
    for (int h : inst.resident_list[r])
      if (inst.hospital_rank(h, r) < 0) park_ok[h] = 1;
  bool any_parking = std::find(park_ok.begin(), park_ok.end(), 1) !=
                     park_ok.end();

  // First pass: extensions restricted to hospitals that list the resident.
  // Such a pass finds most rejection chains quickly and its negative
  // answers are sound; only its positive answers are inconclusive, since
  // an adversarial completion may park residents as pending proposers.
  detail::BtDriver first;
  first.m = m;
  first.budget = any_parking ? std::max<long long>(budget / 2, 1) : budget;
  first.allow_parking = false;
  first.base_lists = &inst.resident_list;
  first.park_ok = park_ok;
  {
    detail::BtState pass_state = root;
    FtmOutcome outcome = first.search(pass_state);
    if (outcome == FtmOutcome::not_finalizable || !any_parking) {
      FtmAnswer ans;
      ans.outcome = outcome;
      ans.stats = first.stats;
      ans.counterexample = std::move(first.counterexample);
      return ans;
    }
  }

  detail::BtDriver driver;
  driver.m = m;
  driver.budget = std::max<long long>(budget - first.stats.nodes, 1);
  driver.base_lists = &inst.resident_list;
  driver.park_ok = park_ok;
  FtmOutcome outcome = driver.search(root);
  FtmAnswer ans;
  ans.outcome = outcome;
  ans.stats = driver.stats;
  ans.stats.nodes += first.stats.nodes;
  if (outcome == FtmOutcome::not_finalizable)
    ans.counterexample = std::move(driver.counterexample);
  return ans;
}

}  // namespace ftm
