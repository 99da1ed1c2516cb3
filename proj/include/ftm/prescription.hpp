#pragma once

#include "ftm/engine.hpp"

namespace ftm {

/// A certificate candidate for non-finalizability on a resident-minimal
/// instance: a set P of new proposals and a set X of rejections.
struct Prescription {
  MatchSet proposals;   // P: matches outside prop(I), at most one per resident
  MatchSet rejections;  // X: matches inside tent(I)
};

/// Matches of X whose resident appears in no match of P. These are the
/// matches the prescription certifies as rejectable.
inline MatchSet target_set(const Prescription& p) {
  std::set<int> in_p = residents_of(p.proposals);
  MatchSet out;
  for (const Match& e : p.rejections)
    if (!in_p.count(e.resident)) out.insert(e);
  return out;
}

enum class PrescCondition { P1, P2, P3, P4, P5, P6, P6prime };

enum class PrescMode { hospital_complete, general };

struct PrescriptionVerdict {
  bool valid = false;
  std::set<PrescCondition> failed;
  MatchSet target;
};

namespace detail {

/// Condition checks shared by the validator and the certificate search.
/// Assumes the preconditions (resident-minimal instance, mode consistent
/// with pend(I)) were already enforced by the caller.
inline std::set<PrescCondition> failed_conditions(const Instance& inst,
                                                  const ExecResult& exec,
                                                  const Prescription& p,
                                                  PrescMode mode) {
  std::set<PrescCondition> failed;
  const MatchSet& P = p.proposals;
  const MatchSet& X = p.rejections;

  for (const Match& e : P)
    if (exec.prop.count(e)) {
      failed.insert(PrescCondition::P1);
      break;
    }
  {
    std::set<int> seen;
    for (const Match& e : P)
      if (!seen.insert(e.resident).second) {
        failed.insert(PrescCondition::P2);
        break;
      }
  }
  for (const Match& e : X)
    if (!exec.tent.count(e)) {
      failed.insert(PrescCondition::P3);
      break;
    }
  {
    std::set<int> res_p = residents_of(P);
    std::set<int> res_x = residents_of(X);
    for (const Match& e : exec.tent)
      if (res_p.count(e.resident) && !res_x.count(e.resident)) {
        failed.insert(PrescCondition::P4);
        break;
      }
  }

  // Survivors per hospital: res_h(P u (tent(I) \ X)).
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::set<int> survivors;
    for (const Match& e : P)
      if (e.hospital == h) survivors.insert(e.resident);
    for (const Match& e : exec.tent)
      if (e.hospital == h && !X.count(e)) survivors.insert(e.resident);
    std::set<int> x_h = residents_at(X, h);
    int count = static_cast<int>(survivors.size());
    if (count > inst.quota[h] || (!x_h.empty() && count != inst.quota[h]))
      failed.insert(PrescCondition::P5);

    if (mode == PrescMode::hospital_complete) {
      // P6: every survivor precedes every member of res_h X on the list.
      bool ok = true;
      for (int r : x_h) {
        int xr = inst.hospital_rank(h, r);
        for (int s : survivors) {
          int sr = inst.hospital_rank(h, s);
          if (sr < 0 || xr < 0 || sr >= xr) ok = false;
        }
      }
      if (!ok) failed.insert(PrescCondition::P6);
    } else {
      // P6': as P6 but between the listed survivors of the instance and
      // the listed members of X; and a listed rejection at h forces every
      // pending match at h into X.
      bool ok = true;
      std::set<int> pend_h = residents_at(exec.pend, h);
      std::set<int> left;
      for (const Match& e : P)
        if (e.hospital == h) left.insert(e.resident);
      for (const Match& e : exec.tent)
        if (e.hospital == h && !X.count(e) && !exec.pend.count(e))
          left.insert(e.resident);
      std::vector<int> right;  // res_h(X \ pend)
      for (int r : x_h)
        if (!pend_h.count(r)) right.push_back(r);
      for (int r : right) {
        int xr = inst.hospital_rank(h, r);
        for (int s : left) {
          int sr = inst.hospital_rank(h, s);
          if (sr < 0 || sr >= xr) ok = false;
        }
      }
      if (!right.empty())
        for (int r : pend_h)
          if (!x_h.count(r)) ok = false;
      if (!ok) failed.insert(PrescCondition::P6prime);
    }
  }
  return failed;
}

}  // namespace detail

/// Checks the prescription conditions literally as stated and reports every
/// failure together with the target set. Hospital-complete mode checks
/// P1-P6 and requires pend(I) to be empty; general mode checks P1-P5 and
/// P6'.
inline PrescriptionVerdict validate_prescription(const Instance& inst,
                                                 const ExecResult& exec,
                                                 const Prescription& p,
                                                 PrescMode mode) {
  if (!is_resident_minimal(inst))
    throw std::invalid_argument("instance is not resident-minimal");
  if (mode == PrescMode::hospital_complete && !exec.pend.empty())
    throw std::invalid_argument(
        "hospital-complete mode requires an instance without pending "
        "matches");
  PrescriptionVerdict out;
  out.failed = detail::failed_conditions(inst, exec, p, mode);
  out.valid = out.failed.empty();
  out.target = target_set(p);
  if (out.valid && mode == PrescMode::hospital_complete) {
    // |res P \ res tent(I)| >= |target| for every valid hospital-complete
    // prescription. The bound does not carry over to general mode, where a
    // pending member of X can be rejected by the completion alone.
    std::set<int> fresh = residents_of(p.proposals);
    for (const Match& e : exec.tent) fresh.erase(e.resident);
    if (fresh.size() < out.target.size())
      throw std::logic_error("readiness bound violated by a prescription "
                             "that passed validation");
  }
  return out;
}

inline PrescriptionVerdict validate_prescription(const Instance& inst,
                                                 const Prescription& p,
                                                 PrescMode mode) {
  return validate_prescription(inst, run_da(inst), p, mode);
}

/// Executes a valid hospital-complete-mode prescription: repeatedly appends
/// the pending part of P for residents unmatched in the current tent and
/// reruns the engine, until every target match is rejected. Returns the
/// extension together with its execution.
inline std::pair<Instance, ExecResult> prescription_to_extension(
    const Instance& inst, const Prescription& p) {
  ExecResult base = run_da(inst);
  PrescriptionVerdict verdict =
      validate_prescription(inst, base, p, PrescMode::hospital_complete);
  if (!verdict.valid)
    throw std::invalid_argument("prescription fails validation");

  Instance j = inst;
  ExecResult exec = base;
  MatchSet remaining = p.proposals;
  auto target_rejected = [&] {
    for (const Match& e : verdict.target)
      if (!exec.rej.count(e)) return false;
    return true;
  };
  int guard = static_cast<int>(p.proposals.size()) + 1;
  while (!target_rejected()) {
    MatchSet q;
    std::set<int> matched = residents_of(exec.tent);
    for (const Match& e : remaining)
      if (!matched.count(e.resident)) q.insert(e);
    if (q.empty() || guard-- <= 0)
      throw std::invalid_argument(
          "prescription stalled before rejecting its target");
    for (const Match& e : q) {
      j.resident_list[e.resident].push_back(e.hospital);
      remaining.erase(e);
    }
    exec = run_da(j);
  }
  return {std::move(j), std::move(exec)};
}

/// Pulls a prescription for a resident-changeless hospital-complete
/// extension back to the truncated instance: X = Y u (rej(I') \ rej(I)).
inline Prescription lift_prescription(const Instance& inst,
                                      const Instance& inst_hc,
                                      const Prescription& p) {
  if (inst_hc.residents != inst.residents ||
      inst_hc.hospitals != inst.hospitals || inst_hc.quota != inst.quota ||
      inst_hc.resident_list != inst.resident_list)
    throw std::invalid_argument("extension must be resident-changeless");
  if (!inst_hc.is_hospital_complete())
    throw std::invalid_argument("extension must be hospital-complete");
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    const auto& shorter = inst.hospital_list[h];
    const auto& longer = inst_hc.hospital_list[h];
    if (shorter.size() > longer.size() ||
        !std::equal(shorter.begin(), shorter.end(), longer.begin()))
      throw std::invalid_argument("hospital lists must extend the input");
  }
  ExecResult base = run_da(inst);
  ExecResult ext = run_da(inst_hc);
  Prescription out;
  out.proposals = p.proposals;
  out.rejections = p.rejections;
  for (const Match& e : ext.rej)
    if (!base.rej.count(e)) out.rejections.insert(e);
  return out;
}

/// Pushes a general-mode prescription onto a canonical resident-changeless
/// hospital-complete extension: each hospital list is completed with the
/// residents of res_h(pend(I) n X) ranked lowest (remaining ties by
/// declaration order), and Y = X \ rej(I').
inline std::pair<Instance, Prescription> project_prescription(
    const Instance& inst, const Prescription& p) {
  ExecResult base = run_da(inst);
  PrescriptionVerdict verdict =
      validate_prescription(inst, base, p, PrescMode::general);
  if (!verdict.valid)
    throw std::invalid_argument("prescription fails validation");

  Instance completed = inst;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::set<int> lowest;
    for (const Match& e : base.pend)
      if (e.hospital == h && p.rejections.count(e)) lowest.insert(e.resident);
    for (int r = 0; r < inst.n_residents(); ++r)
      if (inst.hospital_rank(h, r) < 0 && !lowest.count(r))
        completed.hospital_list[h].push_back(r);
    for (int r : lowest) completed.hospital_list[h].push_back(r);
  }
  ExecResult ext = run_da(completed);
  Prescription projected;
  projected.proposals = p.proposals;
  for (const Match& e : p.rejections)
    if (!ext.rej.count(e)) projected.rejections.insert(e);
  return {std::move(completed), std::move(projected)};
}

namespace detail {

/// Demand-driven search for a general-mode prescription with the given
/// match in its target set, on a resident-minimal instance. Rejections are
/// processed per hospital: the quota must be refilled by residents that
/// precede every listed rejection, each new proposer either being unmatched
/// or having its own tentative match rejected in turn (which queues the
/// next demand). Backtracks over refill choices; at most one proposal per
/// resident. Complete: when it reports no prescription (and the step cap
/// was not hit), none exists.
struct RmCertificateSearch {
  const Instance& inst;
  const ExecResult& exec;
  Match target;
  long long cap;
  long long steps = 0;
  bool capped = false;

  std::vector<int> tent_of;                 // resident -> hospital or -1
  std::vector<std::vector<Match>> tent_at;  // per hospital

  struct State {
    MatchSet x;
    std::vector<int> p_of;      // resident -> hospital or -1
    std::vector<int> committed; // per hospital: |x at h| when processed
  };

  RmCertificateSearch(const Instance& inst_, const ExecResult& exec_,
                      Match target_, long long cap_)
      : inst(inst_), exec(exec_), target(target_), cap(cap_) {
    tent_of.assign(inst.n_residents(), -1);
    tent_at.assign(inst.n_hospitals(), {});
    for (const Match& e : exec.tent) {
      tent_of[e.resident] = e.hospital;
      tent_at[e.hospital].push_back(e);
    }
  }

  int x_size_at(const State& st, int h) const {
    int n = 0;
    for (const Match& e : st.x)
      if (e.hospital == h) ++n;
    return n;
  }

  bool needs_processing(const State& st, int h) const {
    int xh = x_size_at(st, h);
    int kept = static_cast<int>(tent_at[h].size()) - xh;
    if (xh == 0 && kept <= inst.quota[h]) return false;
    return st.committed[h] != xh;
  }

  std::optional<Prescription> run() {
    State st;
    st.x.insert(target);
    st.p_of.assign(inst.n_residents(), -1);
    st.committed.assign(inst.n_hospitals(), -1);
    Prescription out;
    if (solve(std::move(st), &out)) return out;
    return std::nullopt;
  }

  bool solve(State st, Prescription* out) {
    if (++steps > cap) {
      capped = true;
      return false;
    }
    int h = -1;
    for (int i = 0; i < inst.n_hospitals(); ++i)
      if (needs_processing(st, i)) {
        h = i;
        break;
      }
    if (h < 0) {
      out->proposals.clear();
      for (int r = 0; r < inst.n_residents(); ++r)
        if (st.p_of[r] >= 0) out->proposals.insert(Match{r, st.p_of[r]});
      out->rejections = st.x;
      return true;
    }

    // Reprocessing h: its previous refill choices are withdrawn (escapes
    // already forced into X stay there and simply become extra demands).
    for (int r = 0; r < inst.n_residents(); ++r)
      if (st.p_of[r] == h) st.p_of[r] = -1;

    // Precedence closure at h: a listed rejection drags every pending
    // match and every lower-ranked listed match at h into X.
    int cutoff = -1;  // min rank among listed rejections, -1 when none
    for (const Match& e : st.x) {
      if (e.hospital != h) continue;
      int rank = inst.hospital_rank(h, e.resident);
      if (rank >= 0 && (cutoff < 0 || rank < cutoff)) cutoff = rank;
    }
    if (cutoff >= 0)
      for (const Match& e : tent_at[h]) {
        int rank = inst.hospital_rank(h, e.resident);
        if (rank < 0 || rank > cutoff) st.x.insert(e);
      }

    std::vector<Match> kept;  // tent at h outside X (the tent survivors)
    for (const Match& e : tent_at[h])
      if (!st.x.count(e)) kept.push_back(e);
    const int excess = static_cast<int>(kept.size()) - inst.quota[h];

    // Over-quota survivors are only possible through pendings; branch on
    // which of them the completion rejects.
    std::vector<Match> droppable;
    if (excess > 0) {
      for (const Match& e : kept)
        if (inst.hospital_rank(h, e.resident) < 0) droppable.push_back(e);
      if (static_cast<int>(droppable.size()) < excess) return false;
    }
    std::vector<int> drop_pick;
    auto with_drops = [&](auto&& self, std::size_t from, int left) -> bool {
      if (left > 0) {
        for (std::size_t i = from; i + left <= droppable.size(); ++i) {
          drop_pick.push_back(static_cast<int>(i));
          bool hit = self(self, i + 1, left - 1);
          drop_pick.pop_back();
          if (hit) return true;
        }
        return false;
      }
      State st2 = st;
      for (int i : drop_pick) st2.x.insert(droppable[static_cast<size_t>(i)]);
      int survivors = 0;
      for (const Match& e : tent_at[h])
        if (!st2.x.count(e)) ++survivors;
      const int need = inst.quota[h] - survivors;
      if (need < 0) return false;

      // Refill candidates: new proposers at h. With a listed rejection
      // they must precede it on the list; otherwise any resident works.
      std::vector<int> cands;
      for (int r = 0; r < inst.n_residents(); ++r) {
        if (st2.p_of[r] >= 0 || r == target.resident) continue;
        if (exec.prop.count(Match{r, h})) continue;
        if (cutoff >= 0) {
          int rank = inst.hospital_rank(h, r);
          if (rank < 0 || rank >= cutoff) continue;
        }
        cands.push_back(r);
      }
      if (static_cast<int>(cands.size()) < need) return false;
      std::vector<int> pick;
      auto with_fillers = [&](auto&& self2, std::size_t from2,
                              int left2) -> bool {
        if (left2 > 0) {
          for (std::size_t i = from2; i + left2 <= cands.size(); ++i) {
            pick.push_back(static_cast<int>(i));
            bool hit = self2(self2, i + 1, left2 - 1);
            pick.pop_back();
            if (hit) return true;
          }
          return false;
        }
        State st3 = st2;
        for (int i : pick) {
          int r = cands[static_cast<size_t>(i)];
          st3.p_of[r] = h;
          if (tent_of[r] >= 0) st3.x.insert(Match{r, tent_of[r]});
        }
        st3.committed[h] = x_size_at(st3, h);
        return solve(std::move(st3), out);
      };
      return with_fillers(with_fillers, 0, need);
    };
    return with_drops(with_drops, 0, excess > 0 ? excess : 0);
  }
};

/// Existence of a prescription targeting m on a resident-minimal instance.
/// Returns nullopt when none exists; `capped` reports a truncated search.
inline std::optional<Prescription> rm_certificate_search(
    const Instance& inst, const ExecResult& exec, Match m,
    long long step_cap, bool* capped) {
  RmCertificateSearch search(inst, exec, m, step_cap);
  auto out = search.run();
  if (capped) *capped = search.capped;
  return out;
}

}  // namespace detail

/// Exhaustive certificate search: the general-mode prescription with the
/// queried match in its target that minimizes |P|, ties broken by the
/// lexicographically smallest P and then X over (resident, hospital)
/// declaration indices. Returns nothing exactly when the match is
/// finalizable. Worst-case exponential; intended for small instances.
inline std::optional<Prescription> find_prescription(const Instance& inst,
                                                     Match m) {
  ExecResult exec = run_da(inst);
  if (!is_resident_minimal(inst))
    throw std::invalid_argument("instance is not resident-minimal");
  if (!exec.tent.count(m))
    throw std::invalid_argument("queried match is not tentative");
  if (exec.pend.count(m))
    throw std::invalid_argument(
        "certificate search covers non-pending matches only");

  // Candidate proposals: unproposed pairs, excluding the queried resident
  // so that the match stays in the target set.
  std::vector<Match> cands;
  for (int r = 0; r < inst.n_residents(); ++r) {
    if (r == m.resident) continue;
    for (int h = 0; h < inst.n_hospitals(); ++h)
      if (!exec.prop.count(Match{r, h})) cands.push_back(Match{r, h});
  }
  std::vector<Match> tent_rest(exec.tent.begin(), exec.tent.end());
  std::erase(tent_rest, m);

  std::vector<int> tent_of(inst.n_residents(), -1);
  for (const Match& e : exec.tent) tent_of[e.resident] = e.hospital;

  std::optional<Prescription> best;
  std::vector<int> pick;
  auto try_p = [&](const std::vector<int>& chosen) -> bool {
    Prescription p;
    std::vector<int> at_h(inst.n_hospitals(), 0);
    for (int i : chosen) {
      const Match& e = cands[i];
      if (++at_h[e.hospital] > inst.quota[e.hospital]) return false;  // P5
      p.proposals.insert(e);
    }
    // Forced rejections (P4): the tentative match of every resident of P.
    MatchSet forced;
    forced.insert(m);
    for (const Match& e : p.proposals)
      if (tent_of[e.resident] >= 0)
        forced.insert(Match{e.resident, tent_of[e.resident]});
    std::vector<Match> optional_x;
    for (const Match& e : tent_rest)
      if (!forced.count(e)) optional_x.push_back(e);
    const size_t buckets = size_t{1} << optional_x.size();
    for (size_t mask = 0; mask < buckets; ++mask) {
      p.rejections = forced;
      for (size_t i = 0; i < optional_x.size(); ++i)
        if (mask & (size_t{1} << i)) p.rejections.insert(optional_x[i]);
      if (detail::failed_conditions(inst, exec, p, PrescMode::general)
              .empty()) {
        best = p;
        return true;
      }
    }
    return false;
  };

  std::function<bool(size_t, int)> combos = [&](size_t from, int left) {
    if (left == 0) return try_p(pick);
    for (size_t i = from; i + left <= cands.size(); ++i) {
      pick.push_back(static_cast<int>(i));
      bool hit = combos(i + 1, left - 1);
      pick.pop_back();
      if (hit) return true;
    }
    return false;
  };

  int max_k = std::min<int>(static_cast<int>(cands.size()),
                            inst.n_residents());
  for (int k = 0; k <= max_k; ++k) {
    pick.clear();
    if (combos(0, k)) break;
  }
  return best;
}

}  // namespace ftm
