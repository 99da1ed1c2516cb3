#pragma once

#include "ftm/engine.hpp"

namespace ftm {

/// Fixpoint output of the maximal-safe-set iteration. The removed sets are
/// pairwise disjoint and together with maximal_safe partition tent(I).
struct SafeSetReport {
  MatchSet maximal_safe;
  std::vector<std::pair<int, MatchSet>> removal_trace;  // (iteration, removed)
};

namespace detail {

inline void require_subset_of_tent(const MatchSet& m, const ExecResult& exec) {
  for (const Match& e : m)
    if (!exec.tent.count(e))
      throw std::invalid_argument("match set is not a subset of tent(I)");
}

}  // namespace detail

/// Residents relevant to h with respect to M: matched in M to h, or matched
/// in M to no hospital at all.
inline std::set<int> relevant_residents(const Instance& inst,
                                        const ExecResult& exec,
                                        const MatchSet& m, int h) {
  detail::require_subset_of_tent(m, exec);
  std::set<int> matched_elsewhere;
  std::set<int> out;
  for (const Match& e : m) {
    if (e.hospital == h)
      out.insert(e.resident);
    else
      matched_elsewhere.insert(e.resident);
  }
  for (int r = 0; r < inst.n_residents(); ++r)
    if (!out.count(r) && !matched_elsewhere.count(r)) out.insert(r);
  return out;
}

inline std::set<int> relevant_residents(const Instance& inst,
                                        const MatchSet& m, int h) {
  return relevant_residents(inst, run_da(inst), m, h);
}

/// Matches of M that could be the next rejection under some completion:
/// a listed (r,h) with quota(h) or more relevant residents before r on the
/// list of h, or a pending (r,h) at a hospital with quota(h)+1 or more
/// relevant residents in total.
inline MatchSet endangered(const Instance& inst, const ExecResult& exec,
                           const MatchSet& m) {
  detail::require_subset_of_tent(m, exec);
  MatchSet out;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::set<int> at_h = residents_at(m, h);
    if (at_h.empty()) continue;
    std::set<int> relevant = relevant_residents(inst, exec, m, h);
    const auto& pi = inst.hospital_list[h];
    for (int r : at_h) {
      int rank = inst.hospital_rank(h, r);
      if (rank >= 0) {
        int preceding = 0;
        for (int i = 0; i < rank; ++i)
          if (relevant.count(pi[i])) ++preceding;
        if (preceding >= inst.quota[h]) out.insert(Match{r, h});
      } else {
        if (static_cast<int>(relevant.size()) >= inst.quota[h] + 1)
          out.insert(Match{r, h});
      }
    }
  }
  return out;
}

inline MatchSet endangered(const Instance& inst, const MatchSet& m) {
  return endangered(inst, run_da(inst), m);
}

/// Iterates M_0 = tent(I), M_i = M_{i-1} \ endangered(M_{i-1}) to the
/// fixpoint, removing each iteration's endangered matches simultaneously.
/// The fixpoint is the unique maximal safe set; every match in it is
/// finalizable.
inline SafeSetReport maximal_safe_set(const Instance& inst,
                                      const ExecResult& exec) {
  SafeSetReport report;
  MatchSet current = exec.tent;
  for (int iteration = 1;; ++iteration) {
    MatchSet removed = endangered(inst, exec, current);
    if (removed.empty()) break;
    for (const Match& e : removed) current.erase(e);
    report.removal_trace.emplace_back(iteration, std::move(removed));
  }
  report.maximal_safe = std::move(current);
  return report;
}

inline SafeSetReport maximal_safe_set(const Instance& inst) {
  return maximal_safe_set(inst, run_da(inst));
}

}  // namespace ftm
