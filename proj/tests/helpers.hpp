#pragma once

#include <initializer_list>
#include <utility>

#include "ftm/engine.hpp"
#include "ftm/random_gen.hpp"
#include "ftm/rng.hpp"

namespace ftmtest {

using namespace ftm;

/// Worked example: three hospitals of quota 3 and nine residents, with the
/// resident lists cut to their proposed prefixes (resident-minimal form).
inline Instance table1() {
  return parse_instance(
      "hospital X 3 : a i e c b f d\n"
      "hospital Y 3 : i g a b d e c\n"
      "hospital Z 3 : e b g a i d\n"
      "resident a : X\n"
      "resident b : Y\n"
      "resident c : Y X\n"
      "resident d : X\n"
      "resident e : Y\n"
      "resident f : Y X\n"
      "resident g : X Y\n"
      "resident h : Y\n"
      "resident i : Z\n");
}

/// Same instance with unconsumed tails on b and e (not resident-minimal);
/// the engine output is identical.
inline Instance table1_with_tails() {
  Instance inst = table1();
  inst.resident_list[inst.resident_index("b")].push_back(
      inst.hospital_index("X"));
  inst.resident_list[inst.resident_index("e")].push_back(
      inst.hospital_index("X"));
  return inst;
}

inline Match match_of(const Instance& inst, const char* r, const char* h) {
  int ri = inst.resident_index(r);
  int hi = inst.hospital_index(h);
  if (ri < 0 || hi < 0) throw std::logic_error("unknown name in test");
  return Match{ri, hi};
}

inline MatchSet matches(
    const Instance& inst,
    std::initializer_list<std::pair<const char*, const char*>> pairs) {
  MatchSet out;
  for (auto& [r, h] : pairs) out.insert(match_of(inst, r, h));
  return out;
}

inline std::set<int> residents(const Instance& inst,
                               std::initializer_list<const char*> names) {
  std::set<int> out;
  for (const char* n : names) out.insert(inst.resident_index(n));
  return out;
}

/// Textbook resident-proposing deferred acceptance for complete instances;
/// written independently of the engine as a reference oracle.
inline MatchSet textbook_da(const Instance& inst) {
  const int nr = inst.n_residents(), nh = inst.n_hospitals();
  std::vector<std::vector<int>> rank(nh, std::vector<int>(nr, -1));
  for (int h = 0; h < nh; ++h)
    for (int i = 0; i < nr; ++i) rank[h][inst.hospital_list[h][i]] = i;
  std::vector<int> cursor(nr, 0);
  std::vector<int> held_by(nr, -1);
  std::vector<std::set<std::pair<int, int>>> held(nh);  // (rank, resident)
  std::vector<int> free_stack;
  for (int r = nr - 1; r >= 0; --r) free_stack.push_back(r);
  while (!free_stack.empty()) {
    int r = free_stack.back();
    free_stack.pop_back();
    if (cursor[r] >= nh) continue;
    int h = inst.resident_list[r][cursor[r]++];
    held[h].insert({rank[h][r], r});
    held_by[r] = h;
    if (static_cast<int>(held[h].size()) > inst.quota[h]) {
      auto worst = std::prev(held[h].end());
      int loser = worst->second;
      held[h].erase(worst);
      held_by[loser] = -1;
      free_stack.push_back(loser);
    }
  }
  MatchSet out;
  for (int r = 0; r < nr; ++r)
    if (held_by[r] >= 0) out.insert(Match{r, held_by[r]});
  return out;
}

/// Runs the engine with a seeded random scheduler.
inline ExecResult run_da_random(const Instance& inst, std::uint64_t seed) {
  Rng rng(seed);
  return run_da_scheduled(inst, [&rng](std::size_t n) {
    return static_cast<std::size_t>(rng.below(n));
  });
}

inline std::vector<MatchSet> subsets_of(const MatchSet& s) {
  std::vector<Match> items(s.begin(), s.end());
  std::vector<MatchSet> out;
  const std::size_t total = std::size_t{1} << items.size();
  for (std::size_t mask = 0; mask < total; ++mask) {
    MatchSet sub;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.insert(items[i]);
    out.push_back(std::move(sub));
  }
  return out;
}

}  // namespace ftmtest
