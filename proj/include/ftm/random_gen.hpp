#pragma once

#include "ftm/engine.hpp"
#include "ftm/rng.hpp"

namespace ftm {

struct RandomInstanceParams {
  int n_residents = 4;
  int n_hospitals = 4;
  int quota_max = 1;
  int resident_list_min = 0;
  int resident_list_max = -1;  // -1: up to n_hospitals
  int hospital_list_min = 0;
  int hospital_list_max = -1;  // -1: up to n_residents
  bool force_resident_minimal = false;
  bool force_hospital_complete = false;
  std::uint64_t seed = 0;
};

/// Deterministic pseudo-random instance for the given seed. List contents
/// are uniformly random permutation prefixes within the length bounds;
/// optional flags post-process to a resident-minimal truncation or draw
/// complete hospital lists.
inline Instance random_instance(const RandomInstanceParams& params) {
  if (params.n_residents < 0 || params.n_hospitals < 0)
    throw std::invalid_argument("negative side size");
  if (params.quota_max < 1)
    throw std::invalid_argument("quota bound must be at least 1");
  auto resolve = [](int lo, int hi, int cap, const char* what) {
    if (hi < 0 || hi > cap) hi = cap;
    if (lo < 0) lo = 0;
    if (lo > hi)
      throw std::invalid_argument(std::string("contradictory ") + what +
                                  " list-length bounds");
    return std::pair<int, int>{lo, hi};
  };
  auto [rlo, rhi] = resolve(params.resident_list_min, params.resident_list_max,
                            params.n_hospitals, "resident");
  auto [hlo, hhi] = resolve(params.hospital_list_min, params.hospital_list_max,
                            params.n_residents, "hospital");

  Rng rng(params.seed);
  Instance inst;
  for (int r = 0; r < params.n_residents; ++r)
    inst.residents.push_back("r" + std::to_string(r + 1));
  for (int h = 0; h < params.n_hospitals; ++h)
    inst.hospitals.push_back("h" + std::to_string(h + 1));
  for (int h = 0; h < params.n_hospitals; ++h)
    inst.quota.push_back(rng.range(1, params.quota_max));

  auto draw_list = [&rng](int universe, int len) {
    std::vector<int> pool(universe);
    for (int i = 0; i < universe; ++i) pool[i] = i;
    rng.shuffle(pool);
    pool.resize(len);
    return pool;
  };
  inst.resident_list.resize(params.n_residents);
  for (int r = 0; r < params.n_residents; ++r)
    inst.resident_list[r] =
        draw_list(params.n_hospitals, rng.range(rlo, rhi));
  inst.hospital_list.resize(params.n_hospitals);
  for (int h = 0; h < params.n_hospitals; ++h)
    inst.hospital_list[h] =
        draw_list(params.n_residents,
                  params.force_hospital_complete ? params.n_residents
                                                 : rng.range(hlo, hhi));

  if (params.force_resident_minimal)
    inst = resident_minimal_truncation(inst);
  return inst;
}

}  // namespace ftm
