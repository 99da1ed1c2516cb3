#pragma once

#include <array>

#include "ftm/engine.hpp"
#include "ftm/firing.hpp"
#include "ftm/sat.hpp"

namespace ftm {

namespace detail {

struct VarOccurrences {
  int neg_clause = -1;   // clause with the negative occurrence
  int pos_clause[2] = {-1, -1};  // clauses with the positive occurrences
};

/// Per-variable occurrence map of a normalized clause set.
inline std::vector<VarOccurrences> occurrence_map(const ClauseSet& s) {
  if (!is_normalized(s))
    throw std::invalid_argument("clause set is not normalized");
  std::vector<VarOccurrences> occ(s.n_vars + 1);
  for (int ci = 0; ci < static_cast<int>(s.clauses.size()); ++ci)
    for (int lit : s.clauses[ci]) {
      VarOccurrences& o = occ[std::abs(lit)];
      if (lit < 0)
        o.neg_clause = ci;
      else if (o.pos_clause[0] < 0)
        o.pos_clause[0] = ci;
      else
        o.pos_clause[1] = ci;
    }
  return occ;
}

}  // namespace detail

/// Builds the marriage instance in which the distinguished tentative match
/// (r1, h0) is finalizable exactly when the normalized clause set is
/// unsatisfiable. Hospital-list tails beyond the shown prefixes are left
/// truncated; resident lists are exactly the shown prefixes. Requires at
/// least one clause.
inline std::pair<Instance, Match> sat_to_ftm(const ClauseSet& s) {
  const auto occ = detail::occurrence_map(s);
  const int m = static_cast<int>(s.clauses.size());
  if (m == 0)
    throw std::invalid_argument("clause set must contain a clause");

  Instance inst;
  auto add_resident = [&](std::string name) {
    inst.residents.push_back(std::move(name));
    inst.resident_list.emplace_back();
    return inst.n_residents() - 1;
  };
  auto add_hospital = [&](std::string name) {
    inst.hospitals.push_back(std::move(name));
    inst.quota.push_back(1);
    inst.hospital_list.emplace_back();
    return inst.n_hospitals() - 1;
  };

  const int r0 = add_resident("r0");
  const int r1 = add_resident("r1");
  // Per variable x: r_x^1, r_x^2 (choosers), p_x^0..p_x^2 (occurrence
  // residents; p_x^0 carries the negative occurrence).
  std::vector<std::array<int, 2>> chooser(s.n_vars + 1);
  std::vector<std::array<int, 3>> carrier(s.n_vars + 1);
  for (int x = 1; x <= s.n_vars; ++x) {
    const std::string vx = "x" + std::to_string(x);
    chooser[x] = {add_resident(vx + "_r1"), add_resident(vx + "_r2")};
    carrier[x] = {add_resident(vx + "_p0"), add_resident(vx + "_p1"),
                  add_resident(vx + "_p2")};
  }
  const int h0 = add_hospital("h0");
  std::vector<std::array<int, 2>> neg_h(s.n_vars + 1), pos_h(s.n_vars + 1);
  for (int x = 1; x <= s.n_vars; ++x) {
    const std::string vx = "x" + std::to_string(x);
    neg_h[x] = {add_hospital(vx + "_hn1"), add_hospital(vx + "_hn2")};
    pos_h[x] = {add_hospital(vx + "_hp1"), add_hospital(vx + "_hp2")};
  }
  std::vector<int> clause_h(m);
  for (int j = 0; j < m; ++j)
    clause_h[j] = add_hospital("c" + std::to_string(j + 1));

  inst.hospital_list[h0] = {r0, r1};
  for (int x = 1; x <= s.n_vars; ++x)
    for (int i = 0; i < 2; ++i) {
      inst.hospital_list[neg_h[x][i]] = {chooser[x][i], carrier[x][0]};
      inst.hospital_list[pos_h[x][i]] = {chooser[x][i], carrier[x][i + 1]};
    }
  for (int j = 0; j < m; ++j) {
    for (int lit : s.clauses[j]) {
      const int x = std::abs(lit);
      if (lit < 0)
        inst.hospital_list[clause_h[j]].push_back(carrier[x][0]);
      else
        inst.hospital_list[clause_h[j]].push_back(
            carrier[x][occ[x].pos_clause[0] == j ? 1 : 2]);
    }
    inst.hospital_list[clause_h[j]].push_back(r0);
  }

  for (int j = 0; j < m; ++j) inst.resident_list[r0].push_back(clause_h[j]);
  inst.resident_list[r0].push_back(h0);
  inst.resident_list[r1] = {h0};
  for (int x = 1; x <= s.n_vars; ++x) {
    inst.resident_list[carrier[x][0]] = {neg_h[x][0], neg_h[x][1],
                                         clause_h[occ[x].neg_clause]};
    inst.resident_list[carrier[x][1]] = {pos_h[x][0],
                                         clause_h[occ[x].pos_clause[0]]};
    inst.resident_list[carrier[x][2]] = {pos_h[x][1],
                                         clause_h[occ[x].pos_clause[1]]};
  }
  const Match query{r1, h0};
  inst.query = query;
  inst.check_valid();
  return {std::move(inst), query};
}

/// Builds the DAG whose theta-firings containing the target correspond to
/// satisfying assignments of the normalized clause set: a chain a_i -> b_i
/// -> b_{i+1} per clause, and per variable a gadget in which firing the
/// negative literal vertex excludes firing either positive literal vertex.
inline FiringInstance sat_to_firing(const ClauseSet& s) {
  const auto occ = detail::occurrence_map(s);
  const int m = static_cast<int>(s.clauses.size());
  if (m == 0)
    throw std::invalid_argument("clause set must contain a clause");

  FiringInstance f;
  auto add_vertex = [&](std::string name) {
    f.vertex_names.push_back(std::move(name));
    f.theta.push_back(0);
    return f.n_vertices() - 1;
  };
  std::vector<int> a(m), b(m);
  for (int i = 0; i < m; ++i) {
    a[i] = add_vertex("a" + std::to_string(i + 1));
    b[i] = add_vertex("b" + std::to_string(i + 1));
  }
  std::vector<std::array<int, 5>> gadget(s.n_vars + 1);  // u, v, l-, l1, l2
  for (int x = 1; x <= s.n_vars; ++x) {
    const std::string vx = std::to_string(x);
    gadget[x] = {add_vertex("u" + vx), add_vertex("v" + vx),
                 add_vertex("ln_" + vx), add_vertex("l1_" + vx),
                 add_vertex("l2_" + vx)};
  }
  for (int i = 0; i < m; ++i) f.edges.emplace_back(a[i], b[i]);
  for (int i = 0; i + 1 < m; ++i) f.edges.emplace_back(b[i], b[i + 1]);
  for (int x = 1; x <= s.n_vars; ++x) {
    const auto [u, v, ln, l1, l2] = gadget[x];
    f.edges.emplace_back(u, ln);
    f.edges.emplace_back(v, ln);
    f.edges.emplace_back(u, l1);
    f.edges.emplace_back(v, l2);
    f.edges.emplace_back(ln, a[occ[x].neg_clause]);
    f.edges.emplace_back(l1, a[occ[x].pos_clause[0]]);
    f.edges.emplace_back(l2, a[occ[x].pos_clause[1]]);
  }
  for (int w = 0; w < f.n_vertices(); ++w) {
    int indeg = 0;
    for (auto& [p, q] : f.edges)
      if (q == w) ++indeg;
    f.theta[w] = indeg;
  }
  for (int i = 0; i < m; ++i) f.theta[a[i]] = 1;
  f.target = b[m - 1];
  return f;
}

/// Builds the resident-minimal instance in which (r_t, h_t) is finalizable
/// exactly when the digraph has no theta-firing containing t. Every vertex
/// becomes a resident; every non-root vertex becomes a hospital with quota
/// theta(v) whose list holds the in-neighbor residents (declaration order)
/// and then its own resident. Requires an acyclic graph whose target is a
/// non-root sink and whose non-roots all have positive thresholds.
inline std::pair<Instance, Match> firing_to_ftm_rm(const FiringInstance& f) {
  if (!f.is_acyclic()) throw std::invalid_argument("graph must be acyclic");
  {
    std::set<std::pair<int, int>> seen;
    for (auto& e : f.edges)
      if (!seen.insert(e).second)
        throw std::invalid_argument("parallel edges are not representable");
  }
  for (auto& [u, v] : f.edges)
    if (u == f.target)
      throw std::invalid_argument("target must be a sink");
  if (f.is_root(f.target))
    throw std::invalid_argument("target must have an in-edge");
  for (int v = 0; v < f.n_vertices(); ++v)
    if (!f.is_root(v) && f.theta[v] < 1)
      throw std::invalid_argument(
          "non-root vertex " + f.vertex_names[v] +
          " has threshold 0; quotas must be positive");

  Instance inst;
  for (int v = 0; v < f.n_vertices(); ++v) {
    inst.residents.push_back("r_" + f.vertex_names[v]);
    inst.resident_list.emplace_back();
  }
  std::vector<int> hospital_of(f.n_vertices(), -1);
  for (int v = 0; v < f.n_vertices(); ++v) {
    if (f.is_root(v)) continue;
    hospital_of[v] = inst.n_hospitals();
    inst.hospitals.push_back("h_" + f.vertex_names[v]);
    inst.quota.push_back(f.theta[v]);
    std::vector<int> in = f.in_neighbors(v);
    std::sort(in.begin(), in.end());
    in.erase(std::unique(in.begin(), in.end()), in.end());
    std::vector<int>& pi = inst.hospital_list.emplace_back();
    for (int u : in) pi.push_back(u);
    pi.push_back(v);
    inst.resident_list[v].push_back(hospital_of[v]);
  }
  const Match query{f.target, hospital_of[f.target]};
  inst.query = query;
  inst.check_valid();
  return {std::move(inst), query};
}

}  // namespace ftm
