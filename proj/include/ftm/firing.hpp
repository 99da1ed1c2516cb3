#pragma once

#include "ftm/instance.hpp"

namespace ftm {

/// A digraph with a target vertex and per-vertex thresholds. A theta-firing
/// is a subgraph in which every incident vertex has in-degree at least
/// theta(v) and out-degree at most one; firings are represented by their
/// edge subsets (as indices into `edges`).
struct FiringInstance {
  std::vector<std::string> vertex_names;  // declaration order
  std::vector<int> theta;
  std::vector<std::pair<int, int>> edges;  // (u, v), declaration order
  int target = -1;

  int n_vertices() const { return static_cast<int>(vertex_names.size()); }
  int vertex_index(std::string_view name) const {
    for (int i = 0; i < n_vertices(); ++i)
      if (vertex_names[i] == name) return i;
    return -1;
  }
  std::vector<int> in_neighbors(int v) const {
    std::vector<int> out;
    for (auto& [a, b] : edges)
      if (b == v) out.push_back(a);
    return out;
  }
  bool is_root(int v) const { return in_neighbors(v).empty(); }
  bool is_acyclic() const {
    std::vector<int> indeg(n_vertices(), 0);
    for (auto& [a, b] : edges) indeg[b]++;
    std::vector<int> queue;
    for (int v = 0; v < n_vertices(); ++v)
      if (indeg[v] == 0) queue.push_back(v);
    int seen = 0;
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      ++seen;
      for (auto& [a, b] : edges)
        if (a == v && --indeg[b] == 0) queue.push_back(b);
    }
    return seen == n_vertices();
  }
};

/// Line format: 'vertex <id> theta <n>', 'edge <u> <v>', 'target <id>';
/// '#' starts a comment. Exactly one target line is required.
inline FiringInstance parse_firing(std::istream& in) {
  FiringInstance out;
  const auto lines = detail::tokenize_lines(in);
  for (const auto& ln : lines) {
    const auto& t = ln.tokens;
    if (t[0] == "vertex") {
      if (t.size() != 4 || t[2] != "theta")
        throw ParseError(ln.number, "malformed vertex line");
      if (out.vertex_index(t[1]) >= 0)
        throw ParseError(ln.number, "duplicate declaration of " + t[1]);
      int th = 0;
      try {
        size_t used = 0;
        th = std::stoi(t[3], &used);
        if (used != t[3].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError(ln.number, "malformed threshold '" + t[3] + "'");
      }
      if (th < 0) throw ParseError(ln.number, "negative threshold");
      out.vertex_names.push_back(t[1]);
      out.theta.push_back(th);
    } else if (t[0] != "edge" && t[0] != "target") {
      throw ParseError(ln.number, "unknown directive '" + t[0] + "'");
    }
  }
  bool have_target = false;
  for (const auto& ln : lines) {
    const auto& t = ln.tokens;
    if (t[0] == "edge") {
      if (t.size() != 3) throw ParseError(ln.number, "malformed edge line");
      int u = out.vertex_index(t[1]);
      if (u < 0) throw ParseError(ln.number, "unknown vertex '" + t[1] + "'");
      int v = out.vertex_index(t[2]);
      if (v < 0) throw ParseError(ln.number, "unknown vertex '" + t[2] + "'");
      out.edges.emplace_back(u, v);
    } else if (t[0] == "target") {
      if (t.size() != 2) throw ParseError(ln.number, "malformed target line");
      if (have_target) throw ParseError(ln.number, "more than one target");
      have_target = true;
      out.target = out.vertex_index(t[1]);
      if (out.target < 0)
        throw ParseError(ln.number, "unknown vertex '" + t[1] + "'");
    }
  }
  if (!have_target) throw ParseError(0, "missing target line");
  return out;
}

inline FiringInstance parse_firing(const std::string& text) {
  std::istringstream in(text);
  return parse_firing(in);
}

inline std::string format_firing(const FiringInstance& f) {
  std::ostringstream out;
  for (int v = 0; v < f.n_vertices(); ++v)
    out << "vertex " << f.vertex_names[v] << " theta " << f.theta[v] << "\n";
  for (auto& [u, v] : f.edges)
    out << "edge " << f.vertex_names[u] << ' ' << f.vertex_names[v] << "\n";
  out << "target " << f.vertex_names[f.target] << "\n";
  return out.str();
}

/// True when, in the subgraph given by the edge subset, every incident
/// vertex has in-degree >= theta(v) and out-degree <= 1.
inline bool check_firing(const FiringInstance& f,
                         const std::vector<int>& edge_subset) {
  std::vector<int> indeg(f.n_vertices(), 0), outdeg(f.n_vertices(), 0);
  std::vector<char> incident(f.n_vertices(), 0);
  for (int ei : edge_subset) {
    if (ei < 0 || ei >= static_cast<int>(f.edges.size()))
      throw std::invalid_argument("edge index out of range");
    auto [u, v] = f.edges[ei];
    ++outdeg[u];
    ++indeg[v];
    incident[u] = incident[v] = 1;
  }
  for (int v = 0; v < f.n_vertices(); ++v)
    if (incident[v] && (indeg[v] < f.theta[v] || outdeg[v] > 1)) return false;
  return true;
}

/// Enumerates edge subsets in binary-counter order (bit i = edge i) and
/// returns the first theta-firing whose vertex set contains must_contain.
/// A vertex with theta zero is by itself a valid firing, returned as the
/// empty edge set. Refuses graphs with more than `edge_cap` edges.
inline std::optional<std::vector<int>> find_firing_bruteforce(
    const FiringInstance& f, int must_contain, int edge_cap = 20) {
  if (must_contain < 0 || must_contain >= f.n_vertices())
    throw std::invalid_argument("vertex out of range");
  if (f.theta[must_contain] == 0) return std::vector<int>{};
  const int ne = static_cast<int>(f.edges.size());
  if (ne > edge_cap)
    throw LimitExceeded("edge subsets exceed the enumeration cap",
                        ne < 64 ? (1ull << ne) : ~0ull);
  std::vector<int> subset;
  for (unsigned long long mask = 1; mask < (1ull << ne); ++mask) {
    subset.clear();
    bool incident = false;
    for (int i = 0; i < ne; ++i)
      if (mask & (1ull << i)) {
        subset.push_back(i);
        if (f.edges[i].first == must_contain ||
            f.edges[i].second == must_contain)
          incident = true;
      }
    if (incident && check_firing(f, subset)) return subset;
  }
  return std::nullopt;
}

/// Demand-driven exact search for a theta-firing containing must_contain;
/// handles graphs far beyond subset-enumeration size. Explores firings in
/// which every member vertex has in-degree exactly theta(v) (such a firing
/// exists whenever any does: excess in-edges can be dropped).
inline std::optional<std::vector<int>> find_firing_search(
    const FiringInstance& f, int must_contain) {
  if (must_contain < 0 || must_contain >= f.n_vertices())
    throw std::invalid_argument("vertex out of range");
  if (f.theta[must_contain] == 0) return std::vector<int>{};

  const int n = f.n_vertices();
  std::vector<std::vector<int>> in_adj(n);
  for (auto& [u, v] : f.edges) in_adj[v].push_back(u);
  for (auto& adj : in_adj) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }

  std::vector<char> in_firing(n, 0);
  std::vector<int> out_to(n, -1);
  std::vector<int> demands{must_contain};
  in_firing[must_contain] = 1;

  std::function<bool()> solve = [&]() -> bool {
    if (demands.empty()) return true;
    int v = demands.back();
    demands.pop_back();
    std::vector<int> avail;
    for (int u : in_adj[v])
      if (out_to[u] == -1) avail.push_back(u);
    const int need = f.theta[v];
    if (static_cast<int>(avail.size()) < need) {
      demands.push_back(v);
      return false;
    }
    std::vector<int> pick;
    std::function<bool(size_t, int)> combos = [&](size_t from,
                                                  int left) -> bool {
      if (left == 0) {
        std::vector<int> added;
        for (int i : pick) {
          int u = avail[static_cast<size_t>(i)];
          out_to[u] = v;
          if (!in_firing[u]) {
            in_firing[u] = 1;
            demands.push_back(u);
            added.push_back(u);
          }
        }
        if (solve()) return true;
        for (int u : added) {
          in_firing[u] = 0;
          demands.pop_back();
        }
        for (int i : pick) out_to[avail[static_cast<size_t>(i)]] = -1;
        return false;
      }
      for (size_t i = from; i + left <= avail.size(); ++i) {
        pick.push_back(static_cast<int>(i));
        bool hit = combos(i + 1, left - 1);
        pick.pop_back();
        if (hit) return true;
      }
      return false;
    };
    if (combos(0, need)) return true;
    demands.push_back(v);
    return false;
  };

  if (!solve()) return std::nullopt;
  std::vector<int> subset;
  for (int ei = 0; ei < static_cast<int>(f.edges.size()); ++ei) {
    auto [u, v] = f.edges[ei];
    if (out_to[u] == v) {
      subset.push_back(ei);
      out_to[u] = -1;  // count parallel edges once
    }
  }
  return subset;
}

}  // namespace ftm
