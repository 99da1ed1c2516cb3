#pragma once

#include <deque>

#include "ftm/engine.hpp"

namespace ftm {

/// Bipartite digraph on tentative matches (T vertices) and unproposed pairs
/// (P vertices) of a resident-minimal marriage instance. An edge T->P links
/// a match to the unproposed pairs of the same resident; an edge P->T links
/// an unproposed pair (r',h) to the tentative match (r,h) when both
/// residents are listed at h and r' precedes r.
struct DigraphGI {
  std::vector<Match> t_vertices;  // tent(I), ascending
  std::vector<Match> p_vertices;  // (R x H) \ prop(I), ascending
  std::vector<std::pair<int, int>> edges;  // vertex ids: [t...][p...]
  std::vector<int> roots;                  // ids with no incoming edge

  int n_vertices() const {
    return static_cast<int>(t_vertices.size() + p_vertices.size());
  }
  bool is_t(int id) const { return id < static_cast<int>(t_vertices.size()); }
  Match vertex(int id) const {
    return is_t(id) ? t_vertices[id]
                    : p_vertices[id - t_vertices.size()];
  }
  int id_of(const Match& m) const {
    auto it = std::lower_bound(t_vertices.begin(), t_vertices.end(), m);
    if (it != t_vertices.end() && *it == m)
      return static_cast<int>(it - t_vertices.begin());
    auto ip = std::lower_bound(p_vertices.begin(), p_vertices.end(), m);
    if (ip != p_vertices.end() && *ip == m)
      return static_cast<int>(t_vertices.size() + (ip - p_vertices.begin()));
    return -1;
  }
};

namespace detail {

inline void require_marriage_rm(const Instance& inst) {
  if (!inst.is_marriage())
    throw std::invalid_argument("all quotas must be 1");
  if (!is_resident_minimal(inst))
    throw std::invalid_argument("instance is not resident-minimal");
}

}  // namespace detail

inline DigraphGI build_gi(const Instance& inst, const ExecResult& exec) {
  detail::require_marriage_rm(inst);
  DigraphGI g;
  g.t_vertices.assign(exec.tent.begin(), exec.tent.end());
  for (int r = 0; r < inst.n_residents(); ++r)
    for (int h = 0; h < inst.n_hospitals(); ++h)
      if (!exec.prop.count(Match{r, h})) g.p_vertices.push_back(Match{r, h});

  const int nt = static_cast<int>(g.t_vertices.size());
  const int np = static_cast<int>(g.p_vertices.size());
  for (int ti = 0; ti < nt; ++ti)
    for (int pi = 0; pi < np; ++pi)
      if (g.t_vertices[ti].resident == g.p_vertices[pi].resident)
        g.edges.emplace_back(ti, nt + pi);
  for (int pi = 0; pi < np; ++pi) {
    const Match& from = g.p_vertices[pi];
    int from_rank = inst.hospital_rank(from.hospital, from.resident);
    if (from_rank < 0) continue;
    for (int ti = 0; ti < nt; ++ti) {
      const Match& to = g.t_vertices[ti];
      if (to.hospital != from.hospital) continue;
      int to_rank = inst.hospital_rank(to.hospital, to.resident);
      if (to_rank >= 0 && from_rank < to_rank)
        g.edges.emplace_back(nt + pi, ti);
    }
  }
  std::vector<char> has_incoming(g.n_vertices(), 0);
  for (auto& [u, v] : g.edges) has_incoming[v] = 1;
  for (int v = 0; v < g.n_vertices(); ++v)
    if (!has_incoming[v]) g.roots.push_back(v);
  return g;
}

inline DigraphGI build_gi(const Instance& inst) {
  return build_gi(inst, run_da(inst));
}

/// Which vertices a rejection chain may start from. A chain can begin at an
/// unproposed pair of a resident unmatched in tent (a P root), or - under
/// the broad policy - at a pending tentative match, whose rejection relies
/// on completing the hospital list below the holder. Tentative matches with
/// no incoming edge but a listed resident can never start a chain (nothing
/// can oust a proposer that tops the proposers on the list), so they are
/// excluded under both policies.
enum class RootPolicy { paper, p_only };

struct RmMarriageAnswer {
  bool finalizable = false;
  std::optional<std::vector<Match>> witness_path;  // root ... m when negative
};

inline RmMarriageAnswer ftm_rm_marriage(const Instance& inst,
                                        const ExecResult& exec, Match m,
                                        RootPolicy policy) {
  detail::require_marriage_rm(inst);
  if (!exec.tent.count(m))
    throw std::invalid_argument("queried match is not tentative");
  DigraphGI g = build_gi(inst, exec);

  std::vector<std::vector<int>> adj(g.n_vertices());
  for (auto& [u, v] : g.edges) adj[u].push_back(v);

  std::vector<int> parent(g.n_vertices(), -2);  // -2 unvisited, -1 start
  std::deque<int> queue;
  for (int v : g.roots) {
    bool start = false;
    if (g.is_t(v)) {
      if (policy == RootPolicy::paper && exec.pend.count(g.vertex(v)))
        start = true;
    } else {
      start = true;  // P roots: resident unmatched in tent
    }
    if (start) {
      parent[v] = -1;
      queue.push_back(v);
    }
  }
  const int goal = g.id_of(m);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (v == goal) break;
    for (int w : adj[v])
      if (parent[w] == -2) {
        parent[w] = v;
        queue.push_back(w);
      }
  }

  RmMarriageAnswer out;
  if (parent[goal] == -2) {
    out.finalizable = true;
    return out;
  }
  std::vector<Match> path;
  for (int v = goal; v != -1; v = parent[v]) path.push_back(g.vertex(v));
  std::reverse(path.begin(), path.end());
  out.finalizable = false;
  out.witness_path = std::move(path);
  return out;
}

inline RmMarriageAnswer ftm_rm_marriage(const Instance& inst, Match m,
                                        RootPolicy policy = RootPolicy::paper) {
  return ftm_rm_marriage(inst, run_da(inst), m, policy);
}

/// Materializes the extension encoded by a witness path: each unproposed
/// (r,h) on the path appends h to the list of r; a pending start match gets
/// its hospital list completed with the pending resident ranked last. On a
/// path that starts at a P root, running the engine on the result rejects
/// the path's final match.
inline Instance gi_path_extension(const Instance& inst, const ExecResult& exec,
                                  const std::vector<Match>& path) {
  Instance out = inst;
  if (!path.empty() && exec.pend.count(path.front())) {
    const Match start = path.front();
    for (int r = 0; r < inst.n_residents(); ++r)
      if (r != start.resident &&
          inst.hospital_rank(start.hospital, r) < 0)
        out.hospital_list[start.hospital].push_back(r);
    out.hospital_list[start.hospital].push_back(start.resident);
  }
  for (const Match& v : path)
    if (!exec.prop.count(v)) out.resident_list[v.resident].push_back(v.hospital);
  return out;
}

}  // namespace ftm
