#pragma once

#include "ftm/prescription.hpp"

namespace ftm {

namespace detail {

/// One linear expression being accumulated for LP text output.
struct LpExpr {
  std::string text;
  void add(int coeff, const std::string& var) {
    if (coeff == 0) return;
    if (text.empty()) {
      if (coeff == -1)
        text = "- " + var;
      else if (coeff == 1)
        text = var;
      else
        text = std::to_string(coeff) + " " + var;
      return;
    }
    text += coeff < 0 ? " - " : " + ";
    int mag = coeff < 0 ? -coeff : coeff;
    if (mag != 1) text += std::to_string(mag) + " ";
    text += var;
  }
  bool empty() const { return text.empty(); }
};

}  // namespace detail

/// Emits an integer program, in LP text format, whose feasible 0/1 points
/// are exactly the valid general-mode prescriptions (P, X) with the queried
/// match in the target set, and whose optimum is the minimum |P|.
///
/// Binary variables: p_<r>_<h> for unproposed pairs, x_<r>_<h> for
/// tentative matches, and z_<h>_<k> selecting which pending residents of h
/// are rejected by the hospital-list completion; k indexes subsets of
/// res_h(pend(I)) in binary-counter order over declaration order, so the z
/// family is exponential in |res_h(pend(I))| and capped by `pend_cap`.
inline std::string emit_ip(const Instance& inst, Match m, int pend_cap = 12) {
  ExecResult exec = run_da(inst);
  if (!is_resident_minimal(inst))
    throw std::invalid_argument("instance is not resident-minimal");
  if (!exec.tent.count(m))
    throw std::invalid_argument("queried match is not tentative");
  if (exec.pend.count(m))
    throw std::invalid_argument("queried match must not be pending");
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    auto pend_h = residents_at(exec.pend, h);
    if (static_cast<int>(pend_h.size()) > pend_cap)
      throw LimitExceeded("pending residents at " + inst.hospitals[h] +
                              " exceed the z-variable cap",
                          pend_h.size());
  }

  auto pvar = [&](const Match& e) {
    return "p_" + inst.residents[e.resident] + "_" +
           inst.hospitals[e.hospital];
  };
  auto xvar = [&](const Match& e) {
    return "x_" + inst.residents[e.resident] + "_" +
           inst.hospitals[e.hospital];
  };

  std::vector<Match> p_cands;
  for (int r = 0; r < inst.n_residents(); ++r)
    for (int h = 0; h < inst.n_hospitals(); ++h)
      if (!exec.prop.count(Match{r, h})) p_cands.push_back(Match{r, h});
  std::vector<Match> tent(exec.tent.begin(), exec.tent.end());

  std::ostringstream out;
  out << "\\ prescription model for target match "
      << inst.match_name(m) << "\n";
  out << "\\ p_r_h = 1 iff (r,h) joins P (a new proposal)\n";
  out << "\\ x_r_h = 1 iff the tentative (r,h) joins X (a rejection)\n";
  out << "\\ z_h_k = 1 iff the pending residents of h rejected by the\n";
  out << "\\   hospital-list completion form subset k; subsets are indexed\n";
  out << "\\   in binary-counter order over declaration order\n";
  out << "Minimize\n obj: ";
  detail::LpExpr obj;
  for (const Match& e : p_cands) obj.add(1, pvar(e));
  out << obj.text << "\n";

  out << "Subject To\n";
  int cn = 0;
  auto emit = [&](const detail::LpExpr& lhs, const char* op, long long rhs) {
    out << " c" << ++cn << ": " << (lhs.empty() ? "0" : lhs.text) << ' ' << op
        << ' ' << rhs << "\n";
  };

  {  // target: x for the match fixed to one, no proposal for its resident
    detail::LpExpr e;
    e.add(1, xvar(m));
    emit(e, "=", 1);
    detail::LpExpr ps;
    for (const Match& c : p_cands)
      if (c.resident == m.resident) ps.add(1, pvar(c));
    if (!ps.empty()) emit(ps, "=", 0);
  }

  // P2: at most one proposal per resident.
  for (int r = 0; r < inst.n_residents(); ++r) {
    detail::LpExpr e;
    for (const Match& c : p_cands)
      if (c.resident == r) e.add(1, pvar(c));
    if (!e.empty()) emit(e, "<=", 1);
  }

  // P4: a proposal by a tentatively matched resident forces its rejection.
  for (const Match& t : tent)
    for (const Match& c : p_cands)
      if (c.resident == t.resident) {
        detail::LpExpr e;
        e.add(1, pvar(c));
        e.add(-1, xvar(t));
        emit(e, "<=", 0);
      }

  // P5: survivors fill at most the quota, exactly when X touches h.
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::vector<Match> ph, th;
    for (const Match& c : p_cands)
      if (c.hospital == h) ph.push_back(c);
    for (const Match& t : tent)
      if (t.hospital == h) th.push_back(t);
    if (ph.empty() && th.empty()) continue;
    detail::LpExpr base;
    for (const Match& c : ph) base.add(1, pvar(c));
    for (const Match& t : th) base.add(-1, xvar(t));
    long long rhs = inst.quota[h] - static_cast<long long>(th.size());
    emit(base, "<=", rhs);
    for (const Match& t : th) {
      detail::LpExpr e = base;
      e.add(-inst.quota[h], xvar(t));
      emit(e, ">=", rhs - inst.quota[h]);
    }
  }

  // P6': survivors listed at h must precede every listed rejection, and a
  // listed rejection at h drags every pending match at h into X.
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    for (const Match& t : tent) {
      if (t.hospital != h || exec.pend.count(t)) continue;
      int tr = inst.hospital_rank(h, t.resident);
      for (const Match& c : p_cands) {
        if (c.hospital != h) continue;
        int cr = inst.hospital_rank(h, c.resident);
        if (cr < 0 || cr >= tr) {
          detail::LpExpr e;
          e.add(1, pvar(c));
          e.add(1, xvar(t));
          emit(e, "<=", 1);
        }
      }
      for (const Match& t2 : tent) {
        if (t2.hospital != h || t2 == t) continue;
        if (exec.pend.count(t2)) {
          detail::LpExpr e;  // pending at h joins X with t
          e.add(1, xvar(t));
          e.add(-1, xvar(t2));
          emit(e, "<=", 0);
          continue;
        }
        int or2 = inst.hospital_rank(h, t2.resident);
        if (or2 >= tr) {
          detail::LpExpr e;  // a survivor ranked below t blocks x_t
          e.add(1, xvar(t));
          e.add(-1, xvar(t2));
          emit(e, "<=", 0);
        }
      }
    }
  }

  // z-selection consistency: exactly one subset per hospital with pending
  // matches, agreeing with the x choices of its pending residents.
  std::vector<std::string> zvars;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    std::vector<int> pend_h;
    for (const Match& e : exec.pend)
      if (e.hospital == h) pend_h.push_back(e.resident);
    if (pend_h.empty()) continue;
    std::sort(pend_h.begin(), pend_h.end());
    const size_t subsets = size_t{1} << pend_h.size();
    std::vector<std::string> names(subsets);
    detail::LpExpr sum;
    for (size_t k = 0; k < subsets; ++k) {
      names[k] = "z_" + inst.hospitals[h] + "_" + std::to_string(k);
      zvars.push_back(names[k]);
      sum.add(1, names[k]);
    }
    emit(sum, "=", 1);
    for (size_t i = 0; i < pend_h.size(); ++i) {
      detail::LpExpr e;
      e.add(1, xvar(Match{pend_h[i], h}));
      for (size_t k = 0; k < subsets; ++k)
        if (k & (size_t{1} << i)) e.add(-1, names[k]);
      emit(e, "=", 0);
    }
  }

  out << "Binary\n";
  for (const Match& e : p_cands) out << ' ' << pvar(e) << "\n";
  for (const Match& t : tent) out << ' ' << xvar(t) << "\n";
  for (const std::string& z : zvars) out << ' ' << z << "\n";
  out << "End\n";
  return out.str();
}

}  // namespace ftm
