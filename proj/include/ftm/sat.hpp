#pragma once

#include <cstdlib>

#include "ftm/instance.hpp"

namespace ftm {

/// A CNF clause set over variables 1..n_vars; literals are signed indices.
struct ClauseSet {
  int n_vars = 0;
  std::vector<std::vector<int>> clauses;

  void check_valid() const {
    for (const auto& clause : clauses) {
      if (clause.empty()) throw std::invalid_argument("empty clause");
      std::set<int> seen;
      for (int lit : clause) {
        int v = std::abs(lit);
        if (lit == 0 || v > n_vars)
          throw std::invalid_argument("literal out of range");
        if (!seen.insert(lit).second)
          throw std::invalid_argument("repeated literal within a clause");
      }
    }
  }
};

/// DIMACS CNF reader: 'c' comment lines, a 'p cnf <vars> <clauses>' header,
/// then 0-terminated clauses (which may span lines).
inline ClauseSet parse_dimacs(std::istream& in) {
  ClauseSet out;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int declared_clauses = -1;
  std::vector<int> current;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (!have_header) {
      std::string p, cnf;
      if (!(ls >> p >> cnf >> out.n_vars >> declared_clauses) || p != "p" ||
          cnf != "cnf" || out.n_vars < 0 || declared_clauses < 0)
        throw ParseError(lineno, "expected 'p cnf <vars> <clauses>' header");
      have_header = true;
      continue;
    }
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        if (current.empty()) throw ParseError(lineno, "empty clause");
        std::set<int> seen(current.begin(), current.end());
        if (seen.size() != current.size())
          throw ParseError(lineno, "repeated literal within a clause");
        out.clauses.push_back(current);
        current.clear();
      } else {
        if (std::abs(lit) > out.n_vars)
          throw ParseError(lineno, "literal out of range");
        current.push_back(lit);
      }
    }
    if (ls.bad() || (!ls.eof() && ls.fail()))
      throw ParseError(lineno, "malformed clause line");
  }
  if (!have_header) throw ParseError(lineno, "missing DIMACS header");
  if (!current.empty())
    throw ParseError(lineno, "unterminated clause at end of input");
  if (declared_clauses != static_cast<int>(out.clauses.size()))
    throw ParseError(lineno, "clause count disagrees with header");
  return out;
}

inline ClauseSet parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

inline std::string format_dimacs(const ClauseSet& s) {
  std::ostringstream out;
  out << "p cnf " << s.n_vars << ' ' << s.clauses.size() << "\n";
  for (const auto& clause : s.clauses) {
    for (int lit : clause) out << lit << ' ';
    out << "0\n";
  }
  return out.str();
}

inline bool assignment_satisfies(const ClauseSet& s,
                                 const std::vector<bool>& value) {
  for (const auto& clause : s.clauses) {
    bool sat = false;
    for (int lit : clause) {
      int v = std::abs(lit);
      if (value[v] == (lit > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

/// Truth-table satisfiability check; refuses more than `var_cap` variables.
inline std::optional<std::vector<bool>> truth_table_model(
    const ClauseSet& s, int var_cap = 24) {
  if (s.n_vars > var_cap)
    throw LimitExceeded("too many variables for a truth table", s.n_vars);
  std::vector<bool> value(s.n_vars + 1, false);
  const unsigned long long total = 1ull << s.n_vars;
  for (unsigned long long mask = 0; mask < total; ++mask) {
    for (int v = 1; v <= s.n_vars; ++v)
      value[v] = (mask >> (v - 1)) & 1;
    if (assignment_satisfies(s, value)) return value;
  }
  return std::nullopt;
}

inline bool truth_table_satisfiable(const ClauseSet& s, int var_cap = 24) {
  return truth_table_model(s, var_cap).has_value();
}

/// True when every variable occurs exactly twice positively and once
/// negatively.
inline bool is_normalized(const ClauseSet& s) {
  std::vector<int> pos(s.n_vars + 1, 0), neg(s.n_vars + 1, 0);
  for (const auto& clause : s.clauses)
    for (int lit : clause)
      ++(lit > 0 ? pos[lit] : neg[-lit]);
  for (int v = 1; v <= s.n_vars; ++v)
    if (pos[v] != 2 || neg[v] != 1) return false;
  return true;
}

/// Converts a clause set into an equisatisfiable one in which every
/// variable occurs exactly twice positively and once negatively:
/// tautological clauses are dropped, single-occurrence variables are fixed
/// (removing their satisfied clause), a variable with k other occurrences
/// is split into x_1..x_k chained by clauses (!x_i v x_{i+1}) with indices
/// wrapping, and variables whose pattern comes out inverted are flipped.
/// Variables already matching the pattern are left untouched, so the
/// operation is idempotent.
inline ClauseSet normalize_sat(const ClauseSet& input) {
  input.check_valid();
  std::vector<std::vector<int>> clauses;
  for (const auto& clause : input.clauses) {
    std::set<int> lits(clause.begin(), clause.end());
    bool tautology = false;
    for (int lit : clause)
      if (lits.count(-lit)) tautology = true;
    if (!tautology) clauses.push_back(clause);
  }
  int next_var = input.n_vars + 1;

  // Fix variables with a single occurrence: the occurrence can be made
  // true, satisfying and removing its clause.
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<int> occurrences(next_var, 0);
    for (const auto& clause : clauses)
      for (int lit : clause) ++occurrences[std::abs(lit)];
    for (size_t ci = 0; ci < clauses.size() && !changed; ++ci)
      for (int lit : clauses[ci])
        if (occurrences[std::abs(lit)] == 1) {
          clauses.erase(clauses.begin() + static_cast<long>(ci));
          changed = true;
          break;
        }
  }

  // Split or flip the remaining variables.
  auto flip_var = [&](int v) {
    for (auto& clause : clauses)
      for (int& lit : clause)
        if (std::abs(lit) == v) lit = -lit;
  };
  const int original_vars = input.n_vars;
  for (int v = 1; v <= original_vars; ++v) {
    struct Slot {
      size_t clause;
      size_t index;
      bool positive;
    };
    std::vector<Slot> slots;
    for (size_t ci = 0; ci < clauses.size(); ++ci)
      for (size_t li = 0; li < clauses[ci].size(); ++li)
        if (std::abs(clauses[ci][li]) == v)
          slots.push_back(Slot{ci, li, clauses[ci][li] > 0});
    if (slots.empty()) continue;
    int pos = 0;
    for (const Slot& s : slots) pos += s.positive ? 1 : 0;
    int neg = static_cast<int>(slots.size()) - pos;
    if (pos == 2 && neg == 1) continue;
    if (pos == 1 && neg == 2) {
      flip_var(v);
      continue;
    }
    const int k = static_cast<int>(slots.size());
    std::vector<int> fresh(k);
    for (int i = 0; i < k; ++i) fresh[i] = next_var++;
    for (int i = 0; i < k; ++i)
      clauses[slots[i].clause][slots[i].index] =
          slots[i].positive ? fresh[i] : -fresh[i];
    for (int i = 0; i < k; ++i)
      clauses.push_back({-fresh[i], fresh[(i + 1) % k]});
    for (int i = 0; i < k; ++i)
      if (!slots[i].positive) flip_var(fresh[i]);
  }

  // Renumber compactly.
  std::vector<int> remap(next_var, 0);
  int used = 0;
  for (const auto& clause : clauses)
    for (int lit : clause)
      if (!remap[std::abs(lit)]) remap[std::abs(lit)] = ++used;
  ClauseSet out;
  out.n_vars = used;
  for (const auto& clause : clauses) {
    std::vector<int> mapped;
    for (int lit : clause)
      mapped.push_back(lit > 0 ? remap[lit] : -remap[-lit]);
    out.clauses.push_back(std::move(mapped));
  }
  return out;
}

}  // namespace ftm
