#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ftm {

/// A resident-hospital pair, by index into the owning Instance.
struct Match {
  int resident = -1;
  int hospital = -1;
  friend constexpr auto operator<=>(const Match&, const Match&) = default;
};

using MatchSet = std::set<Match>;

inline std::set<int> residents_of(const MatchSet& m) {
  std::set<int> out;
  for (const Match& e : m) out.insert(e.resident);
  return out;
}

inline std::set<int> residents_at(const MatchSet& m, int hospital) {
  std::set<int> out;
  for (const Match& e : m)
    if (e.hospital == hospital) out.insert(e.resident);
  return out;
}

/// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Thrown when an enumeration would exceed its configured cap.
class LimitExceeded : public std::runtime_error {
 public:
  LimitExceeded(const std::string& msg, unsigned long long count)
      : std::runtime_error(msg + " (count " + std::to_string(count) + ")"),
        count_(count) {}
  unsigned long long count() const noexcept { return count_; }

 private:
  unsigned long long count_;
};

/// A hospitals/residents instance with truncated strict preference lists.
///
/// Lists hold indices into `residents`/`hospitals`; position 0 is the most
/// preferred entry. Lists may be empty or partial on either side.
struct Instance {
  std::vector<std::string> residents;           // declaration order
  std::vector<std::string> hospitals;           // declaration order
  std::vector<int> quota;                       // per hospital, >= 1
  std::vector<std::vector<int>> resident_list;  // per resident: hospitals
  std::vector<std::vector<int>> hospital_list;  // per hospital: residents
  std::optional<Match> query;                   // optional match under test

  int n_residents() const { return static_cast<int>(residents.size()); }
  int n_hospitals() const { return static_cast<int>(hospitals.size()); }

  int resident_index(std::string_view name) const {
    for (int i = 0; i < n_residents(); ++i)
      if (residents[i] == name) return i;
    return -1;
  }
  int hospital_index(std::string_view name) const {
    for (int i = 0; i < n_hospitals(); ++i)
      if (hospitals[i] == name) return i;
    return -1;
  }

  bool is_marriage() const {
    return std::all_of(quota.begin(), quota.end(),
                       [](int q) { return q == 1; });
  }
  bool is_hospital_complete() const {
    for (const auto& pi : hospital_list)
      if (static_cast<int>(pi.size()) != n_residents()) return false;
    return true;
  }
  bool is_resident_complete() const {
    for (const auto& lam : resident_list)
      if (static_cast<int>(lam.size()) != n_hospitals()) return false;
    return true;
  }
  bool is_complete() const {
    return is_hospital_complete() && is_resident_complete();
  }

  /// Rank of resident r in the list of h, or -1 when r is not listed.
  int hospital_rank(int h, int r) const {
    const auto& pi = hospital_list[h];
    for (int i = 0; i < static_cast<int>(pi.size()); ++i)
      if (pi[i] == r) return i;
    return -1;
  }
  /// Rank of hospital h in the list of r, or -1 when h is not listed.
  int resident_rank(int r, int h) const {
    const auto& lam = resident_list[r];
    for (int i = 0; i < static_cast<int>(lam.size()); ++i)
      if (lam[i] == h) return i;
    return -1;
  }

  std::string match_name(const Match& m) const {
    return "(" + residents[m.resident] + "," + hospitals[m.hospital] + ")";
  }

  bool contains(const Match& m) const {
    return m.resident >= 0 && m.resident < n_residents() && m.hospital >= 0 &&
           m.hospital < n_hospitals();
  }

  /// Throws std::invalid_argument when a structural invariant is broken.
  void check_valid() const {
    auto bad = [](const std::string& what) {
      throw std::invalid_argument("invalid instance: " + what);
    };
    if (quota.size() != hospitals.size() ||
        hospital_list.size() != hospitals.size() ||
        resident_list.size() != residents.size())
      bad("side sizes disagree");
    for (const std::string& t : residents)
      if (t.empty() || t == ":" ||
          t.find_first_of(" \t#") != std::string::npos)
        bad("bad resident token '" + t + "'");
    for (const std::string& t : hospitals)
      if (t.empty() || t == ":" ||
          t.find_first_of(" \t#") != std::string::npos)
        bad("bad hospital token '" + t + "'");
    for (int h = 0; h < n_hospitals(); ++h) {
      if (quota[h] < 1) bad("quota < 1 at " + hospitals[h]);
      std::set<int> seen;
      for (int r : hospital_list[h]) {
        if (r < 0 || r >= n_residents()) bad("list entry out of range");
        if (!seen.insert(r).second)
          bad("duplicate entry in list of " + hospitals[h]);
      }
    }
    for (int r = 0; r < n_residents(); ++r) {
      std::set<int> seen;
      for (int h : resident_list[r]) {
        if (h < 0 || h >= n_hospitals()) bad("list entry out of range");
        if (!seen.insert(h).second)
          bad("duplicate entry in list of " + residents[r]);
      }
    }
    if (query && !contains(*query)) bad("query out of range");
  }
};

namespace detail {

struct RawLine {
  int number = 0;
  std::vector<std::string> tokens;
};

inline std::vector<RawLine> tokenize_lines(std::istream& in) {
  std::vector<RawLine> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto pos = line.find('#'); pos != std::string::npos)
      line.erase(pos);
    std::istringstream ls(line);
    RawLine raw;
    raw.number = number;
    std::string tok;
    while (ls >> tok) raw.tokens.push_back(tok);
    if (!raw.tokens.empty()) out.push_back(std::move(raw));
  }
  return out;
}

}  // namespace detail

/// Parses the line-based instance format:
///
///   hospital <id> <quota> : <resident ids, most preferred first>
///   resident <id> : <hospital ids, most preferred first>
///   query <resident id> <hospital id>
///
/// '#' starts a comment. Lines may appear in any order; references are
/// resolved after all declarations have been read.
inline Instance parse_instance(std::istream& in) {
  Instance inst;
  const auto lines = detail::tokenize_lines(in);

  // Pass 1: declarations.
  for (const auto& ln : lines) {
    const auto& t = ln.tokens;
    if (t[0] == "hospital") {
      if (t.size() < 4 || t[3] != ":")
        throw ParseError(ln.number, "malformed hospital line");
      if (inst.hospital_index(t[1]) >= 0)
        throw ParseError(ln.number, "duplicate declaration of " + t[1]);
      int q = 0;
      try {
        size_t used = 0;
        q = std::stoi(t[2], &used);
        if (used != t[2].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError(ln.number, "malformed quota '" + t[2] + "'");
      }
      if (q < 1) throw ParseError(ln.number, "quota < 1 for " + t[1]);
      inst.hospitals.push_back(t[1]);
      inst.quota.push_back(q);
    } else if (t[0] == "resident") {
      if (t.size() < 3 || t[2] != ":")
        throw ParseError(ln.number, "malformed resident line");
      if (inst.resident_index(t[1]) >= 0)
        throw ParseError(ln.number, "duplicate declaration of " + t[1]);
      inst.residents.push_back(t[1]);
    } else if (t[0] == "query") {
      if (t.size() != 3) throw ParseError(ln.number, "malformed query line");
    } else {
      throw ParseError(ln.number, "unknown directive '" + t[0] + "'");
    }
  }
  inst.resident_list.resize(inst.residents.size());
  inst.hospital_list.resize(inst.hospitals.size());

  // Pass 2: references.
  bool have_query = false;
  for (const auto& ln : lines) {
    const auto& t = ln.tokens;
    if (t[0] == "hospital") {
      int h = inst.hospital_index(t[1]);
      for (size_t i = 4; i < t.size(); ++i) {
        int r = inst.resident_index(t[i]);
        if (r < 0)
          throw ParseError(ln.number, "unknown resident '" + t[i] + "'");
        if (std::find(inst.hospital_list[h].begin(),
                      inst.hospital_list[h].end(),
                      r) != inst.hospital_list[h].end())
          throw ParseError(ln.number,
                           "duplicate list entry '" + t[i] + "'");
        inst.hospital_list[h].push_back(r);
      }
    } else if (t[0] == "resident") {
      int r = inst.resident_index(t[1]);
      for (size_t i = 3; i < t.size(); ++i) {
        int h = inst.hospital_index(t[i]);
        if (h < 0)
          throw ParseError(ln.number, "unknown hospital '" + t[i] + "'");
        if (std::find(inst.resident_list[r].begin(),
                      inst.resident_list[r].end(),
                      h) != inst.resident_list[r].end())
          throw ParseError(ln.number,
                           "duplicate list entry '" + t[i] + "'");
        inst.resident_list[r].push_back(h);
      }
    } else if (t[0] == "query") {
      if (have_query)
        throw ParseError(ln.number, "more than one query line");
      have_query = true;
      int r = inst.resident_index(t[1]);
      if (r < 0) throw ParseError(ln.number, "unknown resident '" + t[1] + "'");
      int h = inst.hospital_index(t[2]);
      if (h < 0) throw ParseError(ln.number, "unknown hospital '" + t[2] + "'");
      inst.query = Match{r, h};
    }
  }
  return inst;
}

inline Instance parse_instance(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

/// Canonical writer for the instance format; inverse of parse_instance.
inline std::string format_instance(const Instance& inst) {
  std::ostringstream out;
  for (int h = 0; h < inst.n_hospitals(); ++h) {
    out << "hospital " << inst.hospitals[h] << ' ' << inst.quota[h] << " :";
    for (int r : inst.hospital_list[h]) out << ' ' << inst.residents[r];
    out << '\n';
  }
  for (int r = 0; r < inst.n_residents(); ++r) {
    out << "resident " << inst.residents[r] << " :";
    for (int h : inst.resident_list[r]) out << ' ' << inst.hospitals[h];
    out << '\n';
  }
  if (inst.query)
    out << "query " << inst.residents[inst.query->resident] << ' '
        << inst.hospitals[inst.query->hospital] << '\n';
  return out.str();
}

}  // namespace ftm
