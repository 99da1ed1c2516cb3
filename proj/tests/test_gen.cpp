#include <catch2/catch_amalgamated.hpp>

#include "ftm/exact.hpp"
#include "ftm/reductions.hpp"
#include "helpers.hpp"

using namespace ftm;
using ftmtest::match_of;

namespace {

/// Random small clause set over at most `max_vars` variables.
ClauseSet random_clause_set(Rng& rng, int max_vars, int max_clauses) {
  ClauseSet s;
  s.n_vars = rng.range(1, max_vars);
  int m = rng.range(1, max_clauses);
  for (int i = 0; i < m; ++i) {
    std::vector<int> vars(s.n_vars);
    for (int v = 0; v < s.n_vars; ++v) vars[v] = v + 1;
    rng.shuffle(vars);
    int len = rng.range(1, std::min(3, s.n_vars));
    std::vector<int> clause;
    for (int k = 0; k < len; ++k)
      clause.push_back(rng.below(2) ? vars[k] : -vars[k]);
    s.clauses.push_back(std::move(clause));
  }
  return s;
}

const ClauseSet kSatNormalized{2, {{1, -2}, {1, 2}, {-1, 2}}};
const ClauseSet kUnsatNormalized{1, {{1}, {1}, {-1}}};

/// Truth assignment encoded by the activated occurrence residents of a
/// completion that rejects (r1, h0).
std::vector<bool> decode_assignment(const ClauseSet& s, const Instance& gadget,
                                    const Instance& completion) {
  ExecResult exec = run_da(completion);
  std::vector<bool> value(s.n_vars + 1, false);
  for (int x = 1; x <= s.n_vars; ++x) {
    const std::string vx = "x" + std::to_string(x);
    auto activated = [&](const std::string& carrier) {
      int r = gadget.resident_index(carrier);
      int last = gadget.resident_list[r].back();
      return exec.prop.count(Match{r, last}) != 0;
    };
    bool pos = activated(vx + "_p1") || activated(vx + "_p2");
    bool neg = activated(vx + "_p0");
    CHECK_FALSE((pos && neg));  // activation of p0 excludes p1 and p2
    value[x] = pos;
  }
  return value;
}

}  // namespace

TEST_CASE("dimacs round trip and errors") {
  ClauseSet s = parse_dimacs("c comment\np cnf 3 2\n1 -2 0\n2 3 0\n");
  CHECK(s.n_vars == 3);
  REQUIRE(s.clauses.size() == 2);
  CHECK(s.clauses[0] == std::vector<int>{1, -2});
  ClauseSet again = parse_dimacs(format_dimacs(s));
  CHECK(again.clauses == s.clauses);
  CHECK_THROWS_AS(parse_dimacs("p cnf 1 1\n0\n"), ParseError);     // empty
  CHECK_THROWS_AS(parse_dimacs("p cnf 1 1\n2 0\n"), ParseError);   // range
  CHECK_THROWS_AS(parse_dimacs("p cnf 1 1\n1 1 0\n"), ParseError); // repeat
  CHECK_THROWS_AS(parse_dimacs("1 0\n"), ParseError);              // header
}

TEST_CASE("truth table") {
  CHECK(truth_table_satisfiable(kSatNormalized));
  CHECK_FALSE(truth_table_satisfiable(kUnsatNormalized));
  CHECK(truth_table_satisfiable(ClauseSet{0, {}}));
  ClauseSet big;
  big.n_vars = 30;
  CHECK_THROWS_AS(truth_table_satisfiable(big), LimitExceeded);
}

TEST_CASE("normalize_sat") {
  SECTION("already normalized input is untouched") {
    ClauseSet out = normalize_sat(kSatNormalized);
    CHECK(out.clauses == kSatNormalized.clauses);
    CHECK(is_normalized(out));
  }
  SECTION("single clause of single-occurrence variables dissolves") {
    ClauseSet out = normalize_sat(ClauseSet{2, {{1, 2}}});
    CHECK(out.clauses.empty());
    CHECK(truth_table_satisfiable(out));
  }
  SECTION("plain contradiction stays unsatisfiable") {
    ClauseSet out = normalize_sat(ClauseSet{1, {{1}, {-1}}});
    CHECK(is_normalized(out));
    CHECK_FALSE(truth_table_satisfiable(out));
  }
  SECTION("satisfiability preserved on random sets") {
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
      ClauseSet s = random_clause_set(rng, 4, 5);
      ClauseSet n = normalize_sat(s);
      CHECK(is_normalized(n));
      REQUIRE(n.n_vars <= 16);
      CHECK(truth_table_satisfiable(s) == truth_table_satisfiable(n));
      ClauseSet again = normalize_sat(n);
      CHECK(again.clauses == n.clauses);  // idempotent
    }
  }
}

TEST_CASE("sat_to_ftm: tentative matches of the gadget") {
  auto [inst, m] = sat_to_ftm(kSatNormalized);
  REQUIRE(inst.is_marriage());
  ExecResult exec = run_da(inst);
  MatchSet expected;
  expected.insert(match_of(inst, "r1", "h0"));
  expected.insert(match_of(inst, "r0", "c1"));
  for (int x = 1; x <= kSatNormalized.n_vars; ++x) {
    const std::string vx = "x" + std::to_string(x);
    expected.insert(match_of(inst, (vx + "_p0").c_str(), (vx + "_hn1").c_str()));
    expected.insert(match_of(inst, (vx + "_p1").c_str(), (vx + "_hp1").c_str()));
    expected.insert(match_of(inst, (vx + "_p2").c_str(), (vx + "_hp2").c_str()));
  }
  CHECK(exec.tent == expected);
  CHECK(m == match_of(inst, "r1", "h0"));
  CHECK(inst.query == m);
  CHECK_THROWS_AS(sat_to_ftm(ClauseSet{1, {{1}, {1}}}),
                  std::invalid_argument);  // not normalized
  CHECK_THROWS_AS(sat_to_ftm(ClauseSet{0, {}}), std::invalid_argument);
}

TEST_CASE("sat_to_ftm: finalizability mirrors satisfiability") {
  SECTION("satisfiable: not finalizable, assignment decodes") {
    auto [inst, m] = sat_to_ftm(kSatNormalized);
    FtmAnswer ans = ftm_backtrack(inst, m, 2'000'000);
    REQUIRE(ans.outcome == FtmOutcome::not_finalizable);
    std::vector<bool> value =
        decode_assignment(kSatNormalized, inst, *ans.counterexample);
    CHECK(assignment_satisfies(kSatNormalized, value));
  }
  SECTION("unsatisfiable: finalizable") {
    auto [inst, m] = sat_to_ftm(kUnsatNormalized);
    FtmAnswer ans = ftm_backtrack(inst, m, 2'000'000);
    CHECK(ans.outcome == FtmOutcome::finalizable);
  }
}

TEST_CASE("sat_to_firing: shape and counts") {
  const int n = kSatNormalized.n_vars;
  const int m = static_cast<int>(kSatNormalized.clauses.size());
  FiringInstance f = sat_to_firing(kSatNormalized);
  CHECK(f.n_vertices() == 2 * m + 5 * n);
  CHECK(static_cast<int>(f.edges.size()) == m + (m - 1) + 7 * n);
  for (int i = 1; i <= m; ++i)
    CHECK(f.theta[f.vertex_index("a" + std::to_string(i))] == 1);
  CHECK(f.target == f.vertex_index("b" + std::to_string(m)));
  for (int v = 0; v < f.n_vertices(); ++v) CHECK(f.theta[v] <= 2);
  CHECK(f.is_acyclic());
}

TEST_CASE("check_firing") {
  FiringInstance f = parse_firing(
      "vertex a theta 0\nvertex b theta 1\nvertex c theta 1\n"
      "edge a b\nedge b c\nedge a c\ntarget c\n");
  CHECK(check_firing(f, {}));                // vacuous
  CHECK(check_firing(f, {0, 1}));            // a->b->c chain
  CHECK_FALSE(check_firing(f, {0, 2}));      // a has out-degree 2
  CHECK_FALSE(check_firing(f, {1}));         // b in-degree 0 < 1
}

TEST_CASE("find_firing_bruteforce") {
  SECTION("single edge") {
    FiringInstance f = parse_firing(
        "vertex u theta 0\nvertex v theta 1\nedge u v\ntarget v\n");
    auto firing = find_firing_bruteforce(f, f.target);
    REQUIRE(firing.has_value());
    CHECK(*firing == std::vector<int>{0});
  }
  SECTION("an isolated threshold-zero vertex is a firing by itself") {
    FiringInstance f = parse_firing("vertex v theta 0\ntarget v\n");
    auto firing = find_firing_bruteforce(f, f.target);
    REQUIRE(firing.has_value());
    CHECK(firing->empty());
  }
  SECTION("edge cap") {
    FiringInstance f = sat_to_firing(kSatNormalized);
    CHECK_THROWS_AS(find_firing_bruteforce(f, f.target, 10), LimitExceeded);
  }
}

TEST_CASE("find_firing_search agrees with brute force") {
  Rng rng(2024);
  int compared = 0;
  for (int i = 0; i < 250; ++i) {
    FiringInstance f;
    int n = rng.range(2, 6);
    for (int v = 0; v < n; ++v) {
      f.vertex_names.push_back("v" + std::to_string(v));
      f.theta.push_back(0);
    }
    int ne = rng.range(1, 8);
    for (int e = 0; e < ne; ++e)
      f.edges.emplace_back(static_cast<int>(rng.below(n)),
                           static_cast<int>(rng.below(n)));
    for (int v = 0; v < n; ++v) f.theta[v] = static_cast<int>(rng.below(3));
    f.target = static_cast<int>(rng.below(n));
    auto brute = find_firing_bruteforce(f, f.target);
    auto smart = find_firing_search(f, f.target);
    CHECK(brute.has_value() == smart.has_value());
    if (smart) {
      CHECK(check_firing(f, *smart));
      bool touches = f.theta[f.target] == 0;
      for (int ei : *smart)
        if (f.edges[ei].first == f.target || f.edges[ei].second == f.target)
          touches = true;
      CHECK(touches);
    }
    ++compared;
  }
  REQUIRE(compared == 250);
}

TEST_CASE("firing_to_ftm_rm: structure") {
  FiringInstance f = sat_to_firing(kSatNormalized);
  auto [inst, m] = firing_to_ftm_rm(f);
  CHECK(is_resident_minimal(inst));
  int max_quota = *std::max_element(inst.quota.begin(), inst.quota.end());
  int max_theta = *std::max_element(f.theta.begin(), f.theta.end());
  CHECK(max_quota == max_theta);
  ExecResult exec = run_da(inst);
  // tentative matches are exactly (r_v, h_v) for non-root v
  int non_roots = 0;
  for (int v = 0; v < f.n_vertices(); ++v)
    if (!f.is_root(v)) ++non_roots;
  CHECK(static_cast<int>(exec.tent.size()) == non_roots);
  for (const Match& t : exec.tent)
    CHECK("h_" + inst.residents[t.resident].substr(2) ==
          inst.hospitals[t.hospital]);
  CHECK(exec.pend.empty());
}

TEST_CASE("firing_to_ftm_rm: small equivalences") {
  SECTION("single edge: rejectable through the root") {
    FiringInstance f = parse_firing(
        "vertex u theta 0\nvertex v theta 1\nedge u v\ntarget v\n");
    auto [inst, m] = firing_to_ftm_rm(f);
    FtmAnswer ans = ftm_bruteforce(inst, m, 100000);
    REQUIRE(ans.outcome == FtmOutcome::not_finalizable);
    // the counterexample appends h_v to the root resident's list
    int ru = ans.counterexample->resident_index("r_u");
    REQUIRE(ru >= 0);
    CHECK(ans.counterexample->resident_list[ru][0] ==
          ans.counterexample->hospital_index("h_v"));
  }
  SECTION("threshold two with an unfireable in-neighbor: finalizable") {
    FiringInstance f = parse_firing(
        "vertex z theta 0\nvertex u theta 0\nvertex w theta 2\n"
        "vertex v theta 2\n"
        "edge z w\nedge u v\nedge w v\ntarget v\n");
    REQUIRE_FALSE(find_firing_search(f, f.target).has_value());
    auto [inst, m] = firing_to_ftm_rm(f);
    CHECK(ftm_bruteforce(inst, m, 1000000).finalizable());
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(
        firing_to_ftm_rm(parse_firing(
            "vertex a theta 1\nvertex b theta 1\nedge a b\nedge b a\n"
            "target b\n")),
        std::invalid_argument);  // cyclic
    CHECK_THROWS_AS(
        firing_to_ftm_rm(parse_firing(
            "vertex a theta 0\nvertex b theta 1\nedge a b\ntarget a\n")),
        std::invalid_argument);  // target not a sink / a root
    CHECK_THROWS_AS(
        firing_to_ftm_rm(parse_firing(
            "vertex a theta 0\nvertex b theta 0\nedge a b\ntarget b\n")),
        std::invalid_argument);  // non-root with threshold 0
  }
}

TEST_CASE("firing instances admit prescriptions exactly when fireable") {
  SECTION("fireable single edge: certificate targets the query match") {
    FiringInstance f = parse_firing(
        "vertex u theta 0\nvertex v theta 1\nedge u v\ntarget v\n");
    auto [inst, m] = firing_to_ftm_rm(f);
    auto p = find_prescription(inst, m);
    REQUIRE(find_firing_bruteforce(f, f.target).has_value());
    REQUIRE(p.has_value());
    CHECK(target_set(*p).count(m));
    CHECK(p->proposals ==
          ftmtest::matches(inst, {{"r_u", "h_v"}}));
  }
  SECTION("unfireable graph: no certificate") {
    FiringInstance f = parse_firing(
        "vertex z theta 0\nvertex u theta 0\nvertex w theta 2\n"
        "vertex v theta 2\n"
        "edge z w\nedge u v\nedge w v\ntarget v\n");
    auto [inst, m] = firing_to_ftm_rm(f);
    CHECK_FALSE(find_firing_bruteforce(f, f.target).has_value());
    CHECK_FALSE(find_prescription(inst, m).has_value());
  }
}

TEST_CASE("firing format round trip") {
  FiringInstance f = sat_to_firing(kSatNormalized);
  FiringInstance again = parse_firing(format_firing(f));
  CHECK(again.vertex_names == f.vertex_names);
  CHECK(again.theta == f.theta);
  CHECK(again.edges == f.edges);
  CHECK(again.target == f.target);
}

TEST_CASE("random_instance") {
  RandomInstanceParams params;
  params.n_residents = 6;
  params.n_hospitals = 5;
  params.quota_max = 3;
  params.seed = 77;
  Instance a = random_instance(params);
  Instance b = random_instance(params);
  CHECK(format_instance(a) == format_instance(b));  // same seed, same bytes
  params.seed = 78;
  CHECK(format_instance(a) != format_instance(random_instance(params)));

  params.force_resident_minimal = true;
  CHECK(is_resident_minimal(random_instance(params)));

  params.force_hospital_complete = true;
  params.quota_max = 1;
  Instance hc = random_instance(params);
  CHECK(hc.is_hospital_complete());
  CHECK(run_da(hc).pend.empty());

  params.resident_list_min = 9;
  params.resident_list_max = 2;
  CHECK_THROWS_AS(random_instance(params), std::invalid_argument);
}

TEST_CASE("property: reduction equivalence chain at desk scale") {
  Rng rng(5150);
  int checked = 0;
  for (int i = 0; checked < 12 && i < 200; ++i) {
    ClauseSet s = normalize_sat(random_clause_set(rng, 3, 3));
    if (s.clauses.empty() || s.n_vars > 2 || s.clauses.size() > 7) continue;
    ++checked;
    bool sat = truth_table_satisfiable(s);

    FiringInstance f = sat_to_firing(s);
    CHECK(find_firing_search(f, f.target).has_value() == sat);

    auto [gadget, gm] = sat_to_ftm(s);
    FtmAnswer g = ftm_backtrack(gadget, gm, 4'000'000);
    REQUIRE(g.outcome != FtmOutcome::unknown);
    CHECK(g.finalizable() == !sat);

    auto [rm_inst, rm_m] = firing_to_ftm_rm(f);
    FtmAnswer r = ftm_backtrack(rm_inst, rm_m, 4'000'000);
    REQUIRE(r.outcome != FtmOutcome::unknown);
    CHECK(r.finalizable() == !sat);
  }
  REQUIRE(checked == 12);
}
