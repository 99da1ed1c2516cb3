#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "ftm/firing.hpp"
#include "helpers.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

/// Runs the built binary with a shell-quoted argument string.
CliResult run_cli(const std::string& args, const std::string& stdin_text = "") {
  static int counter = 0;
  std::string dir = "/tmp/ftm_cli_test";
  std::system(("mkdir -p " + dir).c_str());
  std::string out_path = dir + "/out" + std::to_string(++counter);
  std::string in_path = dir + "/in" + std::to_string(counter);
  {
    std::ofstream in(in_path);
    in << stdin_text;
  }
  std::string cmd = std::string(FTM_CLI_PATH) + " " + args + " < " + in_path +
                    " > " + out_path + " 2>" + out_path + ".err";
  int raw = std::system(cmd.c_str());
  CliResult res;
  res.status = WEXITSTATUS(raw);
  std::ifstream out(out_path);
  std::ostringstream buf;
  buf << out.rdbuf();
  res.out = buf.str();
  return res;
}

const char* kTable1 =
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
    "resident i : Z\n";

}  // namespace

TEST_CASE("cli: da reproduces the worked example in json") {
  CliResult res = run_cli("da - --json", kTable1);
  REQUIRE(res.status == 0);
  json doc = json::parse(res.out);
  json tent = doc["tent"];
  REQUIRE(tent.size() == 7);
  CHECK(tent[0] == json::array({"a", "X"}));
  CHECK(doc["pend"].empty());
}

TEST_CASE("cli: safe prints the five-match safe set and its trace") {
  CliResult res = run_cli("safe - --json", kTable1);
  REQUIRE(res.status == 0);
  json doc = json::parse(res.out);
  CHECK(doc["maximal_safe"].size() == 5);
  REQUIRE(doc["trace"].size() == 2);
  CHECK(doc["trace"][0]["iteration"] == 1);
  CHECK(doc["trace"][0]["removed"] == json::array({{"e", "Y"}}));
  CHECK(doc["trace"][1]["removed"] == json::array({{"f", "X"}}));
}

TEST_CASE("cli: ftm decides and encodes the answer") {
  std::string inst =
      "resident r1 : h1\nresident r2 :\nhospital h1 1 : r2 r1\n"
      "query r1 h1\n";
  CliResult res = run_cli("ftm - --json --limit 100000", inst);
  REQUIRE(res.status == 0);
  json doc = json::parse(res.out);
  CHECK(doc["finalizable"] == false);
  CHECK(doc["outcome"] == "not-finalizable");
  REQUIRE(doc["counterexample"].is_string());
  // the counterexample parses and the engine rejects the match in it
  ftm::Instance j =
      ftm::parse_instance(doc["counterexample"].get<std::string>());
  REQUIRE(j.query.has_value());
  CHECK(ftm::run_da(j).rej.count(*j.query));

  CliResult bt = run_cli("ftm - --json --method backtrack", inst);
  REQUIRE(bt.status == 0);
  CHECK(json::parse(bt.out)["finalizable"] == false);
}

TEST_CASE("cli: exit codes") {
  CHECK(run_cli("nonsense").status == 1);                    // usage
  CHECK(run_cli("da -", "garbage line\n").status == 2);      // format
  CHECK(run_cli("ftm -", "resident r1 : h1\nhospital h1 1 : r1\n").status ==
        2);  // no query match anywhere
  std::string inst =
      "resident r1 : h1\nresident r2 :\nhospital h1 1 : r2 r1\n"
      "hospital h2 1 :\nquery r1 h1\n";
  CHECK(run_cli("ftm - --limit 1", inst).status == 3);  // limit exhausted
  std::string pend =
      "resident r1 : h1\nresident r2 : h1\nresident r3 :\n"
      "hospital h1 1 :\nhospital h2 1 : r1 r2 r3\nquery r1 h1\n";
  CHECK(run_cli("ftm - --method backtrack --budget 1", pend).status ==
        3);  // unknown
}

TEST_CASE("cli: ftm-rm policies") {
  std::string pending_pair =
      "resident r1 : h1\nresident r2 : h2\n"
      "hospital h1 1 :\nhospital h2 1 : r2\nquery r1 h1\n";
  CliResult paper = run_cli("ftm-rm - --json", pending_pair);
  REQUIRE(paper.status == 0);
  CHECK(json::parse(paper.out)["finalizable"] == false);
  CliResult ponly = run_cli("ftm-rm - --json --root-policy p-only",
                            pending_pair);
  REQUIRE(ponly.status == 0);
  CHECK(json::parse(ponly.out)["finalizable"] == true);
}

TEST_CASE("cli: presc and ip") {
  std::string inst =
      "resident r1 : h1\nresident r2 :\nhospital h1 1 : r2 r1\n"
      "query r1 h1\n";
  CliResult presc = run_cli("presc - --json", inst);
  REQUIRE(presc.status == 0);
  json doc = json::parse(presc.out);
  CHECK(doc["found"] == true);
  CHECK(doc["proposals"] == json::array({{"r2", "h1"}}));
  CHECK(doc["target"] == json::array({{"r1", "h1"}}));

  CliResult ip = run_cli("ip -", inst);
  REQUIRE(ip.status == 0);
  CHECK(ip.out.find("Minimize") != std::string::npos);
  CHECK(ip.out.find("p_r2_h1") != std::string::npos);
  CHECK(ip.out.find("Binary") != std::string::npos);
}

TEST_CASE("cli: generators round-trip through their formats") {
  std::string cnf = "p cnf 2 3\n1 -2 0\n1 2 0\n-1 2 0\n";
  CliResult gadget = run_cli("gen-sat-ftm -", cnf);
  REQUIRE(gadget.status == 0);
  ftm::Instance inst = ftm::parse_instance(gadget.out);
  REQUIRE(inst.query.has_value());
  CHECK(inst.residents.size() == 12);

  CliResult firing = run_cli("gen-firing -", cnf);
  REQUIRE(firing.status == 0);
  ftm::FiringInstance f = ftm::parse_firing(firing.out);
  CHECK(f.n_vertices() == 16);

  CliResult rm = run_cli("gen-firing-ftm -", firing.out);
  REQUIRE(rm.status == 0);
  ftm::Instance rmi = ftm::parse_instance(rm.out);
  CHECK(ftm::is_resident_minimal(rmi));
  REQUIRE(rmi.query.has_value());

  CliResult rnd = run_cli(
      "gen-random --residents 5 --hospitals 3 --quota-max 2 --seed 9");
  REQUIRE(rnd.status == 0);
  ftm::Instance ri = ftm::parse_instance(rnd.out);
  CHECK(ri.n_residents() == 5);
}

TEST_CASE("cli: sim emits the table and json") {
  CliResult text = run_cli(
      "sim --students 20 --supervisors 4 --runs 3 --seed 1 --sigma3 0.5");
  REQUIRE(text.status == 0);
  CHECK(text.out.find("tentative") != std::string::npos);
  CliResult js = run_cli(
      "sim --students 20 --supervisors 4 --runs 3 --seed 1 --sigma3 0.5 "
      "--json");
  REQUIRE(js.status == 0);
  json doc = json::parse(js.out);
  CHECK(doc["runs"] == 3);
  CHECK(doc["tentative"]["avg"].is_number());
}

TEST_CASE("cli: machine output is byte-identical across reruns") {
  std::string inst =
      "resident r1 : h1\nresident r2 :\nhospital h1 1 : r2 r1\n"
      "query r1 h1\n";
  for (const std::string& args :
       {std::string("da - --json"), std::string("safe - --json"),
        std::string("ftm - --json"),
        std::string("presc - --json"), std::string("ip -")}) {
    CliResult a = run_cli(args, inst);
    CliResult b = run_cli(args, inst);
    REQUIRE(a.status == b.status);
    CHECK(a.out == b.out);
  }
  CliResult s1 = run_cli("sim --runs 5 --seed 42 --json");
  CliResult s2 = run_cli("sim --runs 5 --seed 42 --json");
  CHECK(s1.out == s2.out);
  CliResult g1 = run_cli("gen-random --residents 6 --hospitals 4 --seed 7");
  CliResult g2 = run_cli("gen-random --residents 6 --hospitals 4 --seed 7");
  CHECK(g1.out == g2.out);
}

TEST_CASE("cli: human and machine outputs agree on the decision bit") {
  std::string inst =
      "resident r1 : h1\nresident r2 :\nhospital h1 1 : r2 r1\n"
      "query r1 h1\n";
  CliResult human = run_cli("ftm -", inst);
  CliResult machine = run_cli("ftm - --json", inst);
  bool human_no = human.out.find("not-finalizable") != std::string::npos;
  CHECK(json::parse(machine.out)["finalizable"] == !human_no);

  std::string safe_inst =
      "resident r1 : h1\nhospital h1 1 : r1\nquery r1 h1\n";
  CliResult h2 = run_cli("ftm -", safe_inst);
  CliResult m2 = run_cli("ftm - --json", safe_inst);
  CHECK(h2.out.find("not-finalizable") == std::string::npos);
  CHECK(h2.out.find("finalizable") != std::string::npos);
  CHECK(json::parse(m2.out)["finalizable"] == true);
}
