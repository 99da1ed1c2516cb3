// Command-line front end: deferred-acceptance runs, safe sets, exact
// finalizability decisions, certificates, integer-program emission,
// hardness-reduction generators and the market simulator.
//
// Exit codes: 0 success, 1 usage error, 2 input-format error,
// 3 budget/limit exhaustion (answer unknown).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftm/exact.hpp"
#include "ftm/ip.hpp"
#include "ftm/marriage_digraph.hpp"
#include "ftm/prescription.hpp"
#include "ftm/random_gen.hpp"
#include "ftm/reductions.hpp"
#include "ftm/safe.hpp"
#include "ftm/sim.hpp"

namespace {

using nlohmann::json;
using namespace ftm;

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitUnknown = 3;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file " + path);
  out << text;
}

std::vector<std::pair<std::string, std::string>> named_pairs(
    const Instance& inst, const MatchSet& set) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Match& m : set)
    out.emplace_back(inst.residents[m.resident], inst.hospitals[m.hospital]);
  std::sort(out.begin(), out.end());
  return out;
}

json pairs_json(const Instance& inst, const MatchSet& set) {
  json arr = json::array();
  for (auto& [r, h] : named_pairs(inst, set)) arr.push_back({r, h});
  return arr;
}

std::string pairs_text(const Instance& inst, const MatchSet& set) {
  std::string out;
  for (auto& [r, h] : named_pairs(inst, set)) {
    if (!out.empty()) out += ' ';
    out += "(" + r + "," + h + ")";
  }
  return out.empty() ? "-" : out;
}

/// The queried match: --match takes precedence, then the query line.
Match resolve_query(const Instance& inst,
                    const std::vector<std::string>& match_flag) {
  if (!match_flag.empty()) {
    int r = inst.resident_index(match_flag[0]);
    if (r < 0)
      throw std::invalid_argument("unknown resident '" + match_flag[0] + "'");
    int h = inst.hospital_index(match_flag[1]);
    if (h < 0)
      throw std::invalid_argument("unknown hospital '" + match_flag[1] + "'");
    return Match{r, h};
  }
  if (inst.query) return *inst.query;
  throw std::invalid_argument(
      "no match under test: pass --match <resident> <hospital> or add a "
      "query line to the instance");
}

struct CommonArgs {
  std::string input = "-";
  std::string output;
  std::vector<std::string> match_flag;
  bool json_output = false;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool with_match) {
  cmd->add_option("input", args->input, "instance file ('-' for stdin)");
  cmd->add_option("-o,--output", args->output, "output file (default stdout)");
  cmd->add_flag("--json", args->json_output, "machine-readable JSON output");
  if (with_match)
    cmd->add_option("--match", args->match_flag,
                    "resident and hospital of the match under test")
        ->expected(2);
}

int run(int argc, char** argv) {
  CLI::App app{"finalizability toolkit for truncated matching instances"};
  app.require_subcommand(1);

  CommonArgs da_args;
  CLI::App* da_cmd = app.add_subcommand(
      "da", "run deferred acceptance and report the derived match sets");
  add_common(da_cmd, &da_args, false);

  CommonArgs safe_args;
  CLI::App* safe_cmd = app.add_subcommand(
      "safe", "compute the maximal safe set and its removal trace");
  add_common(safe_cmd, &safe_args, false);

  CommonArgs ftm_args;
  unsigned long long ftm_limit = 1'000'000;
  long long ftm_budget = 1'000'000;
  std::string ftm_method = "brute";
  CLI::App* ftm_cmd = app.add_subcommand(
      "ftm", "decide finalizability of a tentative match exactly");
  add_common(ftm_cmd, &ftm_args, true);
  ftm_cmd->add_option("--limit", ftm_limit,
                      "completion cap for the brute-force oracle");
  ftm_cmd->add_option("--budget", ftm_budget,
                      "node budget for the backtracking search");
  ftm_cmd->add_option("--method", ftm_method, "brute or backtrack")
      ->check(CLI::IsMember({"brute", "backtrack"}));

  CommonArgs rm_args;
  std::string root_policy = "paper";
  CLI::App* rm_cmd = app.add_subcommand(
      "ftm-rm",
      "decide finalizability on a resident-minimal marriage instance via "
      "the tentative-match digraph");
  add_common(rm_cmd, &rm_args, true);
  rm_cmd->add_option("--root-policy", root_policy,
                     "chain starts: paper (pending matches included) or "
                     "p-only")
      ->check(CLI::IsMember({"paper", "p-only"}));

  CommonArgs presc_args;
  CLI::App* presc_cmd = app.add_subcommand(
      "presc", "search for a minimum-|P| prescription certificate");
  add_common(presc_cmd, &presc_args, true);

  CommonArgs ip_args;
  int zcap = 12;
  CLI::App* ip_cmd = app.add_subcommand(
      "ip", "emit the prescription integer program in LP format");
  add_common(ip_cmd, &ip_args, true);
  ip_cmd->add_option("--zcap", zcap,
                     "cap on pending residents per hospital for z variables");

  CommonArgs gsf_args;
  CLI::App* gsf_cmd = app.add_subcommand(
      "gen-sat-ftm",
      "DIMACS CNF -> marriage instance whose query match is finalizable "
      "iff the formula is unsatisfiable");
  add_common(gsf_cmd, &gsf_args, false);

  CommonArgs gfi_args;
  CLI::App* gfi_cmd = app.add_subcommand(
      "gen-firing", "DIMACS CNF -> digraph-firing instance");
  add_common(gfi_cmd, &gfi_args, false);

  CommonArgs gff_args;
  CLI::App* gff_cmd = app.add_subcommand(
      "gen-firing-ftm",
      "firing instance -> resident-minimal quota-bounded instance");
  add_common(gff_cmd, &gff_args, false);

  RandomInstanceParams rnd;
  std::string rnd_output;
  CLI::App* rnd_cmd =
      app.add_subcommand("gen-random", "seeded random instance");
  rnd_cmd->add_option("--residents", rnd.n_residents, "number of residents");
  rnd_cmd->add_option("--hospitals", rnd.n_hospitals, "number of hospitals");
  rnd_cmd->add_option("--quota-max", rnd.quota_max, "maximum quota");
  rnd_cmd->add_option("--rlist-min", rnd.resident_list_min,
                      "resident list length lower bound");
  rnd_cmd->add_option("--rlist-max", rnd.resident_list_max,
                      "resident list length upper bound");
  rnd_cmd->add_option("--hlist-min", rnd.hospital_list_min,
                      "hospital list length lower bound");
  rnd_cmd->add_option("--hlist-max", rnd.hospital_list_max,
                      "hospital list length upper bound");
  rnd_cmd->add_flag("--resident-minimal", rnd.force_resident_minimal,
                    "truncate to the resident-minimal form");
  rnd_cmd->add_flag("--hospital-complete", rnd.force_hospital_complete,
                    "draw complete hospital lists");
  rnd_cmd->add_option("--seed", rnd.seed, "random seed");
  rnd_cmd->add_option("-o,--output", rnd_output, "output file");

  SimConfig sim_cfg;
  std::string sim_output;
  bool sim_json = false;
  CLI::App* sim_cmd = app.add_subcommand(
      "sim", "student-supervisor market simulation, first round");
  sim_cmd->add_option("--students", sim_cfg.n_students, "number of students");
  sim_cmd->add_option("--supervisors", sim_cfg.n_supervisors,
                      "number of supervisors");
  sim_cmd->add_option("--topics", sim_cfg.n_topics, "number of topics");
  sim_cmd->add_option("--k", sim_cfg.interviews, "interviews per student");
  sim_cmd->add_option("--r", sim_cfg.round1_length, "round-one list length");
  sim_cmd->add_option("--sigma1", sim_cfg.sigma1, "grade spread");
  sim_cmd->add_option("--sigma2", sim_cfg.sigma2,
                      "supervisor total-attractiveness spread");
  sim_cmd->add_option("--sigma3", sim_cfg.sigma3, "topic-weight diversity");
  sim_cmd->add_option("--runs", sim_cfg.runs, "number of runs");
  sim_cmd->add_option("--seed", sim_cfg.seed, "random seed");
  sim_cmd->add_flag("--json", sim_json, "machine-readable JSON output");
  sim_cmd->add_option("-o,--output", sim_output, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (da_cmd->parsed()) {
    Instance inst = parse_instance(read_input(da_args.input));
    inst.check_valid();
    ExecResult exec = run_da(inst);
    std::ostringstream out;
    if (da_args.json_output) {
      json doc;
      doc["prop"] = pairs_json(inst, exec.prop);
      doc["rej"] = pairs_json(inst, exec.rej);
      doc["tent"] = pairs_json(inst, exec.tent);
      doc["pend"] = pairs_json(inst, exec.pend);
      out << doc.dump(2) << "\n";
    } else {
      out << "residents: " << inst.n_residents()
          << "\nhospitals: " << inst.n_hospitals() << "\n";
      out << "prop: " << pairs_text(inst, exec.prop) << "\n";
      out << "rej:  " << pairs_text(inst, exec.rej) << "\n";
      out << "tent: " << pairs_text(inst, exec.tent) << "\n";
      out << "pend: " << pairs_text(inst, exec.pend) << "\n";
    }
    write_output(da_args.output, out.str());
    return 0;
  }

  if (safe_cmd->parsed()) {
    Instance inst = parse_instance(read_input(safe_args.input));
    inst.check_valid();
    ExecResult exec = run_da(inst);
    SafeSetReport report = maximal_safe_set(inst, exec);
    std::ostringstream out;
    if (safe_args.json_output) {
      json doc;
      doc["tent"] = pairs_json(inst, exec.tent);
      doc["maximal_safe"] = pairs_json(inst, report.maximal_safe);
      doc["trace"] = json::array();
      for (auto& [iter, removed] : report.removal_trace)
        doc["trace"].push_back(
            {{"iteration", iter}, {"removed", pairs_json(inst, removed)}});
      out << doc.dump(2) << "\n";
    } else {
      out << "tent:         " << pairs_text(inst, exec.tent) << "\n";
      out << "maximal safe: " << pairs_text(inst, report.maximal_safe)
          << "\n";
      for (auto& [iter, removed] : report.removal_trace)
        out << "iteration " << iter << " removed "
            << pairs_text(inst, removed) << "\n";
    }
    write_output(safe_args.output, out.str());
    return 0;
  }

  auto emit_decision = [](const CommonArgs& args, const Instance& inst,
                          const FtmAnswer& ans, const char* method) {
    std::ostringstream out;
    const char* verdict = ans.outcome == FtmOutcome::finalizable
                              ? "finalizable"
                              : ans.outcome == FtmOutcome::not_finalizable
                                    ? "not-finalizable"
                                    : "unknown";
    if (args.json_output) {
      json doc;
      doc["method"] = method;
      doc["outcome"] = verdict;
      doc["finalizable"] = ans.outcome == FtmOutcome::unknown
                               ? json(nullptr)
                               : json(ans.finalizable());
      doc["stats"] = {{"nodes", ans.stats.nodes},
                      {"completions", ans.stats.completions}};
      doc["counterexample"] =
          ans.counterexample ? json(format_instance(*ans.counterexample))
                             : json(nullptr);
      out << doc.dump(2) << "\n";
    } else {
      out << verdict << "\n";
      if (ans.counterexample)
        out << "counterexample:\n" << format_instance(*ans.counterexample);
    }
    write_output(args.output, out.str());
    (void)inst;
    return ans.outcome == FtmOutcome::unknown ? kExitUnknown : 0;
  };

  if (ftm_cmd->parsed()) {
    Instance inst = parse_instance(read_input(ftm_args.input));
    inst.check_valid();
    Match m = resolve_query(inst, ftm_args.match_flag);
    FtmAnswer ans = ftm_method == "brute" ? ftm_bruteforce(inst, m, ftm_limit)
                                          : ftm_backtrack(inst, m, ftm_budget);
    return emit_decision(ftm_args, inst, ans, ftm_method.c_str());
  }

  if (rm_cmd->parsed()) {
    Instance inst = parse_instance(read_input(rm_args.input));
    inst.check_valid();
    Match m = resolve_query(inst, rm_args.match_flag);
    RootPolicy policy =
        root_policy == "paper" ? RootPolicy::paper : RootPolicy::p_only;
    RmMarriageAnswer ans = ftm_rm_marriage(inst, m, policy);
    std::ostringstream out;
    if (rm_args.json_output) {
      json doc;
      doc["root_policy"] = root_policy;
      doc["finalizable"] = ans.finalizable;
      if (ans.witness_path) {
        json path = json::array();
        for (const Match& v : *ans.witness_path)
          path.push_back(
              {inst.residents[v.resident], inst.hospitals[v.hospital]});
        doc["witness_path"] = path;
      } else {
        doc["witness_path"] = nullptr;
      }
      out << doc.dump(2) << "\n";
    } else {
      out << (ans.finalizable ? "finalizable" : "not-finalizable") << "\n";
      if (ans.witness_path) {
        out << "chain:";
        for (const Match& v : *ans.witness_path)
          out << ' ' << inst.match_name(v);
        out << "\n";
      }
    }
    write_output(rm_args.output, out.str());
    return 0;
  }

  if (presc_cmd->parsed()) {
    Instance inst = parse_instance(read_input(presc_args.input));
    inst.check_valid();
    Match m = resolve_query(inst, presc_args.match_flag);
    std::optional<Prescription> p = find_prescription(inst, m);
    std::ostringstream out;
    if (presc_args.json_output) {
      json doc;
      doc["found"] = p.has_value();
      doc["finalizable"] = !p.has_value();
      if (p) {
        doc["proposals"] = pairs_json(inst, p->proposals);
        doc["rejections"] = pairs_json(inst, p->rejections);
        doc["target"] = pairs_json(inst, target_set(*p));
      }
      out << doc.dump(2) << "\n";
    } else if (p) {
      out << "prescription found\n";
      out << "P: " << pairs_text(inst, p->proposals) << "\n";
      out << "X: " << pairs_text(inst, p->rejections) << "\n";
      out << "target: " << pairs_text(inst, target_set(*p)) << "\n";
    } else {
      out << "finalizable (no prescription exists)\n";
    }
    write_output(presc_args.output, out.str());
    return 0;
  }

  if (ip_cmd->parsed()) {
    Instance inst = parse_instance(read_input(ip_args.input));
    inst.check_valid();
    Match m = resolve_query(inst, ip_args.match_flag);
    write_output(ip_args.output, emit_ip(inst, m, zcap));
    return 0;
  }

  if (gsf_cmd->parsed()) {
    ClauseSet s = normalize_sat(parse_dimacs(read_input(gsf_args.input)));
    auto [inst, m] = sat_to_ftm(s);
    write_output(gsf_args.output, format_instance(inst));
    return 0;
  }

  if (gfi_cmd->parsed()) {
    ClauseSet s = normalize_sat(parse_dimacs(read_input(gfi_args.input)));
    write_output(gfi_args.output, format_firing(sat_to_firing(s)));
    return 0;
  }

  if (gff_cmd->parsed()) {
    FiringInstance f = parse_firing(read_input(gff_args.input));
    auto [inst, m] = firing_to_ftm_rm(f);
    write_output(gff_args.output, format_instance(inst));
    return 0;
  }

  if (rnd_cmd->parsed()) {
    write_output(rnd_output, format_instance(random_instance(rnd)));
    return 0;
  }

  if (sim_cmd->parsed()) {
    SimStats stats = simulate(sim_cfg);
    std::ostringstream out;
    if (sim_json) {
      json doc;
      auto q = [](const Quantity& v) {
        return json{{"avg", v.avg}, {"min", v.min}, {"max", v.max}};
      };
      doc["sigma3"] = sim_cfg.sigma3;
      doc["runs"] = sim_cfg.runs;
      doc["tentative"] = q(stats.tentative);
      doc["finalized"] = q(stats.finalized);
      doc["ratio"] = q(stats.ratio);
      doc["filled"] = q(stats.filled);
      out << doc.dump(2) << "\n";
    } else {
      out << "sigma3 | tentative avg/min/max | finalized avg/min/max | "
             "ratio avg/min/max | filled avg/min/max\n";
      char line[256];
      std::snprintf(line, sizeof line,
                    "%6.2f | %9.2f %5.0f %5.0f | %9.2f %5.0f %5.0f | "
                    "%5.2f %5.2f %5.2f | %6.2f %4.0f %4.0f\n",
                    sim_cfg.sigma3, stats.tentative.avg, stats.tentative.min,
                    stats.tentative.max, stats.finalized.avg,
                    stats.finalized.min, stats.finalized.max, stats.ratio.avg,
                    stats.ratio.min, stats.ratio.max, stats.filled.avg,
                    stats.filled.min, stats.filled.max);
      out << line;
    }
    write_output(sim_output, out.str());
    return 0;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ftm::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ftm::LimitExceeded& e) {
    std::cerr << "limit exhausted: " << e.what() << "\n";
    return kExitUnknown;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
