#pragma once

#include "ftm/engine.hpp"
#include "ftm/rng.hpp"
#include "ftm/safe.hpp"

namespace ftm {

/// Parameters of the student-supervisor market model and its first-round
/// procedure. Supervisor quotas are split as evenly as possible and sum to
/// the number of students.
struct SimConfig {
  int n_students = 100;
  int n_supervisors = 10;
  int n_topics = 4;
  int interviews = 5;     // k: each student interviews its top-k choices
  int round1_length = 3;  // r: list length submitted in round one
  double sigma1 = 0.1;    // grade spread
  double sigma2 = 0.1;    // supervisor total-attractiveness spread
  double sigma3 = 0.5;    // topic-weight diversity
  int runs = 100;
  std::uint64_t seed = 0;

  void check_valid() const {
    if (n_students < 0 || n_supervisors < 1 || n_topics < 1)
      throw std::invalid_argument("market sizes out of range");
    if (interviews < 0 || round1_length < 1 || runs < 1)
      throw std::invalid_argument("procedure parameters out of range");
    if (sigma1 < 0 || sigma2 < 0 || sigma3 < 0)
      throw std::invalid_argument("negative sigma");
  }
};

/// One drawn market: grades, interest and attractiveness vectors, and the
/// complete strict rank lists derived from them.
struct Market {
  std::vector<double> grade;                        // per student
  std::vector<std::vector<double>> interest;        // student x topic, sums 1
  std::vector<std::vector<double>> attractiveness;  // supervisor x topic
  std::vector<std::vector<int>> student_ranking;    // complete, best first
  std::vector<std::vector<int>> supervisor_ranking; // complete, best first
  std::vector<int> quota;

  double attraction(int s, int p) const {
    double dot = 0;
    for (std::size_t t = 0; t < interest[s].size(); ++t)
      dot += interest[s][t] * attractiveness[p][t];
    return dot;
  }
};

struct RoundRecord {
  int tentative = 0;
  int finalized = 0;
  int filled = 0;
  double ratio = 0.0;
};

struct Quantity {
  double avg = 0, min = 0, max = 0;
};

struct SimStats {
  Quantity tentative, finalized, ratio, filled;
};

namespace detail {

/// Per-topic weights: Normal(0.5, sigma) clipped to [0, 1], rescaled to the
/// requested total; an all-zero draw is redrawn.
inline std::vector<double> topic_weights(Rng& rng, int topics, double sigma,
                                         double total) {
  std::vector<double> w(topics);
  for (;;) {
    double sum = 0;
    for (double& x : w) {
      x = std::min(1.0, std::max(0.0, rng.normal(0.5, sigma)));
      sum += x;
    }
    if (sum > 0) {
      for (double& x : w) x *= total / sum;
      return w;
    }
  }
}

template <class Score>
std::vector<int> ranked_by(int count, Score&& score) {
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score(a) > score(b);  // ties keep declaration order
  });
  return order;
}

}  // namespace detail

/// Draws the market for one run. All draws come from SplitMix64 seeded with
/// seed ^ run_index, in a fixed order: grades, supervisor totals, student
/// interest rows, supervisor attractiveness rows.
inline Market gen_market(const SimConfig& cfg, int run_index) {
  cfg.check_valid();
  Rng rng(cfg.seed ^ static_cast<std::uint64_t>(run_index));
  Market mk;

  mk.grade.resize(cfg.n_students);
  for (double& g : mk.grade) g = rng.normal(0.5, cfg.sigma1);

  std::vector<double> totals(cfg.n_supervisors);
  for (double& t : totals) {
    do {
      t = rng.normal(1.0, cfg.sigma2);
    } while (t < 0.5 || t > 1.5);
  }

  mk.interest.resize(cfg.n_students);
  for (auto& row : mk.interest)
    row = detail::topic_weights(rng, cfg.n_topics, cfg.sigma3, 1.0);
  mk.attractiveness.resize(cfg.n_supervisors);
  for (int p = 0; p < cfg.n_supervisors; ++p)
    mk.attractiveness[p] =
        detail::topic_weights(rng, cfg.n_topics, cfg.sigma3, totals[p]);

  mk.student_ranking.resize(cfg.n_students);
  for (int s = 0; s < cfg.n_students; ++s)
    mk.student_ranking[s] = detail::ranked_by(
        cfg.n_supervisors, [&](int p) { return mk.attraction(s, p); });

  // Interviews: each student meets the top k of its own ranking; an
  // interview adds the mutual attraction to the grade-based score.
  const int k = std::min(cfg.interviews, cfg.n_supervisors);
  std::vector<std::set<int>> interviewed(cfg.n_supervisors);
  for (int s = 0; s < cfg.n_students; ++s)
    for (int i = 0; i < k; ++i)
      interviewed[mk.student_ranking[s][i]].insert(s);
  mk.supervisor_ranking.resize(cfg.n_supervisors);
  for (int p = 0; p < cfg.n_supervisors; ++p)
    mk.supervisor_ranking[p] =
        detail::ranked_by(cfg.n_students, [&](int s) {
          return mk.grade[s] +
                 (interviewed[p].count(s) ? mk.attraction(s, p) : 0.0);
        });

  mk.quota.resize(cfg.n_supervisors);
  const int base = cfg.n_students / cfg.n_supervisors;
  const int extra = cfg.n_students % cfg.n_supervisors;
  for (int p = 0; p < cfg.n_supervisors; ++p)
    mk.quota[p] = base + (p < extra ? 1 : 0);
  return mk;
}

/// Builds the round-one truncated instance of a market: student lists cut
/// to their top r, supervisor lists complete.
inline Instance round1_instance(const Market& mk, int r) {
  Instance inst;
  const int ns = static_cast<int>(mk.student_ranking.size());
  const int np = static_cast<int>(mk.supervisor_ranking.size());
  for (int s = 0; s < ns; ++s) inst.residents.push_back("s" + std::to_string(s + 1));
  for (int p = 0; p < np; ++p) inst.hospitals.push_back("p" + std::to_string(p + 1));
  inst.quota = mk.quota;
  inst.resident_list.resize(ns);
  for (int s = 0; s < ns; ++s) {
    const auto& full = mk.student_ranking[s];
    const int len = std::min<int>(r, static_cast<int>(full.size()));
    inst.resident_list[s].assign(full.begin(), full.begin() + len);
  }
  inst.hospital_list = mk.supervisor_ranking;
  return inst;
}

/// Runs round one on a market: deferred acceptance on the truncated lists,
/// then the maximal safe set as the finalized matches. Records the
/// tentative count, the finalized count, their ratio, and the number of
/// supervisors whose finalized matches meet their quota.
inline RoundRecord run_round1(const Market& mk, int r) {
  if (r < 1) throw std::invalid_argument("round-one length must be >= 1");
  Instance inst = round1_instance(mk, r);
  ExecResult exec = run_da(inst);
  SafeSetReport safe = maximal_safe_set(inst, exec);
  RoundRecord rec;
  rec.tentative = static_cast<int>(exec.tent.size());
  rec.finalized = static_cast<int>(safe.maximal_safe.size());
  std::vector<int> per_supervisor(inst.n_hospitals(), 0);
  for (const Match& e : safe.maximal_safe) ++per_supervisor[e.hospital];
  for (int p = 0; p < inst.n_hospitals(); ++p)
    if (per_supervisor[p] == inst.quota[p]) ++rec.filled;
  rec.ratio = rec.tentative > 0
                  ? static_cast<double>(rec.finalized) / rec.tentative
                  : 0.0;
  return rec;
}

/// Aggregates run_round1 over cfg.runs independent markets.
inline SimStats simulate(const SimConfig& cfg) {
  cfg.check_valid();
  SimStats stats;
  auto fold = [](Quantity& q, double value, int run, int runs) {
    if (run == 0) {
      q.min = q.max = value;
    } else {
      q.min = std::min(q.min, value);
      q.max = std::max(q.max, value);
    }
    q.avg += value / runs;
  };
  for (int run = 0; run < cfg.runs; ++run) {
    Market mk = gen_market(cfg, run);
    RoundRecord rec = run_round1(mk, cfg.round1_length);
    fold(stats.tentative, rec.tentative, run, cfg.runs);
    fold(stats.finalized, rec.finalized, run, cfg.runs);
    fold(stats.ratio, rec.ratio, run, cfg.runs);
    fold(stats.filled, rec.filled, run, cfg.runs);
  }
  return stats;
}

}  // namespace ftm
