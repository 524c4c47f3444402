#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "core/errors.hpp"

namespace treebandit {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::HitRate: return "hit_rate";
    case Metric::Dcg: return "dcg";
    case Metric::NormPathLen: return "norm_path_len";
    case Metric::HighestReward: return "highest_reward";
    case Metric::CumulativeReward: return "cumulative_reward";
    case Metric::NormJump: return "norm_jump";
  }
  return "?";
}

int tree_distance(const SearchTree& tree, StateId a, StateId b) {
  int da = tree.depth(a);
  int db = tree.depth(b);
  const int sum = da + db;
  while (da > db) {
    a = *tree.parent(a);
    --da;
  }
  while (db > da) {
    b = *tree.parent(b);
    --db;
  }
  while (a != b) {
    a = *tree.parent(a);
    b = *tree.parent(b);
    --da;
  }
  return sum - 2 * da;
}

RunOutcome score_run(const Trajectory& t, const SearchTree& tree) {
  RunOutcome o;
  o.truth_path_len = tree.best_reward_path_length();
  const double best = tree.best_reward();
  for (std::size_t i = 1; i < t.steps.size(); ++i) {
    const double r = tree.reward(t.steps[i].state);
    o.rewards.push_back(r);
    if (!o.hit && best > 0.0 && r == best) {
      o.hit = true;
      o.hit_iter = static_cast<int>(i);
      o.found_path_len = tree.depth(t.steps[i].state);
    }
  }
  const std::size_t T = t.selections();
  const auto jump = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(tree_distance(tree, t.steps[i].state, t.steps[j].state));
  };
  if (T == 1) {
    o.jump_distances.push_back(jump(0, 1));
  } else {
    for (std::size_t i = 1; i < T; ++i) {
      o.jump_distances.push_back((jump(i - 1, i) + jump(i, i + 1)) / 2.0);
    }
  }
  return o;
}

RunOutcome failed_run(const Trajectory& partial, const SearchTree& tree) {
  RunOutcome o = partial.steps.empty() ? RunOutcome{} : score_run(partial, tree);
  o.truth_path_len = tree.best_reward_path_length();
  o.hit = false;
  o.hit_iter.reset();
  o.found_path_len.reset();
  o.failed = true;
  return o;
}

std::array<double, 12> MetricVector::components() const {
  std::array<double, 12> out{};
  for (std::size_t i = 0; i < 6; ++i) {
    out[2 * i] = stats[i].mean;
    out[2 * i + 1] = stats[i].std;
  }
  return out;
}

std::array<double, 6> run_metrics(const RunOutcome& o) {
  std::array<double, 6> v{};
  v[0] = o.hit ? 1.0 : 0.0;
  v[1] = o.hit ? 1.0 / std::log2(static_cast<double>(*o.hit_iter) + 1.0) : 0.0;
  v[2] = o.hit ? std::exp(static_cast<double>(o.truth_path_len - *o.found_path_len)) : 0.0;
  double highest = 0.0, cumulative = 0.0;
  for (double r : o.rewards) {
    highest = std::max(highest, r);
    cumulative += r;
  }
  v[3] = highest;
  v[4] = cumulative;
  double jump = 0.0;
  for (double j : o.jump_distances) jump += j;
  v[5] = o.jump_distances.empty() ? 0.0 : jump / static_cast<double>(o.jump_distances.size());
  return v;
}

MetricVector aggregate(const std::vector<RunOutcome>& outcomes) {
  if (outcomes.empty()) throw ParameterError("cannot aggregate zero runs");
  MetricVector mv;
  mv.runs = outcomes.size();
  std::vector<std::array<double, 6>> rows;
  rows.reserve(outcomes.size());
  for (const auto& o : outcomes) rows.push_back(run_metrics(o));
  const double n = static_cast<double>(outcomes.size());
  for (std::size_t m = 0; m < 6; ++m) {
    // Sort before summing so the result does not depend on run order.
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& r : rows) col.push_back(r[m]);
    std::sort(col.begin(), col.end());
    double sum = 0.0;
    for (double x : col) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : col) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / n);
    mv.stats[m] = {mean, sd, 1.96 * sd / std::sqrt(n)};
  }
  return mv;
}

double l2_metric_distance(const MetricVector& a, const MetricVector& b) {
  const auto x = a.components();
  const auto y = b.components();
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(ss);
}

KlResult kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw StructuralError("distributions over different supports");
  KlResult r;
  std::vector<double> qs(q.size());
  double z = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    qs[i] = std::max(q[i], kKlFloor);
    z += qs[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] < kKlFloor) r.smoothed = true;
    r.value += p[i] * std::log(p[i] / (qs[i] / z));
  }
  r.value = std::max(r.value, 0.0);
  return r;
}

KlResult kl_divergence(const NextStateDistribution& p, const NextStateDistribution& q) {
  if (p.support != q.support) throw StructuralError("distributions over different frontiers");
  std::vector<double> pv = p.probabilities;
  std::vector<double> qv = q.probabilities;
  if (p.dead_end_mass > 0.0 || q.dead_end_mass > 0.0) {
    pv.push_back(p.dead_end_mass);
    qv.push_back(q.dead_end_mass);
  }
  return kl_divergence(pv, qv);
}

void write_metric_csv(std::ostream& out, const MetricVector& v) {
  out << "metric,mean,std,se95\n" << std::setprecision(10);
  for (Metric m : kAllMetrics) {
    out << metric_name(m) << ',' << v[m].mean << ',' << v[m].std << ',' << v[m].se95 << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<std::string>& names,
                          const std::vector<MetricVector>& vectors) {
  if (names.size() != vectors.size()) throw ParameterError("one name per metric vector");
  out << "name" << std::setprecision(10);
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out << names[i];
    for (std::size_t j = 0; j < vectors.size(); ++j) out << ',' << l2_metric_distance(vectors[i], vectors[j]);
    out << '\n';
  }
}

}  // namespace treebandit
