#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core/search_tree.hpp"
#include "core/trajectory.hpp"
#include "search/selection.hpp"

namespace treebandit {

struct RunOutcome {
  bool hit = false;
  std::optional<int> hit_iter;  // 1-indexed selection that first reached the best reward
  std::vector<double> rewards;  // r(s_t) for t = 1..T
  std::optional<int> found_path_len;
  int truth_path_len = 0;
  std::vector<double> jump_distances;
  /// The run was aborted (illegal agent action, dead end); it scores as a miss.
  bool failed = false;
};

/// Tree distance: depth(a) + depth(b) - 2 depth(lca).
int tree_distance(const SearchTree& tree, StateId a, StateId b);

RunOutcome score_run(const Trajectory& t, const SearchTree& tree);
/// Outcome recorded for a run that could not complete.
RunOutcome failed_run(const Trajectory& partial, const SearchTree& tree);

enum class Metric { HitRate, Dcg, NormPathLen, HighestReward, CumulativeReward, NormJump };
inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::HitRate,       Metric::Dcg,
                                                      Metric::NormPathLen,   Metric::HighestReward,
                                                      Metric::CumulativeReward, Metric::NormJump};
std::string_view metric_name(Metric m);

struct MetricStat {
  double mean = 0.0;
  double std = 0.0;   // population
  double se95 = 0.0;  // 1.96 * std / sqrt(N)
};

struct MetricVector {
  std::array<MetricStat, 6> stats{};
  std::size_t runs = 0;

  const MetricStat& operator[](Metric m) const { return stats[static_cast<std::size_t>(m)]; }
  MetricStat& operator[](Metric m) { return stats[static_cast<std::size_t>(m)]; }
  /// mean_0, std_0, mean_1, std_1, ...
  std::array<double, 12> components() const;
};

/// Per-run metric values in kAllMetrics order.
std::array<double, 6> run_metrics(const RunOutcome& o);

MetricVector aggregate(const std::vector<RunOutcome>& outcomes);

double l2_metric_distance(const MetricVector& a, const MetricVector& b);

struct KlResult {
  double value = 0.0;
  /// Some p-positive state had q below the floor.
  bool smoothed = false;
};

inline constexpr double kKlFloor = 1e-6;

/// D_KL(p || q) with q floored at 1e-6 and renormalised; p stays exact.
/// Dead-end mass, when present on either side, is treated as one more outcome.
KlResult kl_divergence(const NextStateDistribution& p, const NextStateDistribution& q);
KlResult kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

/// "metric,mean,std,se95" rows.
void write_metric_csv(std::ostream& out, const MetricVector& v);
/// Square l2-distance matrix with a header row of names.
void write_comparison_csv(std::ostream& out, const std::vector<std::string>& names,
                          const std::vector<MetricVector>& vectors);

}  // namespace treebandit
