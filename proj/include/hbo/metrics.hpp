#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hbo/acquisition.hpp"
#include "hbo/data.hpp"

namespace hbo {

/// A per-iteration metric averaged over snapshots. Several traces of the
/// same snapshot (e.g. baseline runs) are averaged first; the curve is then
/// truncated to the shortest snapshot.
struct MetricCurve {
  /// 1-based iteration of mean[0].
  std::size_t first_iteration = 1;
  std::vector<double> mean;
  /// Standard error of the mean across snapshots (0 with one snapshot).
  std::vector<double> sem;
  std::size_t n_snapshots = 0;
  /// Sorted by id; per_snapshot curves are not truncated.
  std::vector<std::string> snapshot_ids;
  std::vector<std::vector<double>> per_snapshot;
  /// Snapshots whose pre-processed maximum is negative (ratio not bounded by 1).
  std::vector<std::string> flagged;

  std::size_t size() const noexcept { return mean.size(); }
};

/// Value at the best-so-far location over the true maximum, in
/// pre-processed space.
MetricCurve maximum_ratio_curve(std::span<const BoTrace> traces, std::span<const Snapshot> snapshots);

/// Distance (km) from the best-so-far location to the true maximiser.
MetricCurve maximiser_distance_curve(std::span<const BoTrace> traces, std::span<const Snapshot> snapshots);

/// Distance from each new sample to the nearest earlier one; starts at
/// iteration 2.
MetricCurve exploration_curve(std::span<const BoTrace> traces);

struct Interval {
  double lo;
  double hi;
};

/// mean -/+ s / sqrt(P), s the sample standard deviation. Needs >= 2 values.
Interval summarize_interval(std::span<const double> values);

/// "0.996-0.999" style with `decimals` digits.
std::string format_interval(const Interval& interval, int decimals = 3);

/// iteration,mean,sem,n
void write_curve_csv(std::ostream& out, const MetricCurve& curve);

/// snapshot_id,iteration,value (full per-snapshot curves).
void write_per_snapshot_csv(std::ostream& out, const MetricCurve& curve);

}  // namespace hbo
