#include "hbo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hbo/error.hpp"
#include "text_util.hpp"

namespace hbo {
namespace {

using StepMetric = std::function<std::vector<double>(const BoTrace&)>;

/// Averages runs within each snapshot, then across snapshots.
MetricCurve aggregate(std::span<const BoTrace> traces, const StepMetric& per_trace, std::size_t first_iteration) {
  std::map<std::string, std::vector<std::vector<double>>> grouped;
  for (const auto& t : traces) grouped[t.snapshot_id].push_back(per_trace(t));

  MetricCurve curve;
  curve.first_iteration = first_iteration;
  for (const auto& [id, runs] : grouped) {
    std::size_t len = std::numeric_limits<std::size_t>::max();
    for (const auto& r : runs) len = std::min(len, r.size());
    std::vector<double> avg(len, 0.0);
    for (const auto& r : runs)
      for (std::size_t i = 0; i < len; ++i) avg[i] += r[i];
    for (double& v : avg) v /= static_cast<double>(runs.size());
    curve.snapshot_ids.push_back(id);
    curve.per_snapshot.push_back(std::move(avg));
  }
  curve.n_snapshots = curve.per_snapshot.size();
  if (curve.n_snapshots == 0) return curve;

  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& c : curve.per_snapshot) len = std::min(len, c.size());
  const double p = static_cast<double>(curve.n_snapshots);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const auto& c : curve.per_snapshot) sum += c[i];
    const double mean = sum / p;
    double ss = 0.0;
    for (const auto& c : curve.per_snapshot) ss += (c[i] - mean) * (c[i] - mean);
    curve.mean.push_back(mean);
    curve.sem.push_back(curve.n_snapshots > 1 ? std::sqrt(ss / (p - 1.0)) / std::sqrt(p) : 0.0);
  }
  return curve;
}

std::map<std::string, const Snapshot*> index_snapshots(std::span<const BoTrace> traces,
                                                       std::span<const Snapshot> snapshots) {
  std::map<std::string, const Snapshot*> by_id;
  for (const auto& s : snapshots) by_id.emplace(s.id, &s);
  for (const auto& t : traces) {
    if (!by_id.contains(t.snapshot_id)) fail(ErrorKind::Input, "trace refers to unknown snapshot " + t.snapshot_id);
  }
  return by_id;
}

}  // namespace

MetricCurve maximum_ratio_curve(std::span<const BoTrace> traces, std::span<const Snapshot> snapshots) {
  const auto by_id = index_snapshots(traces, snapshots);
  std::vector<std::string> flagged;
  for (const auto& [id, s] : by_id) {
    bool used = std::any_of(traces.begin(), traces.end(), [&](const BoTrace& t) { return t.snapshot_id == id; });
    if (!used) continue;
    const double y_star = s->values_pre[s->true_maximiser()];
    if (y_star == 0.0) fail(ErrorKind::Degenerate, "snapshot " + id + " has a zero pre-processed maximum");
    if (y_star < 0.0) flagged.push_back(id);
  }
  auto curve = aggregate(
      traces,
      [&](const BoTrace& t) {
        const Snapshot& s = *by_id.at(t.snapshot_id);
        const double y_star = s.values_pre[s.true_maximiser()];
        std::vector<double> out;
        out.reserve(t.steps.size());
        for (const auto& step : t.steps) out.push_back(s.values_pre[step.best_candidate] / y_star);
        return out;
      },
      1);
  curve.flagged = std::move(flagged);
  return curve;
}

MetricCurve maximiser_distance_curve(std::span<const BoTrace> traces, std::span<const Snapshot> snapshots) {
  const auto by_id = index_snapshots(traces, snapshots);
  return aggregate(
      traces,
      [&](const BoTrace& t) {
        const Snapshot& s = *by_id.at(t.snapshot_id);
        const Point& best = s.locations[s.true_maximiser()];
        std::vector<double> out;
        out.reserve(t.steps.size());
        for (const auto& step : t.steps) out.push_back((s.locations[step.best_candidate] - best).norm());
        return out;
      },
      1);
}

MetricCurve exploration_curve(std::span<const BoTrace> traces) {
  return aggregate(
      traces,
      [](const BoTrace& t) {
        std::vector<double> out;
        for (std::size_t i = 1; i < t.steps.size(); ++i) {
          double d = std::numeric_limits<double>::infinity();
          for (std::size_t a = 0; a < i; ++a) d = std::min(d, (t.steps[i].location - t.steps[a].location).norm());
          out.push_back(d);
        }
        return out;
      },
      2);
}

Interval summarize_interval(std::span<const double> values) {
  if (values.size() < 2) fail(ErrorKind::Input, "an interval needs at least two values");
  const double p = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / p;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sem = std::sqrt(ss / (p - 1.0)) / std::sqrt(p);
  return {mean - sem, mean + sem};
}

std::string format_interval(const Interval& interval, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << interval.lo << '-' << interval.hi;
  return os.str();
}

void write_curve_csv(std::ostream& out, const MetricCurve& curve) {
  out << "iteration,mean,sem,n\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << (curve.first_iteration + i) << ',' << detail::format_double(curve.mean[i]) << ','
        << detail::format_double(curve.sem[i]) << ',' << curve.n_snapshots << '\n';
}

void write_per_snapshot_csv(std::ostream& out, const MetricCurve& curve) {
  out << "snapshot_id,iteration,value\n";
  for (std::size_t s = 0; s < curve.per_snapshot.size(); ++s)
    for (std::size_t i = 0; i < curve.per_snapshot[s].size(); ++i)
      out << curve.snapshot_ids[s] << ',' << (curve.first_iteration + i) << ','
          << detail::format_double(curve.per_snapshot[s][i]) << '\n';
}

}  // namespace hbo
