#include "hbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hbo/error.hpp"
#include "hbo/rng.hpp"

namespace hbo {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

}  // namespace

double expected_improvement(const Posterior& post, double f_best) {
  const double diff = post.mean - f_best;
  const double sigma = std::sqrt(std::max(post.variance, 0.0));
  if (sigma == 0.0) return std::max(0.0, diff);
  const double z = diff / sigma;
  return std::max(0.0, diff * normal_cdf(z) + sigma * normal_pdf(z));
}

ImportanceWeights normalise_log_weights(std::span<const double> log_weights) {
  ImportanceWeights out;
  const std::size_t m = log_weights.size();
  if (m == 0) fail(ErrorKind::Input, "no importance weights to normalise");
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights)
    if (std::isfinite(lw)) max_lw = std::max(max_lw, lw);

  out.weights.assign(m, 0.0);
  if (!std::isfinite(max_lw)) {
    out.weights.assign(m, 1.0 / static_cast<double>(m));
    out.fallback = true;
  } else {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(log_weights[i])) continue;
      out.weights[i] = std::exp(log_weights[i] - max_lw);
      total += out.weights[i];
    }
    for (double& w : out.weights) w /= total;
  }
  double sum_sq = 0.0;
  for (double w : out.weights) sum_sq += w * w;
  out.effective_sample_size = 1.0 / sum_sq;
  return out;
}

ImportanceWeights log_importance_weights(const PriorSampleSet& prior, const Observations& observed) {
  if (observed.size() == 0) fail(ErrorKind::Input, "importance weights need at least one observation");
  std::vector<double> lw(prior.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    try {
      lw[i] = log_marginal_likelihood(prior.spec, prior.samples[i], observed.locations, observed.values);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
    }
  }
  return normalise_log_weights(lw);
}

WeightedAcquisition::WeightedAcquisition(const PriorSampleSet& prior, const Observations& observed) {
  if (prior.size() == 0) fail(ErrorKind::Input, "empty prior sample set");
  if (observed.size() == 0) fail(ErrorKind::Input, "acquisition needs at least one observation");
  f_best_ = *std::max_element(observed.values.begin(), observed.values.end());
  models_.resize(prior.size());
  std::vector<double> lw(prior.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    try {
      models_[i].emplace(prior.spec, prior.samples[i], observed.locations, observed.values);
      lw[i] = models_[i]->log_marginal_likelihood();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      models_[i].reset();
    }
  }
  weights_ = normalise_log_weights(lw);
}

double WeightedAcquisition::operator()(const Point& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (!models_[i] || weights_.weights[i] == 0.0) continue;
    total += weights_.weights[i] * expected_improvement(models_[i]->predict(x), f_best_);
  }
  return total;
}

std::vector<double> WeightedAcquisition::evaluate(std::span<const Point> xs) const {
  std::vector<double> out(xs.size(), 0.0);
  Eigen::VectorXd mean, var;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (!models_[i] || weights_.weights[i] == 0.0) continue;
    models_[i]->predict(xs, mean, var);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out[j] += weights_.weights[i] * expected_improvement({mean(jj), var(jj)}, f_best_);
    }
  }
  return out;
}

double weighted_acquisition(const PriorSampleSet& prior, const Observations& observed, const Point& x_star) {
  return WeightedAcquisition(prior, observed)(x_star);
}

void append_step(BoTrace& trace, const Snapshot& snapshot, std::size_t candidate, std::optional<double> ess,
                 bool fallback) {
  TraceStep step;
  step.candidate = candidate;
  step.location = snapshot.locations[candidate];
  step.value_raw = snapshot.values_raw[candidate];
  step.value_pre = snapshot.values_pre[candidate];
  step.ess = ess;
  step.weights_fallback = fallback;
  if (trace.steps.empty() || step.value_pre > trace.steps.back().best_so_far) {
    step.best_so_far = step.value_pre;
    step.best_candidate = candidate;
  } else {
    step.best_so_far = trace.steps.back().best_so_far;
    step.best_candidate = trace.steps.back().best_candidate;
  }
  trace.steps.push_back(step);
}

BoTrace run_bo(const Snapshot& snapshot, const PriorSampleSet& prior, const BoConfig& config) {
  if (config.n_init < 1) fail(ErrorKind::Input, "n_init must be at least 1");
  if (config.n_iter < config.n_init) fail(ErrorKind::Input, "n_iter must be at least n_init");
  if (!snapshot.preprocessed()) fail(ErrorKind::Input, "snapshot " + snapshot.id + " is not pre-processed");
  std::vector<std::size_t> unvisited = snapshot.candidates();
  if (unvisited.size() < config.n_iter) {
    std::ostringstream os;
    os << "snapshot " << snapshot.id << " has " << unvisited.size() << " candidates, fewer than n_iter="
       << config.n_iter;
    fail(ErrorKind::Input, os.str());
  }

  BoTrace trace;
  trace.snapshot_id = snapshot.id;
  std::vector<std::size_t> visited;

  Rng rng = make_stream(config.seed, {stream::kBoInit, fnv1a(snapshot.id)});
  for (std::size_t i = 0; i < config.n_init; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, unvisited.size() - 1);
    const auto j = pick(rng);
    const auto c = unvisited[j];
    unvisited.erase(unvisited.begin() + static_cast<std::ptrdiff_t>(j));
    visited.push_back(c);
    append_step(trace, snapshot, c);
  }

  std::vector<Point> candidate_points;
  for (std::size_t it = config.n_init; it < config.n_iter; ++it) {
    const auto observed = snapshot.observe(visited);
    const WeightedAcquisition acquisition(prior, observed);
    candidate_points.clear();
    for (auto c : unvisited) candidate_points.push_back(snapshot.locations[c]);
    const auto values = acquisition.evaluate(candidate_points);
    // First index wins ties.
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
      if (values[j] > values[best]) best = j;
    const auto c = unvisited[best];
    unvisited.erase(unvisited.begin() + static_cast<std::ptrdiff_t>(best));
    visited.push_back(c);
    append_step(trace, snapshot, c, acquisition.weights().effective_sample_size, acquisition.weights().fallback);
  }
  return trace;
}

}  // namespace hbo
