#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hbo/data.hpp"
#include "hbo/gp.hpp"
#include "hbo/mcmc.hpp"

namespace hbo {

/// Closed-form Gaussian expected improvement over `f_best`.
double expected_improvement(const Posterior& post, double f_best);

struct ImportanceWeights {
  std::vector<double> weights;
  double effective_sample_size = 0.0;
  /// All likelihoods failed; weights are uniform.
  bool fallback = false;
};

/// Normalises log-weights by max-subtraction. Non-finite entries get zero
/// weight; if none are finite the weights fall back to uniform.
ImportanceWeights normalise_log_weights(std::span<const double> log_weights);

/// w_i proportional to the marginal likelihood of `observed` under sample i.
ImportanceWeights log_importance_weights(const PriorSampleSet& prior, const Observations& observed);

/// Importance-weighted EI over all prior samples, conditioned on one set of
/// observations. The incumbent is the best observed value.
class WeightedAcquisition {
 public:
  WeightedAcquisition(const PriorSampleSet& prior, const Observations& observed);

  double operator()(const Point& x) const;
  /// Evaluates at many points.
  std::vector<double> evaluate(std::span<const Point> xs) const;

  const ImportanceWeights& weights() const noexcept { return weights_; }
  double incumbent() const noexcept { return f_best_; }

 private:
  std::vector<std::optional<GpModel>> models_;
  ImportanceWeights weights_;
  double f_best_;
};

double weighted_acquisition(const PriorSampleSet& prior, const Observations& observed, const Point& x_star);

struct BoConfig {
  std::size_t n_init = 10;
  std::size_t n_iter = 30;
  std::uint64_t seed = 13;
};

struct TraceStep {
  std::size_t candidate;
  Point location;
  double value_raw;
  double value_pre;
  /// Best pre-processed value observed so far and where (first on ties).
  double best_so_far;
  std::size_t best_candidate;
  /// Effective sample size of the importance weights that chose this step;
  /// empty for random placements.
  std::optional<double> ess;
  bool weights_fallback = false;
};

struct BoTrace {
  std::string snapshot_id;
  std::vector<TraceStep> steps;
};

/// Appends an observation of `candidate` and updates the running best.
void append_step(BoTrace& trace, const Snapshot& snapshot, std::size_t candidate, std::optional<double> ess = {},
                 bool fallback = false);

/// Random initial design, then EI-argmax over unvisited candidates.
BoTrace run_bo(const Snapshot& snapshot, const PriorSampleSet& prior, const BoConfig& config);

}  // namespace hbo
