#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hbo/kernels.hpp"

namespace hbo {

/// Observed locations and their pre-processed (log + standardised) values.
struct Observations {
  std::vector<Point> locations;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Jitter added to the diagonal, in turn, when the Cholesky factorisation of
/// K + noise*I fails.
inline constexpr double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

/// Zero-mean exact GP conditioned on a set of observations.
class GpModel {
 public:
  /// Throws Error(Numerical) when every rung of the jitter ladder fails.
  GpModel(const KernelSpec& spec, const ThetaVector& theta, std::span<const Point> locations,
          std::span<const double> values);

  double log_marginal_likelihood() const noexcept { return lml_; }
  Posterior predict(const Point& x) const;
  /// Predicts at many points; returns (mean, variance) columns.
  void predict(std::span<const Point> xs, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

  double jitter() const noexcept { return jitter_; }
  const KernelEvaluator& kernel() const noexcept { return kernel_; }

 private:
  KernelEvaluator kernel_;
  std::vector<Point> locations_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
  double jitter_ = 0.0;
};

double log_marginal_likelihood(const KernelSpec& spec, const ThetaVector& theta,
                               std::span<const Point> locations, std::span<const double> values);

Posterior posterior_at(const KernelSpec& spec, const ThetaVector& theta, std::span<const Point> locations,
                       std::span<const double> values, const Point& x_star);

}  // namespace hbo
