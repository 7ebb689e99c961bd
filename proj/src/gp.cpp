#include "hbo/gp.hpp"

#include <cmath>
#include <sstream>

#include "hbo/error.hpp"

namespace hbo {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

GpModel::GpModel(const KernelSpec& spec, const ThetaVector& theta, std::span<const Point> locations,
                 std::span<const double> values)
    : kernel_(spec, theta), locations_(locations.begin(), locations.end()) {
  if (locations.empty()) fail(ErrorKind::Input, "GP needs at least one observation");
  if (locations.size() != values.size()) fail(ErrorKind::Input, "locations and values differ in length");

  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd K = covariance_matrix(spec, theta, locations, /*include_noise=*/true);
  llt_.compute(K);
  if (llt_.info() != Eigen::Success) {
    bool ok = false;
    for (double j : kJitterLadder) {
      Eigen::MatrixXd Kj = K;
      Kj.diagonal().array() += j;
      llt_.compute(Kj);
      if (llt_.info() == Eigen::Success) {
        jitter_ = j;
        ok = true;
        break;
      }
    }
    if (!ok) {
      std::ostringstream os;
      os << "Cholesky factorisation failed after jitter " << kJitterLadder[2] << " on " << n
         << " observations";
      fail(ErrorKind::Numerical, os.str());
    }
  }

  const Eigen::Map<const Eigen::VectorXd> y(values.data(), n);
  alpha_ = llt_.solve(y);
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  lml_ = -0.5 * y.dot(alpha_) - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
  if (!std::isfinite(lml_)) fail(ErrorKind::Numerical, "non-finite log marginal likelihood");
}

Posterior GpModel::predict(const Point& x) const {
  const auto n = static_cast<Eigen::Index>(locations_.size());
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) k_star(i) = kernel_(locations_[i], x);
  const double mean = k_star.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  double var = kernel_.variance() - v.squaredNorm();
  if (var < 0.0) var = 0.0;
  return {mean, var};
}

void GpModel::predict(std::span<const Point> xs, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const {
  Eigen::MatrixXd k_star = cross_covariance(kernel_, locations_, xs);
  mean = k_star.transpose() * alpha_;
  llt_.matrixL().solveInPlace(k_star);
  variance = (kernel_.variance() - k_star.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
}

double log_marginal_likelihood(const KernelSpec& spec, const ThetaVector& theta,
                               std::span<const Point> locations, std::span<const double> values) {
  return GpModel(spec, theta, locations, values).log_marginal_likelihood();
}

Posterior posterior_at(const KernelSpec& spec, const ThetaVector& theta, std::span<const Point> locations,
                       std::span<const double> values, const Point& x_star) {
  return GpModel(spec, theta, locations, values).predict(x_star);
}

}  // namespace hbo
