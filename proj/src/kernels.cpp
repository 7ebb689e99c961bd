#include "hbo/kernels.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

#include "hbo/error.hpp"

namespace hbo {
namespace {

constexpr std::array<Slot, 5> kRbfRbfSlots{{
    {"sigma_r1", SlotKind::Amplitude},
    {"l_r1", SlotKind::Lengthscale},
    {"sigma_r2", SlotKind::Amplitude},
    {"l_r2", SlotKind::Lengthscale},
    {"noise", SlotKind::Noise},
}};

constexpr std::array<Slot, 6> kSumSlots{{
    {"sigma_r1", SlotKind::Amplitude},
    {"l_r1", SlotKind::Lengthscale},
    {"sigma_w2", SlotKind::Amplitude},
    {"l_w2", SlotKind::Lengthscale},
    {"gamma", SlotKind::Direction},
    {"noise", SlotKind::Noise},
}};

// The directed factor's amplitude is fixed at 1; the product's scale is
// carried by sigma_r2 alone.
constexpr std::array<Slot, 7> kRbfProductSlots{{
    {"sigma_r1", SlotKind::Amplitude},
    {"l_r1", SlotKind::Lengthscale},
    {"sigma_r2", SlotKind::Amplitude},
    {"l_r2", SlotKind::Lengthscale},
    {"l_w3", SlotKind::Lengthscale},
    {"gamma", SlotKind::Direction},
    {"noise", SlotKind::Noise},
}};

void check_positive(double sigma, double lengthscale) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    std::ostringstream os;
    os << "sigma and lengthscale must be positive and finite (sigma=" << sigma
       << ", l=" << lengthscale << ")";
    fail(ErrorKind::InvalidHyperparameter, os.str());
  }
}

double directed_quadratic(double dx, double dy, double sin_g, double cos_g) {
  const double r = dx * sin_g - dy * cos_g;
  return r * r;
}

std::string normalise_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

KernelSpec::KernelSpec(KernelFamily family) : family_(family) {
  switch (family) {
    case KernelFamily::RbfRbf: slots_ = kRbfRbfSlots; break;
    case KernelFamily::Sum: slots_ = kSumSlots; break;
    case KernelFamily::RbfProduct: slots_ = kRbfProductSlots; break;
  }
}

KernelSpec KernelSpec::from_name(std::string_view name) {
  const auto n = normalise_name(name);
  if (n == "rbfrbf") return KernelSpec(KernelFamily::RbfRbf);
  if (n == "sum") return KernelSpec(KernelFamily::Sum);
  if (n == "rbfproduct") return KernelSpec(KernelFamily::RbfProduct);
  fail(ErrorKind::Spec, "unknown kernel family '" + std::string(name) + "'");
}

std::string_view KernelSpec::name() const noexcept {
  switch (family_) {
    case KernelFamily::RbfRbf: return "RbfRbf";
    case KernelFamily::Sum: return "Sum";
    case KernelFamily::RbfProduct: return "RbfProduct";
  }
  return "?";
}

std::size_t KernelSpec::index_of(std::string_view slot_name) const {
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (slots_[k].name == slot_name) return k;
  fail(ErrorKind::Spec, "kernel " + std::string(name()) + " has no slot '" + std::string(slot_name) + "'");
}

std::optional<std::size_t> KernelSpec::direction_index() const noexcept {
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (slots_[k].kind == SlotKind::Direction) return k;
  return std::nullopt;
}

bool KernelSpec::is_gamma_slot(std::size_t k) const noexcept {
  const auto kind = slots_[k].kind;
  return kind == SlotKind::Amplitude || kind == SlotKind::Lengthscale;
}

bool slot_value_valid(SlotKind kind, double value) noexcept {
  switch (kind) {
    case SlotKind::Amplitude:
    case SlotKind::Lengthscale: return std::isfinite(value) && value > 0.0;
    case SlotKind::Direction: return value >= 0.0 && value < kPi;
    case SlotKind::Noise: return value == kNoiseVariance;
  }
  return false;
}

ThetaVector::ThetaVector(const KernelSpec& spec, std::vector<double> values)
    : family_(spec.family()), values_(std::move(values)) {
  if (values_.size() != spec.size()) {
    std::ostringstream os;
    os << "kernel " << spec.name() << " expects " << spec.size() << " hyperparameters, got "
       << values_.size();
    fail(ErrorKind::Spec, os.str());
  }
  values_.back() = kNoiseVariance;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!slot_value_valid(spec.slots()[k].kind, values_[k])) {
      std::ostringstream os;
      os << "invalid value " << values_[k] << " for slot " << spec.slots()[k].name;
      fail(ErrorKind::InvalidHyperparameter, os.str());
    }
  }
}

ThetaVector ThetaVector::from_named(const KernelSpec& spec, const std::map<std::string, double>& named) {
  std::vector<double> values(spec.size(), kNoiseVariance);
  for (const auto& [name, value] : named) {
    const auto k = spec.index_of(name);
    if (spec.slots()[k].kind == SlotKind::Noise && value != kNoiseVariance)
      fail(ErrorKind::InvalidHyperparameter, "noise variance is fixed at 1e-06");
    values[k] = value;
  }
  for (std::size_t k = 0; k + 1 < spec.size(); ++k) {
    if (!named.contains(std::string(spec.slots()[k].name)))
      fail(ErrorKind::Spec, "missing slot '" + std::string(spec.slots()[k].name) + "' for kernel " +
                                std::string(spec.name()));
  }
  return ThetaVector(spec, std::move(values));
}

double ThetaVector::at(std::string_view slot_name) const { return values_[spec().index_of(slot_name)]; }

void ThetaVector::set(std::size_t k, double value) {
  const auto spec_ = spec();
  if (k >= values_.size()) fail(ErrorKind::Spec, "slot index out of range");
  const auto kind = spec_.slots()[k].kind;
  if (kind == SlotKind::Noise) fail(ErrorKind::InvalidHyperparameter, "noise variance is not settable");
  if (!slot_value_valid(kind, value)) {
    std::ostringstream os;
    os << "invalid value " << value << " for slot " << spec_.slots()[k].name;
    fail(ErrorKind::InvalidHyperparameter, os.str());
  }
  values_[k] = value;
}

std::map<std::string, double> ThetaVector::named() const {
  std::map<std::string, double> out;
  const auto s = spec();
  for (std::size_t k = 0; k < values_.size(); ++k) out.emplace(std::string(s.slots()[k].name), values_[k]);
  return out;
}

double rbf_eval(const Point& tau, double sigma, double lengthscale) {
  check_positive(sigma, lengthscale);
  return sigma * sigma * std::exp(-tau.squaredNorm() / (lengthscale * lengthscale));
}

double directed_eval(const Point& tau, double sigma, double lengthscale, double gamma) {
  check_positive(sigma, lengthscale);
  if (!(gamma >= 0.0 && gamma < kPi))
    fail(ErrorKind::InvalidHyperparameter, "direction must lie in [0, pi)");
  const double q = directed_quadratic(tau.x(), tau.y(), std::sin(gamma), std::cos(gamma));
  return sigma * sigma * std::exp(-q / (lengthscale * lengthscale));
}

double composite_eval(const KernelSpec& spec, const ThetaVector& theta, const Point& tau) {
  if (theta.family() != spec.family())
    fail(ErrorKind::Spec, "theta laid out for " + std::string(theta.spec().name()) + ", not " +
                              std::string(spec.name()));
  return KernelEvaluator(spec, theta)(tau.x(), tau.y());
}

KernelEvaluator::KernelEvaluator(const KernelSpec& spec, const ThetaVector& theta)
    : family_(spec.family()), noise_(theta.noise_variance()) {
  if (theta.family() != spec.family())
    fail(ErrorKind::Spec, "theta laid out for " + std::string(theta.spec().name()) + ", not " +
                              std::string(spec.name()));
  auto sq = [](double v) { return v * v; };
  var1_ = sq(theta[0]);
  inv_l1_sq_ = 1.0 / sq(theta[1]);
  var2_ = sq(theta[2]);
  inv_l2_sq_ = 1.0 / sq(theta[3]);
  if (spec.family() == KernelFamily::RbfProduct) inv_lw_sq_ = 1.0 / sq(theta[4]);
  if (const auto g = spec.direction_index()) {
    sin_g_ = std::sin(theta[*g]);
    cos_g_ = std::cos(theta[*g]);
  }
}

double KernelEvaluator::operator()(double dx, double dy) const noexcept {
  const double r2 = dx * dx + dy * dy;
  const double first = var1_ * std::exp(-r2 * inv_l1_sq_);
  switch (family_) {
    case KernelFamily::RbfRbf: return first + var2_ * std::exp(-r2 * inv_l2_sq_);
    case KernelFamily::Sum:
      return first + var2_ * std::exp(-directed_quadratic(dx, dy, sin_g_, cos_g_) * inv_l2_sq_);
    case KernelFamily::RbfProduct:
      return first + var2_ * std::exp(-r2 * inv_l2_sq_ -
                                      directed_quadratic(dx, dy, sin_g_, cos_g_) * inv_lw_sq_);
  }
  return first;
}

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const ThetaVector& theta,
                                  std::span<const Point> points, bool include_noise) {
  const KernelEvaluator kernel(spec, theta);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a <= b; ++a) {
      const double v = kernel(points[a], points[b]);
      K(a, b) = v;
      K(b, a) = v;
    }
    if (include_noise) K(b, b) += kernel.noise();
  }
  return K;
}

Eigen::MatrixXd cross_covariance(const KernelEvaluator& kernel, std::span<const Point> a,
                                 std::span<const Point> b) {
  Eigen::MatrixXd K(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t i = 0; i < a.size(); ++i) K(i, j) = kernel(a[i], b[j]);
  return K;
}

Correlation correlation_at_distance(const KernelSpec& spec, const ThetaVector& theta, double d_km) {
  if (!(d_km >= 0.0)) fail(ErrorKind::Input, "distance must be non-negative");
  const KernelEvaluator kernel(spec, theta);
  const double zero = kernel(0.0, 0.0);
  Correlation c{kernel(d_km, 0.0) / zero, std::nullopt};
  if (const auto g = spec.direction_index()) {
    const double gamma = theta[*g];
    c.orthogonal = kernel(-d_km * std::sin(gamma), d_km * std::cos(gamma)) / zero;
  }
  return c;
}

}  // namespace hbo
