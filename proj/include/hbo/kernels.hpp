#pragma once

// Base and composite covariance functions over 2-D displacements in km.
//
//   rbf:       s^2 exp(-t't / l^2)
//   directed:  s^2 exp(-t'At / l^2),  A = [sin^2 g, -sin g cos g; -sin g cos g, cos^2 g]
//
// The directed form only sees the displacement component orthogonal to the
// direction (cos g, sin g), since t'At = (t_x sin g - t_y cos g)^2.
//
// Composite families:
//   RbfRbf      rbf(s_r1, l_r1) + rbf(s_r2, l_r2)
//   RbfProduct  rbf(s_r1, l_r1) + rbf(s_r2, l_r2) * directed(1, l_w3, g)
//   Sum         rbf(s_r1, l_r1) + directed(s_w2, l_w2, g)

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hbo {

using Point = Eigen::Vector2d;

inline constexpr double kNoiseVariance = 1e-6;
inline constexpr double kPi = 3.14159265358979323846;

enum class KernelFamily { RbfRbf, Sum, RbfProduct };

enum class SlotKind { Amplitude, Lengthscale, Direction, Noise };

struct Slot {
  std::string_view name;
  SlotKind kind;
};

/// Names a composite family and its ordered hyperparameter layout.
class KernelSpec {
 public:
  explicit KernelSpec(KernelFamily family);

  /// Accepts "RbfRbf", "Sum", "RbfProduct" and the dashed/lower-case forms
  /// ("rbf-rbf", "sum", "rbf-product").
  static KernelSpec from_name(std::string_view name);

  KernelFamily family() const noexcept { return family_; }
  std::string_view name() const noexcept;
  std::span<const Slot> slots() const noexcept { return slots_; }
  std::size_t size() const noexcept { return slots_.size(); }

  std::size_t index_of(std::string_view slot_name) const;
  std::optional<std::size_t> direction_index() const noexcept;
  std::size_t noise_index() const noexcept { return slots_.size() - 1; }

  /// True for amplitude and lengthscale slots, the ones with a gamma prior.
  bool is_gamma_slot(std::size_t k) const noexcept;

  bool operator==(const KernelSpec& other) const noexcept { return family_ == other.family_; }

 private:
  KernelFamily family_;
  std::span<const Slot> slots_;
};

/// Hyperparameter values laid out per a KernelSpec. Noise is always the
/// clamped constant kNoiseVariance.
class ThetaVector {
 public:
  /// `values` must hold one entry per slot; the noise entry is overwritten
  /// with kNoiseVariance.
  ThetaVector(const KernelSpec& spec, std::vector<double> values);

  /// Missing noise defaults to kNoiseVariance; any other missing or unknown
  /// name is a spec error.
  static ThetaVector from_named(const KernelSpec& spec, const std::map<std::string, double>& named);

  KernelSpec spec() const noexcept { return KernelSpec(family_); }
  KernelFamily family() const noexcept { return family_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double at(std::string_view slot_name) const;
  double noise_variance() const noexcept { return values_.back(); }

  /// Validates the new value for the slot kind. Setting noise is rejected.
  void set(std::size_t k, double value);

  std::map<std::string, double> named() const;

  bool operator==(const ThetaVector& other) const = default;

 private:
  KernelFamily family_;
  std::vector<double> values_;
};

/// Checks one value against its slot kind.
bool slot_value_valid(SlotKind kind, double value) noexcept;

double rbf_eval(const Point& tau, double sigma, double lengthscale);
double directed_eval(const Point& tau, double sigma, double lengthscale, double gamma);
double composite_eval(const KernelSpec& spec, const ThetaVector& theta, const Point& tau);

/// Precomputed form of a composite kernel for tight loops.
class KernelEvaluator {
 public:
  KernelEvaluator(const KernelSpec& spec, const ThetaVector& theta);

  double operator()(double dx, double dy) const noexcept;
  double operator()(const Point& a, const Point& b) const noexcept {
    return (*this)(a.x() - b.x(), a.y() - b.y());
  }
  double variance() const noexcept { return var1_ + var2_; }
  double noise() const noexcept { return noise_; }

 private:
  KernelFamily family_;
  double var1_ = 0, inv_l1_sq_ = 0;
  double var2_ = 0, inv_l2_sq_ = 0;
  double inv_lw_sq_ = 0, sin_g_ = 0, cos_g_ = 0;
  double noise_ = kNoiseVariance;
};

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const ThetaVector& theta,
                                  std::span<const Point> points, bool include_noise);

/// Cross-covariance between two point sets (rows: `a`, cols: `b`).
Eigen::MatrixXd cross_covariance(const KernelEvaluator& kernel, std::span<const Point> a,
                                 std::span<const Point> b);

struct Correlation {
  double along_x;
  /// Only for directed families: correlation at distance d orthogonal to the
  /// reference direction.
  std::optional<double> orthogonal;
};

Correlation correlation_at_distance(const KernelSpec& spec, const ThetaVector& theta, double d_km);

}  // namespace hbo
