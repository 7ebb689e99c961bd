#pragma once

// Hierarchical prior over GP hyperparameters.
//
// Each amplitude/lengthscale slot k of every tuning snapshot n is modelled as
// theta[n][k] ~ Gamma(shape_k, scale_k); the direction slot is Uniform(0, pi)
// and noise is the fixed constant. The sampler is Metropolis-within-Gibbs:
//
//   for h in 1..H:
//     for n, for k:  theta[n][k] | eta(h-1), theta[n][-k]   (independence
//                    proposal from the conditional prior; likelihood ratio)
//     repeat B:      for k, for g in {shape, scale}:
//                    eta[k][g] | theta(h), eta[k][-g]       (Gaussian walk)
//     store (eta(h), theta(h))

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hbo/gp.hpp"
#include "hbo/kernels.hpp"
#include "hbo/rng.hpp"

namespace hbo {

/// Log of the gamma density in shape-scale form. Throws Error(Domain) for
/// non-positive arguments.
double gamma_logpdf(double x, double shape, double scale);

struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;

  bool operator==(const GammaParams&) const = default;
};

enum class EtaComponent { Shape, Scale };

/// Gamma parameters per slot of a KernelSpec. Entries for the direction and
/// noise slots are unused: those slots have fixed distributions.
class EtaParams {
 public:
  /// All shapes and scales set to one.
  explicit EtaParams(const KernelSpec& spec);
  EtaParams(const KernelSpec& spec, std::vector<GammaParams> params);

  KernelSpec spec() const noexcept { return KernelSpec(family_); }
  const GammaParams& operator[](std::size_t k) const noexcept { return params_[k]; }
  double get(std::size_t k, EtaComponent g) const noexcept {
    return g == EtaComponent::Shape ? params_[k].shape : params_[k].scale;
  }
  void set(std::size_t k, EtaComponent g, double value);

  bool operator==(const EtaParams&) const = default;

 private:
  KernelFamily family_;
  std::vector<GammaParams> params_;
};

/// Random-walk widths for the eta proposals.
struct ProposalWidths {
  double lengthscale_shape = 1.5;
  double lengthscale_scale = 0.5;
  double amplitude_shape = 0.3;
  double amplitude_scale = 0.1;

  double width(SlotKind kind, EtaComponent g) const noexcept;
};

/// Named generators so that adding diagnostics never shifts the chain.
struct ChainStreams {
  Rng theta_proposal;
  Rng eta_proposal;
  Rng accept;

  explicit ChainStreams(std::uint64_t seed);
};

/// Draws a slot value from its conditional prior: gamma for amplitudes and
/// lengthscales, Uniform(0, pi) for the direction.
double sample_slot_prior(const KernelSpec& spec, std::size_t k, const EtaParams& eta, Rng& rng);

ThetaVector sample_theta(const KernelSpec& spec, const EtaParams& eta, Rng& rng);

/// Metropolis acceptance decision given log(pi'/pi). One uniform is always
/// consumed from `rng`.
bool metropolis_accept(double log_ratio, Rng& rng);

/// Log-likelihood of one snapshot under a candidate theta. May throw
/// Error(Numerical); the sampler treats that as a rejected proposal.
using SnapshotLogLikelihood = std::function<double(const ThetaVector&)>;

struct ThetaMove {
  double value;
  bool accepted;
  /// Log-likelihood of the retained state.
  double log_likelihood;
  bool likelihood_failed;
};

/// One independence-sampler update of slot k; `current_loglik` is the
/// log-likelihood of `current`. The noise slot is never updated.
ThetaMove theta_update(const KernelSpec& spec, const ThetaVector& current, std::size_t k, const EtaParams& eta,
                       const SnapshotLogLikelihood& loglik, double current_loglik, ChainStreams& streams);

struct EtaMove {
  double value;
  bool accepted;
};

/// One random-walk update of eta[k][g] given slot-k values of all snapshots.
EtaMove eta_update(const KernelSpec& spec, std::size_t k, EtaComponent g, const EtaParams& current,
                   std::span<const double> theta_k, const ProposalWidths& widths, ChainStreams& streams);

struct ChainSample {
  std::size_t iteration;
  EtaParams eta;
  std::vector<ThetaVector> theta_all;
};

struct ChainConfig {
  std::size_t H = 1200;
  std::size_t burn_in = 200;
  std::size_t B = 5;
  std::uint64_t seed = 13;
  ProposalWidths widths;
};

struct AcceptanceCount {
  std::size_t proposed = 0;
  std::size_t accepted = 0;

  double rate() const noexcept {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

struct DiagnosticRow {
  std::size_t iteration;
  std::string slot;
  double acceptance_rate;
  double value;
};

struct ChainDiagnostics {
  /// Indexed by slot; direction included, noise never proposed.
  std::vector<AcceptanceCount> theta;
  /// Indexed by slot, [0] shape and [1] scale.
  std::vector<std::array<AcceptanceCount, 2>> eta;
  std::size_t likelihood_failures = 0;
  /// Cumulative acceptance rate and current value per iteration and label
  /// ("theta.<slot>" reports the mean over snapshots, "<slot>.shape" etc.).
  std::vector<DiagnosticRow> rows;
};

struct ChainResult {
  std::vector<ChainSample> samples;
  ChainDiagnostics diagnostics;
};

/// Log-likelihood of snapshot n under theta.
using ChainLogLikelihood = std::function<double(const ThetaVector&, std::size_t n)>;

/// Runs the sampler with a caller-supplied likelihood over `n_snapshots`.
ChainResult run_chain(const KernelSpec& spec, std::size_t n_snapshots, const ChainConfig& config,
                      const ChainLogLikelihood& loglik);

/// Runs the sampler with the exact GP marginal likelihood of each snapshot.
ChainResult run_chain(const KernelSpec& spec, std::span<const Observations> tuning, const ChainConfig& config);

struct PriorProvenance {
  std::size_t H = 0;
  std::size_t burn_in = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  std::string tuning_hash;
};

struct PriorSampleSet {
  KernelSpec spec{KernelFamily::RbfRbf};
  std::vector<ThetaVector> samples;
  PriorProvenance provenance;

  std::size_t size() const noexcept { return samples.size(); }
};

/// M draws: pick a post-burn-in iteration uniformly, then sample each slot
/// from its conditional prior under that iteration's eta.
PriorSampleSet draw_prior_samples(const KernelSpec& spec, std::span<const ChainSample> chain,
                                  std::size_t burn_in, std::size_t M, std::uint64_t seed);

/// Element-wise mean of the samples (direction slots averaged on the circle
/// of period pi).
ThetaVector mean_theta(const PriorSampleSet& prior);

}  // namespace hbo
