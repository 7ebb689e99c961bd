#include "hbo/mcmc.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hbo/error.hpp"

namespace hbo {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const char* component_name(EtaComponent g) { return g == EtaComponent::Shape ? "shape" : "scale"; }

}  // namespace

double gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0) || !(shape > 0.0) || !(scale > 0.0)) {
    std::ostringstream os;
    os << "gamma_logpdf needs positive arguments (x=" << x << ", shape=" << shape << ", scale=" << scale << ")";
    fail(ErrorKind::Domain, os.str());
  }
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

EtaParams::EtaParams(const KernelSpec& spec) : family_(spec.family()), params_(spec.size()) {}

EtaParams::EtaParams(const KernelSpec& spec, std::vector<GammaParams> params)
    : family_(spec.family()), params_(std::move(params)) {
  if (params_.size() != spec.size()) fail(ErrorKind::Spec, "eta size does not match kernel layout");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (spec.is_gamma_slot(k) && !(params_[k].shape > 0.0 && params_[k].scale > 0.0))
      fail(ErrorKind::InvalidHyperparameter, "gamma shape and scale must be positive");
  }
}

void EtaParams::set(std::size_t k, EtaComponent g, double value) {
  if (!spec().is_gamma_slot(k)) fail(ErrorKind::Spec, "slot has a fixed distribution");
  if (!(value > 0.0) || !std::isfinite(value))
    fail(ErrorKind::InvalidHyperparameter, "gamma shape and scale must be positive");
  (g == EtaComponent::Shape ? params_[k].shape : params_[k].scale) = value;
}

double ProposalWidths::width(SlotKind kind, EtaComponent g) const noexcept {
  const bool shape = g == EtaComponent::Shape;
  if (kind == SlotKind::Lengthscale) return shape ? lengthscale_shape : lengthscale_scale;
  return shape ? amplitude_shape : amplitude_scale;
}

ChainStreams::ChainStreams(std::uint64_t seed)
    : theta_proposal(make_stream(seed, {stream::kThetaProposal})),
      eta_proposal(make_stream(seed, {stream::kEtaProposal})),
      accept(make_stream(seed, {stream::kAccept})) {}

double sample_slot_prior(const KernelSpec& spec, std::size_t k, const EtaParams& eta, Rng& rng) {
  switch (spec.slots()[k].kind) {
    case SlotKind::Amplitude:
    case SlotKind::Lengthscale: {
      std::gamma_distribution<double> dist(eta[k].shape, eta[k].scale);
      // Extreme eta can underflow a draw to zero; keep it strictly positive.
      double v = dist(rng);
      if (!(v > 0.0)) v = std::numeric_limits<double>::min();
      return v;
    }
    case SlotKind::Direction: {
      std::uniform_real_distribution<double> dist(0.0, kPi);
      return dist(rng);
    }
    case SlotKind::Noise: return kNoiseVariance;
  }
  return kNoiseVariance;
}

ThetaVector sample_theta(const KernelSpec& spec, const EtaParams& eta, Rng& rng) {
  std::vector<double> values(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) values[k] = sample_slot_prior(spec, k, eta, rng);
  return ThetaVector(spec, std::move(values));
}

bool metropolis_accept(double log_ratio, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return u < std::exp(log_ratio);
}

ThetaMove theta_update(const KernelSpec& spec, const ThetaVector& current, std::size_t k, const EtaParams& eta,
                       const SnapshotLogLikelihood& loglik, double current_loglik, ChainStreams& streams) {
  if (spec.slots()[k].kind == SlotKind::Noise) fail(ErrorKind::Spec, "the noise slot is never sampled");
  const double proposal = sample_slot_prior(spec, k, eta, streams.theta_proposal);
  ThetaVector candidate = current;
  candidate.set(k, proposal);

  double proposal_loglik = kNegInf;
  bool failed = false;
  try {
    proposal_loglik = loglik(candidate);
    if (std::isnan(proposal_loglik)) {
      failed = true;
      proposal_loglik = kNegInf;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Numerical) throw;
    failed = true;
  }

  double log_ratio;
  if (failed) log_ratio = kNegInf;
  else if (current_loglik == kNegInf) log_ratio = 0.0;
  else log_ratio = proposal_loglik - current_loglik;

  if (metropolis_accept(log_ratio, streams.accept)) return {proposal, true, proposal_loglik, failed};
  return {current[k], false, current_loglik, failed};
}

EtaMove eta_update(const KernelSpec& spec, std::size_t k, EtaComponent g, const EtaParams& current,
                   std::span<const double> theta_k, const ProposalWidths& widths, ChainStreams& streams) {
  if (!spec.is_gamma_slot(k)) fail(ErrorKind::Spec, "slot has a fixed distribution");
  const double old_value = current.get(k, g);
  std::normal_distribution<double> step(0.0, widths.width(spec.slots()[k].kind, g));
  const double proposal = old_value + step(streams.eta_proposal);

  double log_ratio = kNegInf;
  if (proposal > 0.0 && std::isfinite(proposal)) {
    const auto other = g == EtaComponent::Shape ? current[k].scale : current[k].shape;
    const double new_shape = g == EtaComponent::Shape ? proposal : other;
    const double new_scale = g == EtaComponent::Scale ? proposal : other;
    double sum = 0.0;
    for (double x : theta_k)
      sum += gamma_logpdf(x, new_shape, new_scale) - gamma_logpdf(x, current[k].shape, current[k].scale);
    log_ratio = sum;
  }
  if (metropolis_accept(log_ratio, streams.accept)) return {proposal, true};
  return {old_value, false};
}

ChainResult run_chain(const KernelSpec& spec, std::size_t n_snapshots, const ChainConfig& config,
                      const ChainLogLikelihood& loglik) {
  if (n_snapshots == 0) fail(ErrorKind::Input, "run_chain needs at least one tuning snapshot");
  if (config.H <= config.burn_in) fail(ErrorKind::Input, "H must exceed burn_in");
  if (config.B == 0) fail(ErrorKind::Input, "B must be at least 1");

  const std::size_t K = spec.size();
  ChainStreams streams(config.seed);
  EtaParams eta(spec);

  std::vector<ThetaVector> theta;
  theta.reserve(n_snapshots);
  for (std::size_t n = 0; n < n_snapshots; ++n) theta.push_back(sample_theta(spec, eta, streams.theta_proposal));

  ChainResult result;
  auto& diag = result.diagnostics;
  diag.theta.resize(K);
  diag.eta.resize(K);

  std::vector<double> cached(n_snapshots);
  for (std::size_t n = 0; n < n_snapshots; ++n) {
    try {
      cached[n] = loglik(theta[n], n);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      cached[n] = kNegInf;
      ++diag.likelihood_failures;
    }
  }

  result.samples.reserve(config.H);
  std::vector<double> theta_k(n_snapshots);
  for (std::size_t h = 1; h <= config.H; ++h) {
    for (std::size_t n = 0; n < n_snapshots; ++n) {
      const SnapshotLogLikelihood snapshot_loglik = [&loglik, n](const ThetaVector& t) { return loglik(t, n); };
      for (std::size_t k = 0; k < K; ++k) {
        if (spec.slots()[k].kind == SlotKind::Noise) continue;
        const auto move = theta_update(spec, theta[n], k, eta, snapshot_loglik, cached[n], streams);
        ++diag.theta[k].proposed;
        if (move.likelihood_failed) ++diag.likelihood_failures;
        if (move.accepted) {
          ++diag.theta[k].accepted;
          theta[n].set(k, move.value);
          cached[n] = move.log_likelihood;
        }
      }
    }

    for (std::size_t b = 0; b < config.B; ++b) {
      for (std::size_t k = 0; k < K; ++k) {
        if (!spec.is_gamma_slot(k)) continue;
        for (std::size_t n = 0; n < n_snapshots; ++n) theta_k[n] = theta[n][k];
        for (const auto g : {EtaComponent::Shape, EtaComponent::Scale}) {
          const auto move = eta_update(spec, k, g, eta, theta_k, config.widths, streams);
          auto& count = diag.eta[k][g == EtaComponent::Shape ? 0 : 1];
          ++count.proposed;
          if (move.accepted) {
            ++count.accepted;
            eta.set(k, g, move.value);
          }
        }
      }
    }

    result.samples.push_back(ChainSample{h, eta, theta});

    for (std::size_t k = 0; k < K; ++k) {
      const auto kind = spec.slots()[k].kind;
      if (kind == SlotKind::Noise) continue;
      double mean = 0.0;
      for (const auto& t : theta) mean += t[k];
      mean /= static_cast<double>(n_snapshots);
      const std::string slot(spec.slots()[k].name);
      diag.rows.push_back({h, "theta." + slot, diag.theta[k].rate(), mean});
      if (!spec.is_gamma_slot(k)) continue;
      for (const auto g : {EtaComponent::Shape, EtaComponent::Scale}) {
        const auto& count = diag.eta[k][g == EtaComponent::Shape ? 0 : 1];
        diag.rows.push_back({h, slot + "." + component_name(g), count.rate(), eta.get(k, g)});
      }
    }
  }
  return result;
}

ChainResult run_chain(const KernelSpec& spec, std::span<const Observations> tuning, const ChainConfig& config) {
  for (std::size_t n = 0; n < tuning.size(); ++n) {
    if (tuning[n].size() == 0) {
      std::ostringstream os;
      os << "tuning snapshot " << n << " has no observations";
      fail(ErrorKind::Input, os.str());
    }
  }
  const ChainLogLikelihood gp_loglik = [&spec, tuning](const ThetaVector& theta, std::size_t n) {
    return log_marginal_likelihood(spec, theta, tuning[n].locations, tuning[n].values);
  };
  return run_chain(spec, tuning.size(), config, gp_loglik);
}

PriorSampleSet draw_prior_samples(const KernelSpec& spec, std::span<const ChainSample> chain,
                                  std::size_t burn_in, std::size_t M, std::uint64_t seed) {
  if (M == 0) fail(ErrorKind::Input, "M must be positive");
  if (chain.size() <= burn_in) fail(ErrorKind::Input, "chain is not longer than the burn-in");

  Rng rng = make_stream(seed, {stream::kPriorDraw});
  std::uniform_int_distribution<std::size_t> pick(burn_in, chain.size() - 1);
  PriorSampleSet out;
  out.spec = spec;
  out.samples.reserve(M);
  for (std::size_t i = 0; i < M; ++i) {
    const auto& eta = chain[pick(rng)].eta;
    out.samples.push_back(sample_theta(spec, eta, rng));
  }
  out.provenance.H = chain.size();
  out.provenance.burn_in = burn_in;
  out.provenance.seed = seed;
  return out;
}

ThetaVector mean_theta(const PriorSampleSet& prior) {
  if (prior.samples.empty()) fail(ErrorKind::Input, "empty prior sample set");
  const auto& spec = prior.spec;
  std::vector<double> values(spec.size(), 0.0);
  const auto dir = spec.direction_index();
  double s2 = 0.0, c2 = 0.0;
  for (const auto& t : prior.samples) {
    for (std::size_t k = 0; k < spec.size(); ++k)
      if (spec.is_gamma_slot(k)) values[k] += t[k];
    if (dir) {
      s2 += std::sin(2.0 * t[*dir]);
      c2 += std::cos(2.0 * t[*dir]);
    }
  }
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (spec.is_gamma_slot(k)) values[k] /= static_cast<double>(prior.samples.size());
  if (dir) {
    double g = 0.5 * std::atan2(s2, c2);
    if (g < 0.0) g += kPi;
    if (g >= kPi) g -= kPi;
    values[*dir] = g;
  }
  return ThetaVector(spec, std::move(values));
}

}  // namespace hbo
