#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "hbo/acquisition.hpp"
#include "hbo/data.hpp"

namespace hbo {

enum class BaselineKind { WithReplacement, WithoutReplacement };

/// Accepts "with-replacement" / "without-replacement".
BaselineKind baseline_kind_from_name(std::string_view name);
std::string_view to_string(BaselineKind kind) noexcept;

struct BaselinePolicy {
  BaselineKind kind = BaselineKind::WithoutReplacement;
  std::size_t n_runs = 100;
  std::uint64_t seed = 13;
};

/// `n_runs` independent random traces. Run r draws from a stream keyed by
/// (seed, snapshot id, r).
std::vector<BoTrace> run_baseline(const Snapshot& snapshot, const BaselinePolicy& policy, std::size_t n_iter);

}  // namespace hbo
