#include "hbo/baselines.hpp"

#include <sstream>

#include "hbo/error.hpp"
#include "hbo/rng.hpp"

namespace hbo {

BaselineKind baseline_kind_from_name(std::string_view name) {
  if (name == "with-replacement") return BaselineKind::WithReplacement;
  if (name == "without-replacement") return BaselineKind::WithoutReplacement;
  fail(ErrorKind::Input, "unknown baseline kind '" + std::string(name) +
                             "' (expected with-replacement or without-replacement)");
}

std::string_view to_string(BaselineKind kind) noexcept {
  return kind == BaselineKind::WithReplacement ? "with-replacement" : "without-replacement";
}

std::vector<BoTrace> run_baseline(const Snapshot& snapshot, const BaselinePolicy& policy, std::size_t n_iter) {
  if (policy.n_runs < 1) fail(ErrorKind::Input, "n_runs must be at least 1");
  if (!snapshot.preprocessed()) fail(ErrorKind::Input, "snapshot " + snapshot.id + " is not pre-processed");
  const auto candidates = snapshot.candidates();
  if (candidates.empty()) fail(ErrorKind::Input, "snapshot " + snapshot.id + " has no candidates");
  if (policy.kind == BaselineKind::WithoutReplacement && n_iter > candidates.size()) {
    std::ostringstream os;
    os << "n_iter=" << n_iter << " exceeds the " << candidates.size() << " candidates of snapshot " << snapshot.id;
    fail(ErrorKind::Input, os.str());
  }

  std::vector<BoTrace> traces;
  traces.reserve(policy.n_runs);
  const auto id_key = fnv1a(snapshot.id);
  for (std::size_t r = 0; r < policy.n_runs; ++r) {
    Rng rng = make_stream(policy.seed, {stream::kBaseline, id_key, r});
    BoTrace trace;
    trace.snapshot_id = snapshot.id;
    auto pool = candidates;
    for (std::size_t i = 0; i < n_iter; ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const auto j = pick(rng);
      append_step(trace, snapshot, pool[j]);
      if (policy.kind == BaselineKind::WithoutReplacement) pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace hbo
