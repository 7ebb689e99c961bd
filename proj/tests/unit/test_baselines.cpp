#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "hbo/baselines.hpp"
#include "hbo/error.hpp"
#include "hbo/metrics.hpp"

using namespace hbo;

namespace {

Snapshot line_snapshot(const std::string& id, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  Snapshot s;
  s.id = id;
  for (std::size_t i = 0; i < k; ++i) {
    s.locations.emplace_back(static_cast<double>(i) * 7.0, 0.0);
    const double v = u(rng);
    s.values_pre.push_back(v);
    s.values_raw.push_back(std::exp(v));
    s.mask.push_back(1);
  }
  return s;
}

}  // namespace

TEST_CASE("kind names") {
  CHECK(baseline_kind_from_name("with-replacement") == BaselineKind::WithReplacement);
  CHECK(baseline_kind_from_name("without-replacement") == BaselineKind::WithoutReplacement);
  CHECK(to_string(BaselineKind::WithReplacement) == "with-replacement");
  CHECK_THROWS_AS(baseline_kind_from_name("uniform"), Error);
  CHECK(BaselinePolicy{}.n_runs == 100);
}

TEST_CASE("single candidate") {
  auto s = line_snapshot("one", 1, 1);
  auto traces = run_baseline(s, {BaselineKind::WithoutReplacement, 3, 13}, 1);
  REQUIRE(traces.size() == 3);
  std::vector<Snapshot> snaps{s};
  auto ratio = maximum_ratio_curve(traces, snaps);
  CHECK(ratio.mean == std::vector<double>{1.0});
}

TEST_CASE("exhaustive coverage ends at ratio 1") {
  auto s = line_snapshot("full", 25, 2);
  auto traces = run_baseline(s, {BaselineKind::WithoutReplacement, 50, 13}, 25);
  std::vector<Snapshot> snaps{s};
  for (const auto& t : traces) {
    std::set<std::size_t> seen;
    for (const auto& st : t.steps) CHECK(seen.insert(st.candidate).second);
    CHECK(seen.size() == 25);
    CHECK(t.steps.back().best_candidate == s.true_maximiser());
  }
  CHECK(maximum_ratio_curve(traces, snaps).mean.back() == 1.0);
  CHECK_THROWS_AS(run_baseline(s, {BaselineKind::WithoutReplacement, 1, 13}, 26), Error);
  CHECK_NOTHROW(run_baseline(s, {BaselineKind::WithReplacement, 1, 13}, 26));
  CHECK_THROWS_AS(run_baseline(s, {BaselineKind::WithReplacement, 0, 13}, 5), Error);
}

TEST_CASE("with-replacement first hit follows the geometric law") {
  const std::size_t k = 10;
  auto s = line_snapshot("geo", k, 3);
  const auto target = s.true_maximiser();
  auto traces = run_baseline(s, {BaselineKind::WithReplacement, 10000, 13}, 300);
  double total = 0.0;
  bool repeated = false;
  for (const auto& t : traces) {
    std::size_t first = 0;
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      if (!seen.insert(t.steps[i].candidate).second) repeated = true;
      if (first == 0 && t.steps[i].candidate == target) first = i + 1;
    }
    REQUIRE(first > 0);
    total += static_cast<double>(first);
  }
  const double mean_first = total / 10000.0;
  MESSAGE("mean first-hit iteration " << mean_first << " for k=" << k);
  CHECK(std::abs(mean_first - static_cast<double>(k)) <= 0.1 * static_cast<double>(k));
  CHECK(repeated);
}

TEST_CASE("runs are keyed by run index and snapshot") {
  auto s = line_snapshot("keyed", 40, 4);
  auto few = run_baseline(s, {BaselineKind::WithoutReplacement, 3, 13}, 10);
  auto many = run_baseline(s, {BaselineKind::WithoutReplacement, 8, 13}, 10);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t i = 0; i < 10; ++i) CHECK(few[r].steps[i].candidate == many[r].steps[i].candidate);
  auto other = line_snapshot("keyed2", 40, 4);
  auto t2 = run_baseline(other, {BaselineKind::WithoutReplacement, 1, 13}, 10);
  bool differs = false;
  for (std::size_t i = 0; i < 10; ++i) differs |= t2[0].steps[i].candidate != few[0].steps[i].candidate;
  CHECK(differs);
}

TEST_CASE("without replacement beats with replacement near full coverage") {
  for (int rep = 0; rep < 5; ++rep) {
    auto s = line_snapshot("cmp" + std::to_string(rep), 30, 10 + rep);
    std::vector<Snapshot> snaps{s};
    auto wo = run_baseline(s, {BaselineKind::WithoutReplacement, 100, 13}, 28);
    auto wr = run_baseline(s, {BaselineKind::WithReplacement, 100, 13}, 28);
    auto a = maximum_ratio_curve(wo, snaps), b = maximum_ratio_curve(wr, snaps);
    // One-sided comparison of final-iteration means across the 100 runs.
    auto finals = [&](const std::vector<BoTrace>& ts) {
      std::vector<double> v;
      for (const auto& t : ts) v.push_back(s.values_pre[t.steps.back().best_candidate] / s.values_pre[s.true_maximiser()]);
      return v;
    };
    auto fa = finals(wo), fb = finals(wr);
    auto ia = summarize_interval(fa), ib = summarize_interval(fb);
    const double diff = a.mean.back() - b.mean.back();
    const double se = std::hypot((ia.hi - ia.lo) / 2, (ib.hi - ib.lo) / 2);
    CHECK(diff > -1.645 * se);
  }
}
