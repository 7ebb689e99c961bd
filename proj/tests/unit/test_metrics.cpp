#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hbo/baselines.hpp"
#include "hbo/error.hpp"
#include "hbo/metrics.hpp"
#include "oracles.hpp"

using namespace hbo;

namespace {

Snapshot make_snapshot(const std::string& id, std::vector<Point> locs, std::vector<double> pre) {
  Snapshot s;
  s.id = id;
  s.locations = std::move(locs);
  s.values_pre = std::move(pre);
  for (double v : s.values_pre) s.values_raw.push_back(std::exp(v)), s.mask.push_back(1);
  return s;
}

BoTrace make_trace(const Snapshot& s, std::vector<std::size_t> picks) {
  BoTrace t;
  t.snapshot_id = s.id;
  for (auto c : picks) append_step(t, s, c);
  return t;
}

}  // namespace

TEST_CASE("summarize_interval examples") {
  const double a[] = {1, 1, 1, 1};
  auto ia = summarize_interval(a);
  CHECK(ia.lo == 1.0);
  CHECK(ia.hi == 1.0);
  const double b[] = {0, 2};
  auto ib = summarize_interval(b);
  CHECK(std::abs(ib.lo - 0.0) < 1e-12);
  CHECK(std::abs(ib.hi - 2.0) < 1e-12);
  const double c[] = {1, 2, 3, 4, 5};
  auto ic = summarize_interval(c);
  const double sem = std::sqrt(2.5) / std::sqrt(5.0);
  CHECK(std::abs(ic.lo - (3 - sem)) < 1e-12);
  CHECK(std::abs(ic.hi - (3 + sem)) < 1e-12);
  CHECK(std::abs(ic.lo - 2.2929) < 1e-4);
  CHECK(std::abs(ic.hi - 3.7071) < 1e-4);
  const double d[] = {4.0};
  CHECK_THROWS_AS(summarize_interval(d), Error);
  CHECK(format_interval({0.9964, 0.9991}) == "0.996-0.999");
}

TEST_CASE("ratio examples") {
  auto s = make_snapshot("r", {{0, 0}, {1, 0}, {2, 0}}, {1, 2, 4});
  std::vector<Snapshot> snaps{s};
  std::vector<BoTrace> half{make_trace(s, {1})};
  CHECK(maximum_ratio_curve(half, snaps).mean[0] == 0.5);
  std::vector<BoTrace> full{make_trace(s, {0, 2, 1})};
  auto c = maximum_ratio_curve(full, snaps);
  CHECK(c.mean == std::vector<double>{0.25, 1.0, 1.0});

  auto zero = make_snapshot("z", {{0, 0}, {1, 0}}, {-1, 0});
  std::vector<Snapshot> zs{zero};
  std::vector<BoTrace> zt{make_trace(zero, {0})};
  CHECK_THROWS_AS(maximum_ratio_curve(zt, zs), Error);

  auto neg = make_snapshot("n", {{0, 0}, {1, 0}}, {-2, -1});
  std::vector<Snapshot> ns{neg};
  std::vector<BoTrace> nt{make_trace(neg, {0})};
  auto nc = maximum_ratio_curve(nt, ns);
  CHECK(nc.flagged == std::vector<std::string>{"n"});
  CHECK(nc.mean[0] == 2.0);

  std::vector<BoTrace> orphan{make_trace(s, {0})};
  orphan[0].snapshot_id = "missing";
  CHECK_THROWS_AS(maximum_ratio_curve(orphan, snaps), Error);
}

TEST_CASE("distance examples") {
  auto s = make_snapshot("d", {{0, 0}, {3, 4}, {1, 1}}, {0.5, 2.0, 1.0});
  std::vector<Snapshot> snaps{s};
  std::vector<BoTrace> t{make_trace(s, {0, 1})};
  auto c = maximiser_distance_curve(t, snaps);
  CHECK(c.mean == std::vector<double>{5.0, 0.0});

  auto s2 = make_snapshot("e", {{0, 0}, {0, 2}}, {1.0, 0.5});
  auto s3 = make_snapshot("f", {{0, 0}, {4, 0}}, {1.0, 0.5});
  std::vector<Snapshot> two{s2, s3};
  std::vector<BoTrace> tt{make_trace(s2, {1}), make_trace(s3, {1})};
  auto c2 = maximiser_distance_curve(tt, two);
  CHECK(c2.mean[0] == 3.0);
  CHECK(c2.n_snapshots == 2);
  CHECK(std::abs(c2.sem[0] - 1.0) < 1e-12);
}

TEST_CASE("exploration examples") {
  auto s = make_snapshot("x", {{0, 0}, {1, 0}, {1, 3}, {-1, 2}}, {1, 2, 3, 4});
  std::vector<BoTrace> t{make_trace(s, {0, 1})};
  auto c = exploration_curve(t);
  CHECK(c.first_iteration == 2);
  CHECK(c.mean == std::vector<double>{1.0});

  // Third sample 2 km from one earlier sample and 3 km from the other.
  auto s2 = make_snapshot("y", {{0, 0}, {5, 0}, {2, 0}}, {1, 2, 3});
  std::vector<BoTrace> t2{make_trace(s2, {0, 1, 2})};
  auto c2 = exploration_curve(t2);
  CHECK(c2.mean == std::vector<double>{5.0, 2.0});
}

TEST_CASE("runs average within a snapshot and curves truncate") {
  auto a = make_snapshot("a", {{0, 0}, {1, 0}, {2, 0}}, {1, 2, 4});
  auto b = make_snapshot("b", {{0, 0}, {1, 0}}, {2, 4});
  std::vector<Snapshot> snaps{a, b};
  std::vector<BoTrace> traces{make_trace(a, {0, 1, 2}), make_trace(a, {2, 0, 1}), make_trace(b, {0, 1})};
  auto c = maximum_ratio_curve(traces, snaps);
  REQUIRE(c.size() == 2);
  CHECK(c.per_snapshot[0].size() == 3);
  // a: runs (0.25, 1) -> 0.625 then (0.5, 1) -> 0.75; b: 0.5 then 1.
  CHECK(std::abs(c.mean[0] - (0.625 + 0.5) / 2) < 1e-12);
  CHECK(std::abs(c.mean[1] - (0.75 + 1.0) / 2) < 1e-12);
  std::ostringstream os;
  write_curve_csv(os, c);
  CHECK(os.str().rfind("iteration,mean,sem,n\n1,", 0) == 0);
}

TEST_CASE("metrics are invariant to snapshot ordering and mutually consistent") {
  std::mt19937_64 rng(8);
  std::vector<Snapshot> snaps;
  std::normal_distribution<double> normal;
  for (int i = 0; i < 6; ++i) {
    std::vector<Point> locs;
    std::vector<double> v;
    for (int j = 0; j < 30; ++j) locs.emplace_back(j % 6 * 7.0, j / 6 * 7.0), v.push_back(std::abs(normal(rng)) + 0.01);
    snaps.push_back(make_snapshot("s" + std::to_string(i), locs, v));
  }
  std::vector<BoTrace> traces;
  for (const auto& s : snaps) {
    auto runs = run_baseline(s, {BaselineKind::WithoutReplacement, 4, 13}, 30);
    traces.insert(traces.end(), runs.begin(), runs.end());
  }
  auto r1 = maximum_ratio_curve(traces, snaps);
  auto d1 = maximiser_distance_curve(traces, snaps);
  auto e1 = exploration_curve(traces);
  std::vector<BoTrace> shuffled = traces;
  std::vector<Snapshot> snaps2 = snaps;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::shuffle(snaps2.begin(), snaps2.end(), rng);
  auto r2 = maximum_ratio_curve(shuffled, snaps2);
  auto d2 = maximiser_distance_curve(shuffled, snaps2);
  auto e2 = exploration_curve(shuffled);
  // Within-snapshot run order changes the summation order, so allow 1e-12.
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(std::abs(r1.mean[i] - r2.mean[i]) < 1e-12);
    CHECK(std::abs(d1.mean[i] - d2.mean[i]) < 1e-12);
  }
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(std::abs(e1.mean[i] - e2.mean[i]) < 1e-12);

  for (const auto& t : traces) {
    const auto& s = *std::find_if(snaps.begin(), snaps.end(), [&](const Snapshot& x) { return x.id == t.snapshot_id; });
    const auto star = s.true_maximiser();
    bool hit = false;
    for (const auto& st : t.steps) {
      hit |= st.candidate == star;
      const double ratio = s.values_pre[st.best_candidate] / s.values_pre[star];
      const double dist = (s.locations[st.best_candidate] - s.locations[star]).norm();
      CHECK((ratio == 1.0) == hit);
      CHECK((dist == 0.0) == hit);
    }
    CHECK(hit);
  }
  CHECK(r1.mean.back() == 1.0);
  CHECK(d1.mean.back() == 0.0);
}

TEST_CASE("exploration falls as a dense grid fills in") {
  std::vector<Point> locs;
  std::vector<double> v;
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) locs.emplace_back(c, r), v.push_back(1.0 + 0.001 * (r * 20 + c));
  auto s = make_snapshot("dense", locs, v);
  auto traces = run_baseline(s, {BaselineKind::WithoutReplacement, 100, 13}, 200);
  auto curve = exploration_curve(traces);
  std::vector<double> iters;
  for (std::size_t i = 0; i < curve.size(); ++i) iters.push_back(static_cast<double>(i));
  const double rho = hbo::testing::spearman(iters, curve.mean);
  MESSAGE("Spearman rho of exploration against iteration: " << rho);
  CHECK(rho < 0.0);
}
