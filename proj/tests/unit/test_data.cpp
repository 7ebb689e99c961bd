#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hbo/data.hpp"
#include "hbo/error.hpp"

using namespace hbo;

namespace {

std::string grid_csv(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& missing,
                     const std::string& id = "img") {
  std::ostringstream os;
  os << "snapshot_id,row,col,value\n";
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      os << id << ',' << r << ',' << c << ',';
      if (std::find(missing.begin(), missing.end(), std::make_pair(r, c)) == missing.end()) os << 1.0 + r + 0.01 * c;
      os << '\n';
    }
  return os.str();
}

std::vector<std::pair<std::size_t, std::size_t>> first_cells(std::size_t n, std::size_t count) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(i / n, i % n);
  return out;
}

void add_station_rows(std::ostream& os, const std::string& date, const std::string& cls, int count, int offset) {
  for (int i = 0; i < count; ++i)
    os << date << ",ST" << (offset + i) << ',' << 51.3 + 0.001 * (offset + i) << ',' << -0.5 + 0.002 * (offset + i)
       << ',' << cls << ',' << 10 + i << '\n';
}

constexpr const char* kStationHeader = "date,station_id,lat,lon,classification,value\n";

}  // namespace

TEST_CASE("2x2 grid with 7 km cells") {
  std::istringstream in(grid_csv(2, {}));
  auto snaps = read_grid_csv(in, 7.0);
  REQUIRE(snaps.size() == 1);
  const auto& s = snaps[0];
  CHECK(s.candidates().size() == 4);
  std::vector<Point> expect{{0, 0}, {7, 0}, {0, 7}, {7, 7}};
  CHECK(s.locations == expect);
}

TEST_CASE("10 percent missing threshold on 28x28") {
  {
    std::istringstream in(grid_csv(28, first_cells(28, 79)));
    CHECK(read_grid_csv(in).empty());
  }
  {
    std::istringstream in(grid_csv(28, first_cells(28, 78)));
    auto snaps = read_grid_csv(in);
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].candidates().size() == 706);
  }
}

TEST_CASE("grid errors") {
  {
    std::istringstream in("snapshot_id,row,col,value\na,0,0,1\na,0,x,1\n");
    try {
      read_grid_csv(in, 7.0, "g.csv");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("g.csv:3") != std::string::npos);
    }
  }
  {
    std::istringstream in("snapshot_id,row,col,value\na,0,0,1\na,0,0,2\n");
    try {
      read_grid_csv(in);
      FAIL("expected an input error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Input);
    }
  }
  CHECK_THROWS_AS(load_grid_csv("/nonexistent/grid.csv"), Error);
}

TEST_CASE("grid ingestion is order independent") {
  std::string csv = grid_csv(5, {{1, 1}}, "a") + grid_csv(5, {}, "b").substr(26);
  std::istringstream in1(csv);
  auto a = read_grid_csv(in1);
  std::vector<std::string> lines;
  std::istringstream split(csv);
  std::string header, line;
  std::getline(split, header);
  while (std::getline(split, line)) lines.push_back(line);
  std::mt19937_64 rng(1);
  std::shuffle(lines.begin(), lines.end(), rng);
  std::string shuffled = header + "\n";
  for (const auto& l : lines) shuffled += l + "\n";
  std::istringstream in2(shuffled);
  auto b = read_grid_csv(in2);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].locations == b[i].locations);
    CHECK(a[i].mask == b[i].mask);
    for (std::size_t j = 0; j < a[i].size(); ++j)
      CHECK((a[i].values_raw[j] == b[i].values_raw[j] ||
             (std::isnan(a[i].values_raw[j]) && std::isnan(b[i].values_raw[j]))));
  }
}

TEST_CASE("station filters") {
  std::ostringstream os;
  os << kStationHeader;
  add_station_rows(os, "2019-01-01", "Roadside", 39, 0);
  add_station_rows(os, "2019-01-02", "Roadside", 40, 0);
  add_station_rows(os, "2019-01-02", "Background", 100, 100);
  std::istringstream in(os.str());
  auto snaps = read_station_csv(in);
  REQUIRE(snaps.size() == 1);
  CHECK(snaps[0].id == "2019-01-02");
  CHECK(snaps[0].candidates().size() == 40);
}

TEST_CASE("station duplicates are averaged") {
  std::ostringstream os;
  os << kStationHeader;
  os << "2019-03-01,A,51.5,-0.1,Roadside,10\n";
  os << "2019-03-01,A,51.5,-0.1,Roadside,20\n";
  os << "2019-03-01,B,51.6,-0.2,Roadside,5\n";
  std::istringstream in(os.str());
  auto snaps = read_station_csv(in, {2, "Roadside"});
  REQUIRE(snaps.size() == 1);
  REQUIRE(snaps[0].size() == 2);
  CHECK(snaps[0].values_raw[0] == 15.0);
  // SW corner is (51.5, -0.2).
  CHECK(snaps[0].locations[0].y() == 0.0);
  CHECK(snaps[0].locations[1].x() == 0.0);
}

TEST_CASE("station parse errors") {
  std::istringstream bad_date(std::string(kStationHeader) + "2019-13-45,A,51.5,-0.1,Roadside,10\n");
  CHECK_THROWS_AS(read_station_csv(bad_date), Error);
  std::istringstream bad_coord(std::string(kStationHeader) + "2019-01-01,A,north,-0.1,Roadside,10\n");
  CHECK_THROWS_AS(read_station_csv(bad_coord), Error);
}

TEST_CASE("station ingestion is order independent") {
  std::ostringstream os;
  add_station_rows(os, "2019-01-05", "Roadside", 45, 0);
  add_station_rows(os, "2019-01-05", "Roadside", 10, 0);
  add_station_rows(os, "2019-01-06", "Roadside", 41, 3);
  std::vector<std::string> lines;
  std::istringstream split(os.str());
  std::string line;
  while (std::getline(split, line)) lines.push_back(line);
  auto load = [&](const std::vector<std::string>& ls) {
    std::string csv = kStationHeader;
    for (const auto& l : ls) csv += l + "\n";
    std::istringstream in(csv);
    return read_station_csv(in);
  };
  auto a = load(lines);
  std::mt19937_64 rng(2);
  std::shuffle(lines.begin(), lines.end(), rng);
  auto b = load(lines);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].locations == b[i].locations);
    for (std::size_t j = 0; j < a[i].size(); ++j) CHECK(std::abs(a[i].values_raw[j] - b[i].values_raw[j]) < 1e-12);
  }
}

TEST_CASE("equirectangular projection") {
  const double arc = kEarthRadiusKm * kPi / 180.0;
  LatLon ref{10.0, 20.0};
  std::vector<LatLon> pts{{10.0, 20.0}, {11.0, 20.0}};
  auto p = project_latlon(ref, pts);
  CHECK(p[0] == Point(0, 0));
  CHECK(std::abs(p[1].x()) < 1e-12);
  CHECK(std::abs(p[1].y() - arc) < 1e-9);
  CHECK(std::abs(p[1].y() - 111.19) < 0.005);
  LatLon ref60{60.0, 0.0};
  std::vector<LatLon> east{{60.0, 1.0}};
  auto q = project_latlon(ref60, east);
  CHECK(std::abs(q[0].x() - 0.5 * arc) < 1e-9);
  CHECK(std::abs(q[0].x() - 55.60) < 0.005);
  CHECK(std::abs(q[0].y()) < 1e-12);
  std::vector<LatLon> bad{{95.0, 0.0}};
  CHECK_THROWS_AS(project_latlon(ref, bad), Error);
}

namespace {

Snapshot raw_snapshot(const std::string& id, std::vector<double> raw) {
  Snapshot s;
  s.id = id;
  for (std::size_t i = 0; i < raw.size(); ++i) s.locations.emplace_back(static_cast<double>(i), 0.0);
  s.values_raw = std::move(raw);
  s.mask.assign(s.values_raw.size(), 1);
  return s;
}

}  // namespace

TEST_CASE("preprocess examples") {
  const double e = std::exp(1.0);
  Dataset ds;
  ds.tuning.push_back(raw_snapshot("t", {e, e * e * e}));
  ds.test.push_back(raw_snapshot("x", {e * e}));
  preprocess(ds);
  REQUIRE(ds.stats.has_value());
  CHECK(std::abs(ds.stats->log_mean - 2.0) < 1e-12);
  CHECK(std::abs(ds.stats->log_sd - std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(ds.tuning[0].values_pre[0] + 0.7071) < 1e-4);
  CHECK(std::abs(ds.tuning[0].values_pre[1] - 0.7071) < 1e-4);
  CHECK(std::abs(ds.test[0].values_pre[0]) < 1e-12);
  CHECK_THROWS_AS(preprocess(ds), Error);
}

TEST_CASE("preprocess errors") {
  Dataset neg;
  neg.tuning.push_back(raw_snapshot("bad", {1.0, -2.0}));
  try {
    preprocess(neg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
  Dataset flat;
  flat.tuning.push_back(raw_snapshot("flat", {3.0, 3.0, 3.0}));
  try {
    preprocess(flat);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("test snapshots never leak into the statistics") {
  Dataset with_test, without;
  with_test.tuning.push_back(raw_snapshot("t1", {1.5, 2.5, 7.0}));
  with_test.tuning.push_back(raw_snapshot("t2", {0.4, 9.0}));
  without.tuning = with_test.tuning;
  with_test.test.push_back(raw_snapshot("x", {1000.0, 0.001}));
  preprocess(with_test);
  preprocess(without);
  CHECK(with_test.stats->log_mean == without.stats->log_mean);
  CHECK(with_test.stats->log_sd == without.stats->log_sd);
}

TEST_CASE("masked cells are skipped") {
  Dataset ds;
  auto s = raw_snapshot("m", {1.0, std::nan(""), 4.0});
  s.mask[1] = 0;
  ds.tuning.push_back(s);
  preprocess(ds);
  CHECK(std::isnan(ds.tuning[0].values_pre[1]));
  CHECK(ds.tuning[0].candidates() == std::vector<std::size_t>{0, 2});
  CHECK(ds.tuning[0].true_maximiser() == 2);
}

TEST_CASE("synthetic generation") {
  KernelSpec spec(KernelFamily::RbfRbf);
  SyntheticConfig cfg;
  cfg.grid_size = 8;
  cfg.n_snapshots = 3;
  {
    ThetaVector tiny(spec, {1e-3, 14, 1e-3, 56, 0});
    for (const auto& s : generate_synthetic(spec, tiny, cfg)) {
      const auto [lo, hi] = std::minmax_element(s.values_raw.begin(), s.values_raw.end());
      CHECK((*hi - *lo) / *lo < 0.01);
    }
  }
  ThetaVector t(spec, {1, 14, 1, 56, 0});
  auto a = generate_synthetic(spec, t, cfg);
  auto b = generate_synthetic(spec, t, cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].values_raw == b[i].values_raw);
    for (double v : a[i].values_raw) CHECK(v > 0.0);
  }
  CHECK(a[0].id == "syn0");
  cfg.n_snapshots = 12;
  CHECK(generate_synthetic(spec, t, cfg)[3].id == "syn03");
  cfg.grid_size = 65;
  CHECK_THROWS_AS(generate_synthetic(spec, t, cfg), Error);
}

TEST_CASE("synthetic fields have the kernel covariance") {
  KernelSpec spec(KernelFamily::RbfRbf);
  ThetaVector t(spec, {1, 14, 0.7, 56, 0});
  SyntheticConfig cfg;
  cfg.grid_size = 6;
  cfg.n_snapshots = 10000;
  cfg.seed = 5;
  auto snaps = generate_synthetic(spec, t, cfg);
  const std::size_t i = 7, j = 8;  // horizontal neighbours, 7 km apart
  double sii = 0, sij = 0, mi = 0, mj = 0;
  for (const auto& s : snaps) mi += std::log(s.values_raw[i]), mj += std::log(s.values_raw[j]);
  mi /= 10000.0;
  mj /= 10000.0;
  for (const auto& s : snaps) {
    const double a = std::log(s.values_raw[i]) - mi, b = std::log(s.values_raw[j]) - mj;
    sii += a * a;
    sij += a * b;
  }
  sii /= 9999.0;
  sij /= 9999.0;
  const double kii = composite_eval(spec, t, {0, 0});
  const double kij = composite_eval(spec, t, snaps[0].locations[i] - snaps[0].locations[j]);
  MESSAGE("empirical var " << sii << " vs " << kii << ", cov " << sij << " vs " << kij);
  CHECK(std::abs(sii - kii) <= 0.05 * kii);
  CHECK(std::abs(sij - kij) <= 0.05 * kij);
}

TEST_CASE("subset selection ranks by maximum") {
  std::vector<Snapshot> s;
  for (int i = 0; i < 5; ++i) s.push_back(raw_snapshot("s" + std::to_string(i), {1.0, 1.0 + i}));
  auto strong = select_subset(s, SubsetKind::Strong, 2);
  auto weak = select_subset(s, SubsetKind::Weak, 2);
  auto median = select_subset(s, SubsetKind::Median, 1);
  CHECK(strong[0].id == "s4");
  CHECK(strong[1].id == "s3");
  CHECK(weak[1].id == "s0");
  CHECK(median[0].id == "s2");
}

TEST_CASE("bundle round trip is bit exact") {
  KernelSpec spec(KernelFamily::Sum);
  ThetaVector t(spec, {1, 10, 0.5, 30, 0.7, 0});
  SyntheticConfig cfg;
  cfg.grid_size = 5;
  cfg.n_snapshots = 4;
  auto snaps = generate_synthetic(spec, t, cfg);
  Dataset ds;
  ds.tuning.assign(snaps.begin(), snaps.begin() + 2);
  ds.test.assign(snaps.begin() + 2, snaps.end());
  ds.test[0].mask[3] = 0;
  ds.test[0].values_raw[3] = std::nan("");
  ds.metadata_json = R"({"seed":13})";
  preprocess(ds);
  std::ostringstream out;
  write_dataset(out, ds);
  std::istringstream in(out.str());
  auto back = read_dataset(in);
  CHECK(back.stats->log_mean == ds.stats->log_mean);
  CHECK(back.stats->log_sd == ds.stats->log_sd);
  REQUIRE(back.tuning.size() == 2);
  REQUIRE(back.test.size() == 2);
  for (auto [x, y] : {std::pair{&ds.tuning, &back.tuning}, std::pair{&ds.test, &back.test}}) {
    for (std::size_t i = 0; i < x->size(); ++i) {
      const auto &a = (*x)[i], &b = (*y)[i];
      CHECK(a.id == b.id);
      CHECK(a.locations == b.locations);
      CHECK(a.mask == b.mask);
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a.mask[k]) continue;
        CHECK(a.values_raw[k] == b.values_raw[k]);
        CHECK(a.values_pre[k] == b.values_pre[k]);
      }
    }
  }
  std::ostringstream again;
  write_dataset(again, back);
  CHECK(again.str() == out.str());
  CHECK(tuning_hash(back) == tuning_hash(ds));
  CHECK(tuning_hash(back).size() == 16);
}
