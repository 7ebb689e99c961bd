#include "hbo/data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hbo/error.hpp"
#include "hbo/rng.hpp"
#include "text_util.hpp"

namespace hbo {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDegToRad = kPi / 180.0;

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  fail(ErrorKind::Parse, os.str());
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

/// Maps required column names to positions in the header.
std::vector<std::size_t> header_positions(const std::string& header_line, std::span<const std::string_view> names,
                                          const std::string& source) {
  const auto header = detail::split_csv_line(header_line);
  std::vector<std::size_t> pos;
  for (auto name : names) {
    const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return lower(h) == name; });
    if (it == header.end()) parse_error(source, 1, "missing column '" + std::string(name) + "'");
    pos.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return pos;
}

bool valid_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  const auto y = detail::parse_int(s.substr(0, 4));
  const auto m = detail::parse_int(s.substr(5, 2));
  const auto d = detail::parse_int(s.substr(8, 2));
  if (!y || !m || !d || *m < 1 || *d < 1) return false;
  const std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(*y)),
                                        std::chrono::month(static_cast<unsigned>(*m)),
                                        std::chrono::day(static_cast<unsigned>(*d))};
  return ymd.ok();
}

}  // namespace

std::vector<std::size_t> Snapshot::candidates() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

std::size_t Snapshot::true_maximiser() const {
  if (!preprocessed()) fail(ErrorKind::Input, "snapshot " + id + " is not pre-processed");
  std::size_t best = values_pre.size();
  for (std::size_t i = 0; i < values_pre.size(); ++i) {
    if (!mask[i]) continue;
    if (best == values_pre.size() || values_pre[i] > values_pre[best]) best = i;
  }
  if (best == values_pre.size()) fail(ErrorKind::Input, "snapshot " + id + " has no available locations");
  return best;
}

Observations Snapshot::observe(std::span<const std::size_t> indices) const {
  if (!preprocessed()) fail(ErrorKind::Input, "snapshot " + id + " is not pre-processed");
  Observations obs;
  obs.locations.reserve(indices.size());
  obs.values.reserve(indices.size());
  for (auto i : indices) {
    if (i >= size() || !mask[i]) fail(ErrorKind::Input, "observation outside the available set of " + id);
    obs.locations.push_back(locations[i]);
    obs.values.push_back(values_pre[i]);
  }
  return obs;
}

void Snapshot::validate() const {
  if (locations.size() != values_raw.size() || locations.size() != mask.size())
    fail(ErrorKind::Input, "snapshot " + id + ": locations, values and mask differ in length");
  if (!values_pre.empty() && values_pre.size() != values_raw.size())
    fail(ErrorKind::Input, "snapshot " + id + ": pre-processed values have the wrong length");
  std::set<std::pair<double, double>> seen;
  for (const auto& p : locations) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      fail(ErrorKind::Input, "snapshot " + id + ": non-finite location");
    if (!seen.emplace(p.x(), p.y()).second) {
      std::ostringstream os;
      os << "snapshot " << id << ": duplicate location (" << p.x() << ", " << p.y() << ")";
      fail(ErrorKind::Input, os.str());
    }
  }
}

const Snapshot* Dataset::find(std::string_view id) const {
  for (const auto* split : {&tuning, &test})
    for (const auto& s : *split)
      if (s.id == id) return &s;
  return nullptr;
}

std::vector<Snapshot> load_grid_csv(const std::filesystem::path& path, double cell_size_km) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open grid file " + path.string());
  return read_grid_csv(in, cell_size_km, path.string());
}

std::vector<Snapshot> read_grid_csv(std::istream& in, double cell_size_km, const std::string& source) {
  if (!(cell_size_km > 0.0)) fail(ErrorKind::Input, "cell size must be positive");
  std::string line;
  if (!std::getline(in, line)) parse_error(source, 1, "empty file");
  static constexpr std::string_view kCols[] = {"snapshot_id", "row", "col", "value"};
  const auto pos = header_positions(line, kCols, source);

  // id -> (row, col) -> value (NaN = missing)
  std::map<std::string, std::map<std::pair<long long, long long>, double>> cells;
  long long max_row = -1, max_col = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() <= *std::max_element(pos.begin(), pos.end())) parse_error(source, line_no, "too few fields");
    const auto& id = f[pos[0]];
    if (id.empty()) parse_error(source, line_no, "empty snapshot_id");
    const auto row = detail::parse_int(f[pos[1]]);
    const auto col = detail::parse_int(f[pos[2]]);
    if (!row || !col || *row < 0 || *col < 0) parse_error(source, line_no, "row/col must be non-negative integers");
    double value = kNaN;
    if (!f[pos[3]].empty()) {
      const auto v = detail::parse_double(f[pos[3]]);
      if (!v || !std::isfinite(*v)) parse_error(source, line_no, "unparseable value '" + f[pos[3]] + "'");
      value = *v;
    }
    if (!cells[id].emplace(std::make_pair(*row, *col), value).second) {
      std::ostringstream os;
      os << source << ":" << line_no << ": duplicate cell (" << id << ", " << *row << ", " << *col << ")";
      fail(ErrorKind::Input, os.str());
    }
    max_row = std::max(max_row, *row);
    max_col = std::max(max_col, *col);
  }

  const auto n_rows = static_cast<std::size_t>(max_row + 1);
  const auto n_cols = static_cast<std::size_t>(max_col + 1);
  const double total = static_cast<double>(n_rows * n_cols);
  std::vector<Snapshot> out;
  for (const auto& [id, grid] : cells) {
    Snapshot s;
    s.id = id;
    s.units = "mol/m^2";
    std::size_t missing = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      for (std::size_t c = 0; c < n_cols; ++c) {
        const auto it = grid.find({static_cast<long long>(r), static_cast<long long>(c)});
        const double v = it == grid.end() ? kNaN : it->second;
        s.locations.emplace_back(static_cast<double>(c) * cell_size_km, static_cast<double>(r) * cell_size_km);
        s.values_raw.push_back(v);
        s.mask.push_back(std::isnan(v) ? 0 : 1);
        if (std::isnan(v)) ++missing;
      }
    }
    if (static_cast<double>(missing) / total > kMaxMissingFraction) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Snapshot> load_station_csv(const std::filesystem::path& path, const StationFilter& filter) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open station file " + path.string());
  return read_station_csv(in, filter, path.string());
}

std::vector<Snapshot> read_station_csv(std::istream& in, const StationFilter& filter, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_error(source, 1, "empty file");
  static constexpr std::string_view kCols[] = {"date", "station_id", "lat", "lon", "classification", "value"};
  const auto pos = header_positions(line, kCols, source);
  const auto wanted = lower(filter.classification);

  struct Accum {
    LatLon where;
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, std::map<std::string, Accum>> days;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() <= *std::max_element(pos.begin(), pos.end())) parse_error(source, line_no, "too few fields");
    const auto& date = f[pos[0]];
    if (!valid_date(date)) parse_error(source, line_no, "unparseable date '" + date + "'");
    const auto lat = detail::parse_double(f[pos[2]]);
    const auto lon = detail::parse_double(f[pos[3]]);
    if (!lat || !lon || !std::isfinite(*lat) || !std::isfinite(*lon))
      parse_error(source, line_no, "unparseable coordinates");
    if (!wanted.empty() && lower(f[pos[4]]) != wanted) continue;
    if (f[pos[5]].empty()) continue;
    const auto value = detail::parse_double(f[pos[5]]);
    if (!value || !std::isfinite(*value)) parse_error(source, line_no, "unparseable value '" + f[pos[5]] + "'");
    auto& acc = days[date][f[pos[1]]];
    if (acc.count == 0) acc.where = {*lat, *lon};
    acc.sum += *value;
    ++acc.count;
  }

  std::vector<std::pair<std::string, const std::map<std::string, Accum>*>> kept;
  for (const auto& [date, stations] : days)
    if (stations.size() >= filter.min_readings) kept.emplace_back(date, &stations);
  if (kept.empty()) return {};

  LatLon corner{90.0, 180.0};
  for (const auto& [date, stations] : kept) {
    for (const auto& [id, acc] : *stations) {
      corner.lat = std::min(corner.lat, acc.where.lat);
      corner.lon = std::min(corner.lon, acc.where.lon);
    }
  }

  std::vector<Snapshot> out;
  for (const auto& [date, stations] : kept) {
    Snapshot s;
    s.id = date;
    s.units = "ug/m^3";
    std::vector<LatLon> where;
    for (const auto& [id, acc] : *stations) {
      where.push_back(acc.where);
      s.values_raw.push_back(acc.sum / static_cast<double>(acc.count));
      s.mask.push_back(1);
    }
    s.locations = project_latlon(corner, where);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Point> project_latlon(const LatLon& reference, std::span<const LatLon> points) {
  auto check = [](const LatLon& p) {
    if (!(p.lat > -90.0 && p.lat < 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
      std::ostringstream os;
      os << "coordinates out of range (lat=" << p.lat << ", lon=" << p.lon << ")";
      fail(ErrorKind::Input, os.str());
    }
  };
  check(reference);
  const double cos_ref = std::cos(reference.lat * kDegToRad);
  std::vector<Point> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    check(p);
    out.emplace_back(kEarthRadiusKm * (p.lon - reference.lon) * kDegToRad * cos_ref,
                     kEarthRadiusKm * (p.lat - reference.lat) * kDegToRad);
  }
  return out;
}

void apply_preprocessing(Snapshot& s, const PreprocessStats& stats) {
  s.values_pre.assign(s.values_raw.size(), kNaN);
  for (std::size_t i = 0; i < s.values_raw.size(); ++i) {
    if (!s.mask[i]) continue;
    const double v = s.values_raw[i];
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "snapshot " << s.id << ": non-positive value " << v << " at location " << i << " ("
         << s.locations[i].x() << ", " << s.locations[i].y() << ")";
      fail(ErrorKind::Input, os.str());
    }
    s.values_pre[i] = (std::log(v) - stats.log_mean) / stats.log_sd;
  }
}

void preprocess(Dataset& dataset) {
  if (dataset.preprocessed()) fail(ErrorKind::Input, "dataset is already pre-processed");
  if (dataset.tuning.empty()) fail(ErrorKind::Input, "pre-processing needs at least one tuning snapshot");

  std::vector<double> logs;
  for (const auto& s : dataset.tuning) {
    s.validate();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.mask[i]) continue;
      if (!(s.values_raw[i] > 0.0)) {
        std::ostringstream os;
        os << "snapshot " << s.id << ": non-positive value " << s.values_raw[i] << " at location " << i << " ("
           << s.locations[i].x() << ", " << s.locations[i].y() << ")";
        fail(ErrorKind::Input, os.str());
      }
      logs.push_back(std::log(s.values_raw[i]));
    }
  }
  if (logs.size() < 2) fail(ErrorKind::Degenerate, "tuning set has fewer than two readings");
  double mean = 0.0;
  for (double v : logs) mean += v;
  mean /= static_cast<double>(logs.size());
  double ss = 0.0;
  for (double v : logs) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(logs.size() - 1));
  if (!(sd > 0.0)) fail(ErrorKind::Degenerate, "tuning log-values have zero standard deviation");

  const PreprocessStats stats{mean, sd};
  for (auto* split : {&dataset.tuning, &dataset.test}) {
    for (auto& s : *split) {
      s.validate();
      apply_preprocessing(s, stats);
    }
  }
  dataset.stats = stats;
}

std::vector<Point> grid_locations(std::size_t grid_size, double cell_size_km) {
  std::vector<Point> out;
  out.reserve(grid_size * grid_size);
  for (std::size_t r = 0; r < grid_size; ++r)
    for (std::size_t c = 0; c < grid_size; ++c)
      out.emplace_back(static_cast<double>(c) * cell_size_km, static_cast<double>(r) * cell_size_km);
  return out;
}

std::vector<Snapshot> generate_synthetic(const KernelSpec& spec, const ThetaVector& theta_true,
                                         const SyntheticConfig& config) {
  const std::size_t n_points = config.grid_size * config.grid_size;
  if (config.grid_size == 0) fail(ErrorKind::Input, "grid size must be positive");
  if (n_points > kMaxSyntheticPoints) {
    std::ostringstream os;
    os << "grid of " << n_points << " points exceeds the dense-sampling cap of " << kMaxSyntheticPoints;
    fail(ErrorKind::Input, os.str());
  }
  if (!(config.cell_size_km > 0.0)) fail(ErrorKind::Input, "cell size must be positive");

  const auto locations = grid_locations(config.grid_size, config.cell_size_km);
  const Eigen::MatrixXd K = covariance_matrix(spec, theta_true, locations, /*include_noise=*/false);
  // Eigendecomposition tolerates the rank deficiency of smooth kernels.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigendecomposition of the grid covariance failed");
  const Eigen::MatrixXd root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  const auto width = std::to_string(config.n_snapshots > 0 ? config.n_snapshots - 1 : 0).size();
  std::vector<Snapshot> out;
  out.reserve(config.n_snapshots);
  for (std::size_t i = 0; i < config.n_snapshots; ++i) {
    Rng rng = make_stream(config.seed, {stream::kSynthetic, i});
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(n_points));
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
    const Eigen::VectorXd field = root * z;

    Snapshot s;
    std::string idx = std::to_string(i);
    s.id = config.id_prefix + std::string(width - idx.size(), '0') + idx;
    s.units = "synthetic";
    s.locations = locations;
    s.values_raw.resize(n_points);
    for (std::size_t j = 0; j < n_points; ++j)
      s.values_raw[j] = std::exp(field(static_cast<Eigen::Index>(j)) + config.log_offset);
    s.mask.assign(n_points, 1);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Snapshot> select_subset(std::span<const Snapshot> snapshots, SubsetKind kind, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < snapshots[i].size(); ++j)
      if (snapshots[i].mask[j]) m = std::max(m, snapshots[i].values_raw[j]);
    ranked.emplace_back(m, i);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  count = std::min(count, ranked.size());
  std::size_t start = 0;
  if (kind == SubsetKind::Weak) start = ranked.size() - count;
  if (kind == SubsetKind::Median) start = (ranked.size() - count) / 2;
  std::vector<Snapshot> out;
  for (std::size_t i = start; i < start + count; ++i) out.push_back(snapshots[ranked[i].second]);
  return out;
}

std::vector<Observations> full_observations(std::span<const Snapshot> snapshots) {
  std::vector<Observations> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) {
    const auto idx = s.candidates();
    out.push_back(s.observe(idx));
  }
  return out;
}

}  // namespace hbo
