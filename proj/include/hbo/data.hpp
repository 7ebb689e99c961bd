#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hbo/gp.hpp"
#include "hbo/kernels.hpp"

namespace hbo {

/// One spatial field: candidate locations (km), raw readings and an
/// availability mask. `values_pre` is empty until the owning Dataset is
/// pre-processed.
struct Snapshot {
  std::string id;
  std::string units;
  std::vector<Point> locations;
  std::vector<double> values_raw;
  std::vector<std::uint8_t> mask;
  std::vector<double> values_pre;

  std::size_t size() const noexcept { return locations.size(); }
  bool preprocessed() const noexcept { return values_pre.size() == values_raw.size() && !values_raw.empty(); }

  /// Indices of masked-in locations, in storage order.
  std::vector<std::size_t> candidates() const;
  /// Masked-in index with the largest pre-processed value (first on ties).
  std::size_t true_maximiser() const;
  /// Pre-processed observations at the given indices.
  Observations observe(std::span<const std::size_t> indices) const;

  /// Checks the structural invariants (lengths, positivity, unique locations).
  void validate() const;
};

struct PreprocessStats {
  double log_mean = 0.0;
  double log_sd = 0.0;
};

struct Dataset {
  std::vector<Snapshot> tuning;
  std::vector<Snapshot> test;
  std::optional<PreprocessStats> stats;
  /// Free-form provenance (e.g. generator seed and theta), kept verbatim.
  std::string metadata_json = "{}";

  bool preprocessed() const noexcept { return stats.has_value(); }
  const Snapshot* find(std::string_view id) const;
};

/// Long-format grid CSV: snapshot_id,row,col,value (empty value = missing).
/// Locations are (col, row) * cell_size_km. Snapshots with more than 10%
/// missing cells are dropped. Output is sorted by snapshot id.
std::vector<Snapshot> load_grid_csv(const std::filesystem::path& path, double cell_size_km = 7.0);
std::vector<Snapshot> read_grid_csv(std::istream& in, double cell_size_km = 7.0,
                                    const std::string& source = "<stream>");

inline constexpr double kMaxMissingFraction = 0.10;

struct StationFilter {
  std::size_t min_readings = 40;
  /// Empty string keeps every classification.
  std::string classification = "Roadside";
};

/// Station CSV: date,station_id,lat,lon,classification,value. One snapshot
/// per calendar day; same-day duplicates per station are averaged.
/// Coordinates are projected about the south-west corner (minimum latitude,
/// minimum longitude) of the retained stations.
std::vector<Snapshot> load_station_csv(const std::filesystem::path& path, const StationFilter& filter = {});
std::vector<Snapshot> read_station_csv(std::istream& in, const StationFilter& filter = {},
                                       const std::string& source = "<stream>");

struct LatLon {
  double lat;
  double lon;
};

inline constexpr double kEarthRadiusKm = 6371.0;

/// Local equirectangular projection about `reference` (maps to the origin).
std::vector<Point> project_latlon(const LatLon& reference, std::span<const LatLon> points);

/// Fills values_pre = (ln raw - mean) / sd using tuning-set statistics
/// (sample standard deviation). Fails if already pre-processed.
void preprocess(Dataset& dataset);

/// Applies existing statistics to one snapshot.
void apply_preprocessing(Snapshot& snapshot, const PreprocessStats& stats);

inline constexpr std::size_t kMaxSyntheticPoints = 4096;

struct SyntheticConfig {
  std::size_t grid_size = 16;
  double cell_size_km = 7.0;
  std::size_t n_snapshots = 10;
  std::uint64_t seed = 13;
  /// raw = exp(field + log_offset)
  double log_offset = 0.0;
  std::string id_prefix = "syn";
};

/// Exact zero-mean GP draws on a grid_size x grid_size lattice, mapped to
/// positive raw values. Fails above kMaxSyntheticPoints grid points.
std::vector<Snapshot> generate_synthetic(const KernelSpec& spec, const ThetaVector& theta_true,
                                         const SyntheticConfig& config);

/// Grid locations used by generate_synthetic (row-major, (col, row) * cell).
std::vector<Point> grid_locations(std::size_t grid_size, double cell_size_km);

enum class SubsetKind { Strong, Median, Weak };

/// Ranks by snapshot maximum (raw) and keeps the top, middle or bottom
/// `count` snapshots, in ranked order.
std::vector<Snapshot> select_subset(std::span<const Snapshot> snapshots, SubsetKind kind, std::size_t count);

/// Bundle: JSON-lines, one meta record followed by one record per snapshot.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

/// Content fingerprint of the tuning split (ids, locations, pre-processed
/// values), hex-encoded.
std::string tuning_hash(const Dataset& dataset);

/// Pre-processed observations for every masked-in location of each snapshot.
std::vector<Observations> full_observations(std::span<const Snapshot> snapshots);

}  // namespace hbo
