#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hubspoke/geo.hpp"

namespace hubspoke {

/// Which demand figure weights a point (hub placement, cluster balance).
enum class DemandSelector { delivery, pickup, total };

/// What to do when a cluster has zero total demand during hub placement.
enum class ZeroDemandPolicy { error, mean };

std::string_view to_string(DemandSelector s);
DemandSelector parse_demand_selector(std::string_view text);
std::string_view to_string(ZeroDemandPolicy p);
ZeroDemandPolicy parse_zero_demand_policy(std::string_view text);

struct DemandPoint {
  std::string id;
  GeoPoint pos;
  double pickup_demand = 0.0;    // parcels/day
  double delivery_demand = 0.0;  // parcels/day

  friend bool operator==(const DemandPoint&, const DemandPoint&) = default;
};

double demand_of(const DemandPoint& p, DemandSelector selector);

struct Parcel {
  std::string id;
  std::string origin;
  std::string dest;
  double size = 1.0;  // capacity units

  friend bool operator==(const Parcel&, const Parcel&) = default;
};

struct FleetSpec {
  double truck_capacity = 150.0;
  double truck_fixed_cost = 100.0;
  double cost_per_km = 5.0;
  double shift_start_min = 0.0;
  double shift_end_min = 600.0;

  friend bool operator==(const FleetSpec&, const FleetSpec&) = default;
};

void validate(const FleetSpec& fleet);

/// Runtime parameters shared by every pipeline stage. Keys match the
/// config-file keys one to one.
struct Config {
  double speed_kmh = 25.0;
  double detour_factor = 1.4;
  double truck_capacity = 150.0;
  double truck_fixed_cost = 100.0;
  double cost_per_km = 5.0;
  double shift_start_min = 0.0;
  double shift_end_min = 600.0;
  DemandSelector gravity_demand = DemandSelector::delivery;
  bool allow_intra_point = false;
  ZeroDemandPolicy gravity_zero_demand = ZeroDemandPolicy::error;
  double handoff_radius_km = 2.0;
  bool linehaul_roundtrip = false;
  double service_min = 5.0;
  std::optional<GeoPoint> depot;

  FleetSpec fleet() const;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Every key accepted by `apply_config_value`, in file order.
const std::vector<std::string_view>& config_keys();

/// Sets one key from its textual value; throws validation errors naming the key.
void apply_config_value(Config& config, std::string_view key, std::string_view value);

/// Checks cross-field constraints (positive speed, detour >= 1, shift order...).
void validate(const Config& config);

/// Raw key/value pairs of a JSON object or flat `key = value` (TOML subset)
/// file, in file order.
std::vector<std::pair<std::string, std::string>> read_config_entries(
    const std::filesystem::path& path);

/// Applies a config file on top of `base` and validates the result.
Config load_config(const std::filesystem::path& path, Config base = {});

struct Instance {
  std::vector<DemandPoint> points;
  std::vector<Parcel> parcels;
  /// Central distribution center; required by the single-DC and
  /// consolidation scenarios.
  std::optional<GeoPoint> depot;
  FleetSpec fleet;

  std::optional<std::size_t> index_of(std::string_view point_id) const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Throws on the first broken invariant (unique ids, resolvable parcel
/// endpoints, depot sanity bound, fleet values).
void validate(const Instance& instance, bool allow_intra_point = false);

/// Point index -> cluster index, aligned with Instance::points.
using Assignment = std::vector<std::size_t>;

enum class Provenance { fcm_argmax, expert_adjusted };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

struct NetworkDesign {
  std::size_t k = 0;
  Assignment assignment;
  std::vector<GeoPoint> hubs;
  Provenance provenance = Provenance::fcm_argmax;

  friend bool operator==(const NetworkDesign&, const NetworkDesign&) = default;
};

/// Partition checks: every index < k, no empty cluster, hubs.size() == k.
void validate(const NetworkDesign& design, std::size_t n_points);

/// Throws unless `assignment` covers n_points with labels in [0, k) and no
/// cluster is empty.
void validate_partition(const Assignment& assignment, std::size_t n_points, std::size_t k);

// ---------------------------------------------------------------------------
// File ingestion

Instance load_instance(const std::filesystem::path& points_csv,
                       const std::filesystem::path& parcels_csv, const Config& config);

/// Parses CSV text; exposed separately for tests. Throws listing every
/// rejected row.
std::vector<DemandPoint> parse_points_csv(std::string_view text);
std::vector<Parcel> parse_parcels_csv(std::string_view text);

std::string points_to_csv(const std::vector<DemandPoint>& points);
std::string parcels_to_csv(const std::vector<Parcel>& parcels);

void save_instance_csv(const Instance& instance, const std::filesystem::path& points_csv,
                       const std::filesystem::path& parcels_csv);
void save_instance_json(const Instance& instance, const std::filesystem::path& path);
Instance load_instance_json(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------
// Synthetic instances

struct BoundingBox {
  double min_lat = 10.70;
  double max_lat = 10.90;
  double min_lon = 106.60;
  double max_lon = 106.80;
};

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t n_points = 77;
  std::size_t n_blobs = 3;
  std::size_t parcels_per_day = 2000;
  BoundingBox bbox;
  /// Blob standard deviation as a fraction of the smaller bbox side.
  double blob_sigma_fraction = 0.05;
  FleetSpec fleet;
};

struct SyntheticInstance {
  Instance instance;
  /// Generating blob for each point (ground-truth labels).
  std::vector<std::size_t> blob_of_point;
  std::vector<GeoPoint> blob_centers;
  double blob_sigma_deg = 0.0;
};

SyntheticInstance generate_synthetic(const SyntheticSpec& spec);

}  // namespace hubspoke
