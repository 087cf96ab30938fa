#include "hubspoke/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hubspoke/error.hpp"
#include "hubspoke/serialization.hpp"
#include "text.hpp"

namespace hubspoke {

std::string_view to_string(DemandSelector s) {
  switch (s) {
    case DemandSelector::delivery: return "delivery";
    case DemandSelector::pickup: return "pickup";
    case DemandSelector::total: return "total";
  }
  return "delivery";
}

DemandSelector parse_demand_selector(std::string_view text) {
  if (text == "delivery") return DemandSelector::delivery;
  if (text == "pickup") return DemandSelector::pickup;
  if (text == "total") return DemandSelector::total;
  fail(ErrorCode::validation,
       fmt::format("gravity_demand must be delivery|pickup|total, got '{}'", text));
}

std::string_view to_string(ZeroDemandPolicy p) {
  return p == ZeroDemandPolicy::mean ? "mean" : "error";
}

ZeroDemandPolicy parse_zero_demand_policy(std::string_view text) {
  if (text == "error") return ZeroDemandPolicy::error;
  if (text == "mean") return ZeroDemandPolicy::mean;
  fail(ErrorCode::validation, fmt::format("gravity_zero_demand must be error|mean, got '{}'", text));
}

std::string_view to_string(Provenance p) {
  return p == Provenance::expert_adjusted ? "expert_adjusted" : "fcm_argmax";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "fcm_argmax") return Provenance::fcm_argmax;
  if (text == "expert_adjusted") return Provenance::expert_adjusted;
  fail(ErrorCode::validation, fmt::format("unknown provenance '{}'", text));
}

double demand_of(const DemandPoint& p, DemandSelector selector) {
  switch (selector) {
    case DemandSelector::delivery: return p.delivery_demand;
    case DemandSelector::pickup: return p.pickup_demand;
    case DemandSelector::total: return p.delivery_demand + p.pickup_demand;
  }
  return p.delivery_demand;
}

void validate(const FleetSpec& fleet) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!positive(fleet.truck_capacity)) fail(ErrorCode::validation, "truck_capacity must be > 0");
  if (!non_negative(fleet.truck_fixed_cost)) {
    fail(ErrorCode::validation, "truck_fixed_cost must be >= 0");
  }
  if (!non_negative(fleet.cost_per_km)) fail(ErrorCode::validation, "cost_per_km must be >= 0");
  if (!std::isfinite(fleet.shift_start_min) || !std::isfinite(fleet.shift_end_min) ||
      fleet.shift_start_min > fleet.shift_end_min) {
    fail(ErrorCode::validation, "shift_start_min must be <= shift_end_min");
  }
}

FleetSpec Config::fleet() const {
  return FleetSpec{truck_capacity, truck_fixed_cost, cost_per_km, shift_start_min, shift_end_min};
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "speed_kmh",        "detour_factor",      "truck_capacity",    "truck_fixed_cost",
      "cost_per_km",      "shift_start_min",    "shift_end_min",     "gravity_demand",
      "allow_intra_point", "gravity_zero_demand", "handoff_radius_km", "linehaul_roundtrip",
      "service_min",      "depot_lat",          "depot_lon"};
  return keys;
}

void apply_config_value(Config& c, std::string_view key, std::string_view raw) {
  const auto value = detail::trim(raw);
  auto number = [&]() {
    auto v = detail::parse_double(value);
    if (!v) fail(ErrorCode::validation, fmt::format("config key '{}': not a number: '{}'", key, value));
    return *v;
  };
  auto boolean = [&]() {
    auto v = detail::parse_bool(value);
    if (!v) fail(ErrorCode::validation, fmt::format("config key '{}': not a boolean: '{}'", key, value));
    return *v;
  };
  auto depot = [&]() -> GeoPoint& {
    if (!c.depot) c.depot = GeoPoint{std::nan(""), std::nan("")};
    return *c.depot;
  };
  if (key == "speed_kmh") c.speed_kmh = number();
  else if (key == "detour_factor") c.detour_factor = number();
  else if (key == "truck_capacity") c.truck_capacity = number();
  else if (key == "truck_fixed_cost") c.truck_fixed_cost = number();
  else if (key == "cost_per_km") c.cost_per_km = number();
  else if (key == "shift_start_min") c.shift_start_min = number();
  else if (key == "shift_end_min") c.shift_end_min = number();
  else if (key == "gravity_demand") c.gravity_demand = parse_demand_selector(value);
  else if (key == "allow_intra_point") c.allow_intra_point = boolean();
  else if (key == "gravity_zero_demand") c.gravity_zero_demand = parse_zero_demand_policy(value);
  else if (key == "handoff_radius_km") c.handoff_radius_km = number();
  else if (key == "linehaul_roundtrip") c.linehaul_roundtrip = boolean();
  else if (key == "service_min") c.service_min = number();
  else if (key == "depot_lat") depot().lat = number();
  else if (key == "depot_lon") depot().lon = number();
  else fail(ErrorCode::validation, fmt::format("unknown config key '{}'", key));
}

void validate(const Config& c) {
  if (!(c.speed_kmh > 0.0) || !std::isfinite(c.speed_kmh)) {
    fail(ErrorCode::validation, "speed_kmh must be > 0");
  }
  if (!(c.detour_factor >= 1.0) || !std::isfinite(c.detour_factor)) {
    fail(ErrorCode::validation, "detour_factor must be >= 1");
  }
  if (!(c.handoff_radius_km >= 0.0) || !std::isfinite(c.handoff_radius_km)) {
    fail(ErrorCode::validation, "handoff_radius_km must be >= 0");
  }
  if (!(c.service_min >= 0.0) || !std::isfinite(c.service_min)) {
    fail(ErrorCode::validation, "service_min must be >= 0");
  }
  if (c.depot && !is_valid(*c.depot)) {
    fail(ErrorCode::validation, "depot_lat/depot_lon must both be set to a valid coordinate");
  }
  validate(c.fleet());
}

std::vector<std::pair<std::string, std::string>> read_config_entries(
    const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto body = detail::trim(text);
  std::vector<std::pair<std::string, std::string>> entries;
  if (body.starts_with("{")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::validation, fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
    }
    for (const auto& [key, value] : j.items()) {
      std::string s;
      if (value.is_string()) s = value.get<std::string>();
      else if (value.is_boolean()) s = value.get<bool>() ? "true" : "false";
      else if (value.is_number()) s = detail::format_double(value.get<double>());
      else fail(ErrorCode::validation, fmt::format("config key '{}': unsupported value", key));
      entries.emplace_back(key, std::move(s));
    }
    return entries;
  }
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::validation,
           fmt::format("{}: line {}: expected 'key = value'", path.string(), i + 1));
    }
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    entries.emplace_back(std::string(key), std::string(value));
  }
  return entries;
}

Config load_config(const std::filesystem::path& path, Config base) {
  for (const auto& [key, value] : read_config_entries(path)) apply_config_value(base, key, value);
  validate(base);
  return base;
}

std::optional<std::size_t> Instance::index_of(std::string_view point_id) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].id == point_id) return i;
  }
  return std::nullopt;
}

namespace {

// Distance from p to the nearest point of the points' bounding box.
double distance_to_bbox_km(const std::vector<DemandPoint>& points, const GeoPoint& p) {
  double min_lat = 90, max_lat = -90, min_lon = 180, max_lon = -180;
  for (const auto& pt : points) {
    min_lat = std::min(min_lat, pt.pos.lat);
    max_lat = std::max(max_lat, pt.pos.lat);
    min_lon = std::min(min_lon, pt.pos.lon);
    max_lon = std::max(max_lon, pt.pos.lon);
  }
  const GeoPoint clamped{std::clamp(p.lat, min_lat, max_lat), std::clamp(p.lon, min_lon, max_lon)};
  return haversine_km(p, clamped);
}

}  // namespace

void validate(const Instance& inst, bool allow_intra_point) {
  if (inst.points.size() < 2) fail(ErrorCode::validation, "instance needs at least 2 points");
  std::unordered_set<std::string_view> ids;
  for (const auto& p : inst.points) {
    if (p.id.empty()) fail(ErrorCode::validation, "empty point id");
    if (!ids.insert(p.id).second) {
      fail(ErrorCode::validation, fmt::format("duplicate point id '{}'", p.id));
    }
    if (!is_valid(p.pos)) fail(ErrorCode::validation, fmt::format("point '{}': invalid coordinate", p.id));
    if (!std::isfinite(p.pickup_demand) || !std::isfinite(p.delivery_demand) ||
        p.pickup_demand < 0.0 || p.delivery_demand < 0.0) {
      fail(ErrorCode::validation, fmt::format("point '{}': demand must be finite and >= 0", p.id));
    }
  }
  std::unordered_set<std::string_view> parcel_ids;
  for (const auto& p : inst.parcels) {
    if (!parcel_ids.insert(p.id).second) {
      fail(ErrorCode::validation, fmt::format("duplicate parcel id '{}'", p.id));
    }
    for (const auto* end : {&p.origin, &p.dest}) {
      if (!ids.contains(*end)) {
        fail(ErrorCode::validation,
             fmt::format("parcel '{}' references unknown point '{}'", p.id, *end));
      }
    }
    if (p.origin == p.dest && !allow_intra_point) {
      fail(ErrorCode::validation, fmt::format("parcel '{}' has origin == dest", p.id));
    }
    if (!(p.size > 0.0) || !std::isfinite(p.size)) {
      fail(ErrorCode::validation, fmt::format("parcel '{}': size must be > 0", p.id));
    }
  }
  if (inst.depot) {
    if (!is_valid(*inst.depot)) fail(ErrorCode::validation, "depot: invalid coordinate");
    if (distance_to_bbox_km(inst.points, *inst.depot) > 100.0) {
      fail(ErrorCode::validation, "depot lies more than 100 km outside the points' bounding box");
    }
  }
  validate(inst.fleet);
}

void validate_partition(const Assignment& assignment, std::size_t n_points, std::size_t k) {
  if (k == 0) fail(ErrorCode::validation, "cluster count must be >= 1");
  if (assignment.size() != n_points) {
    fail(ErrorCode::validation,
         fmt::format("assignment covers {} points, expected {}", assignment.size(), n_points));
  }
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= k) {
      fail(ErrorCode::validation,
           fmt::format("point {} assigned to cluster {} outside [0, {})", i, assignment[i], k));
    }
    ++sizes[assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) fail(ErrorCode::conflict, fmt::format("cluster {} is empty", c));
  }
}

void validate(const NetworkDesign& design, std::size_t n_points) {
  validate_partition(design.assignment, n_points, design.k);
  if (design.hubs.size() != design.k) {
    fail(ErrorCode::validation,
         fmt::format("design has {} hubs for {} clusters", design.hubs.size(), design.k));
  }
  for (const auto& h : design.hubs) {
    if (!is_valid(h)) fail(ErrorCode::validation, "hub with invalid coordinate");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::io, fmt::format("write to '{}' failed", path.string()));
}

void save_instance_json(const Instance& instance, const std::filesystem::path& path) {
  write_text_file(path, nlohmann::json(instance).dump(2) + "\n");
}

Instance load_instance_json(const std::filesystem::path& path) {
  auto inst = parse_json_document<Instance>(read_text_file(path), path.string());
  validate(inst, true);
  return inst;
}

}  // namespace hubspoke
