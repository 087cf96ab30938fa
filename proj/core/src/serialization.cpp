#include "hubspoke/serialization.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

namespace hubspoke {

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  j.at(key).get_to(out);
}

std::optional<GeoPoint> optional_point(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<GeoPoint>();
}

}  // namespace

json parse_json_text(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, std::string(what) + ": " + e.what());
  }
}

void to_json(json& j, const GeoPoint& p) { j = json{{"lat", p.lat}, {"lon", p.lon}}; }
void from_json(const json& j, GeoPoint& p) {
  p = GeoPoint::checked(j.at("lat").get<double>(), j.at("lon").get<double>());
}

void to_json(json& j, const TravelMatrix& m) {
  json dist = json::array(), dur = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json drow = json::array(), trow = json::array();
    for (std::size_t k = 0; k < m.size(); ++k) {
      drow.push_back(m.distance_km(i, k));
      trow.push_back(m.duration_min(i, k));
    }
    dist.push_back(std::move(drow));
    dur.push_back(std::move(trow));
  }
  j = json{{"n", m.size()}, {"distance_km", std::move(dist)}, {"duration_min", std::move(dur)}};
}
void from_json(const json& j, TravelMatrix& m) {
  const auto n = j.at("n").get<std::size_t>();
  std::vector<double> dist, dur;
  for (const auto& row : j.at("distance_km")) {
    for (const auto& v : row) dist.push_back(v.get<double>());
  }
  for (const auto& row : j.at("duration_min")) {
    for (const auto& v : row) dur.push_back(v.get<double>());
  }
  m = TravelMatrix::from_values(n, std::move(dist), std::move(dur));
}

void to_json(json& j, const DemandPoint& p) {
  j = json{{"id", p.id}, {"pos", p.pos}, {"pickup_demand", p.pickup_demand},
           {"delivery_demand", p.delivery_demand}};
}
void from_json(const json& j, DemandPoint& p) {
  read(j, "id", p.id);
  read(j, "pos", p.pos);
  read(j, "pickup_demand", p.pickup_demand);
  read(j, "delivery_demand", p.delivery_demand);
}

void to_json(json& j, const Parcel& p) {
  j = json{{"id", p.id}, {"origin", p.origin}, {"dest", p.dest}, {"size", p.size}};
}
void from_json(const json& j, Parcel& p) {
  read(j, "id", p.id);
  read(j, "origin", p.origin);
  read(j, "dest", p.dest);
  p.size = j.value("size", 1.0);
}

void to_json(json& j, const FleetSpec& f) {
  j = json{{"truck_capacity", f.truck_capacity}, {"truck_fixed_cost", f.truck_fixed_cost},
           {"cost_per_km", f.cost_per_km}, {"shift_start_min", f.shift_start_min},
           {"shift_end_min", f.shift_end_min}};
}
void from_json(const json& j, FleetSpec& f) {
  read(j, "truck_capacity", f.truck_capacity);
  read(j, "truck_fixed_cost", f.truck_fixed_cost);
  read(j, "cost_per_km", f.cost_per_km);
  read(j, "shift_start_min", f.shift_start_min);
  read(j, "shift_end_min", f.shift_end_min);
}

void to_json(json& j, const Instance& inst) {
  j = json{{"points", inst.points}, {"parcels", inst.parcels},
           {"depot", inst.depot ? json(*inst.depot) : json(nullptr)}, {"fleet", inst.fleet}};
}
void from_json(const json& j, Instance& inst) {
  read(j, "points", inst.points);
  read(j, "parcels", inst.parcels);
  inst.depot = optional_point(j, "depot");
  read(j, "fleet", inst.fleet);
}

void to_json(json& j, const Config& c) {
  j = json{{"speed_kmh", c.speed_kmh},
           {"detour_factor", c.detour_factor},
           {"truck_capacity", c.truck_capacity},
           {"truck_fixed_cost", c.truck_fixed_cost},
           {"cost_per_km", c.cost_per_km},
           {"shift_start_min", c.shift_start_min},
           {"shift_end_min", c.shift_end_min},
           {"gravity_demand", to_string(c.gravity_demand)},
           {"allow_intra_point", c.allow_intra_point},
           {"gravity_zero_demand", to_string(c.gravity_zero_demand)},
           {"handoff_radius_km", c.handoff_radius_km},
           {"linehaul_roundtrip", c.linehaul_roundtrip},
           {"service_min", c.service_min}};
  if (c.depot) {
    j["depot_lat"] = c.depot->lat;
    j["depot_lon"] = c.depot->lon;
  }
}
void from_json(const json& j, Config& c) {
  c = Config{};
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else text = value.dump();
    apply_config_value(c, key, text);
  }
  validate(c);
}

void to_json(json& j, const FcmParams& p) {
  j = json{{"c", p.c}, {"m", p.m}, {"error", p.error}, {"maxiter", p.maxiter}, {"seed", p.seed}};
}
void from_json(const json& j, FcmParams& p) {
  p = FcmParams{};
  if (j.contains("c")) read(j, "c", p.c);
  if (j.contains("m")) read(j, "m", p.m);
  if (j.contains("error")) read(j, "error", p.error);
  if (j.contains("maxiter")) read(j, "maxiter", p.maxiter);
  if (j.contains("seed")) read(j, "seed", p.seed);
}

void to_json(json& j, const Membership& w) {
  j = json::array();
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const auto row = w.row(i);
    j.push_back(std::vector<double>(row.begin(), row.end()));
  }
}
void from_json(const json& j, Membership& w) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j.at(0).size() : 0;
  w = Membership(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols) throw std::runtime_error("ragged membership matrix");
    for (std::size_t k = 0; k < cols; ++k) w(i, k) = j.at(i).at(k).get<double>();
  }
}

void to_json(json& j, const FuzzyClustering& fc) {
  j = json{{"membership", fc.membership}, {"centroids", fc.centroids},
           {"iterations_run", fc.iterations_run}, {"converged", fc.converged}, {"fpc", fc.fpc}};
}
void from_json(const json& j, FuzzyClustering& fc) {
  read(j, "membership", fc.membership);
  read(j, "centroids", fc.centroids);
  read(j, "iterations_run", fc.iterations_run);
  read(j, "converged", fc.converged);
  read(j, "fpc", fc.fpc);
}

void to_json(json& j, const DesignMetrics& m) {
  j = json{{"approx_cost_km", m.approx_cost_km},
           {"approx_cost_unordered_km", m.approx_cost_unordered_km()},
           {"interhub_km", m.interhub_km},
           {"intracluster_km", m.intracluster_km},
           {"cluster_demand", m.cluster_demand},
           {"demand_cv", m.demand_cv},
           {"cluster_sizes", m.cluster_sizes}};
}
void from_json(const json& j, DesignMetrics& m) {
  read(j, "approx_cost_km", m.approx_cost_km);
  read(j, "interhub_km", m.interhub_km);
  read(j, "intracluster_km", m.intracluster_km);
  read(j, "cluster_demand", m.cluster_demand);
  read(j, "demand_cv", m.demand_cv);
  read(j, "cluster_sizes", m.cluster_sizes);
}

void to_json(json& j, const Move& m) {
  j = json{{"point_id", m.point_id}, {"from_cluster", m.from_cluster}, {"to_cluster", m.to_cluster},
           {"timestamp", m.timestamp}, {"actor", m.actor}};
}
void from_json(const json& j, Move& m) {
  read(j, "point_id", m.point_id);
  read(j, "from_cluster", m.from_cluster);
  read(j, "to_cluster", m.to_cluster);
  read(j, "timestamp", m.timestamp);
  read(j, "actor", m.actor);
}

void to_json(json& j, const CapacityTarget& t) {
  j = json{{"min_demand", t.min_demand}, {"max_demand", t.max_demand}};
}
void from_json(const json& j, CapacityTarget& t) {
  read(j, "min_demand", t.min_demand);
  read(j, "max_demand", t.max_demand);
}

void to_json(json& j, const Stop& s) {
  j = json{{"label", s.label}, {"location", s.location}, {"demand", s.demand},
           {"earliest", s.earliest}, {"latest", s.latest}, {"service_min", s.service_min}};
}
void from_json(const json& j, Stop& s) {
  read(j, "label", s.label);
  read(j, "location", s.location);
  read(j, "demand", s.demand);
  read(j, "earliest", s.earliest);
  read(j, "latest", s.latest);
  read(j, "service_min", s.service_min);
}

void to_json(json& j, const FleetCost& c) {
  j = json{{"fixed_per_truck", c.fixed_per_truck}, {"per_km", c.per_km}};
}
void from_json(const json& j, FleetCost& c) {
  read(j, "fixed_per_truck", c.fixed_per_truck);
  read(j, "per_km", c.per_km);
}

void to_json(json& j, const VrptwProblem& p) {
  j = json{{"depot", p.depot},       {"stops", p.stops},
           {"matrix", p.matrix},     {"capacity", p.capacity},
           {"fleet_cost", p.fleet_cost}, {"shift_start", p.shift_start},
           {"shift_end", p.shift_end}};
}
void from_json(const json& j, VrptwProblem& p) {
  read(j, "depot", p.depot);
  read(j, "stops", p.stops);
  read(j, "matrix", p.matrix);
  read(j, "capacity", p.capacity);
  read(j, "fleet_cost", p.fleet_cost);
  read(j, "shift_start", p.shift_start);
  read(j, "shift_end", p.shift_end);
  validate(p);
}

void to_json(json& j, const Route& r) {
  j = json{{"stops", r.stops}, {"arrival", r.arrival}, {"load", r.load}, {"km", r.km},
           {"return_time", r.return_time}};
}
void from_json(const json& j, Route& r) {
  read(j, "stops", r.stops);
  read(j, "arrival", r.arrival);
  read(j, "load", r.load);
  read(j, "km", r.km);
  read(j, "return_time", r.return_time);
}

void to_json(json& j, const RoutePlan& p) {
  j = json{{"routes", p.routes}, {"trucks_used", p.trucks_used}, {"total_km", p.total_km},
           {"total_cost", p.total_cost}, {"feasible", p.feasible}};
}
void from_json(const json& j, RoutePlan& p) {
  read(j, "routes", p.routes);
  read(j, "trucks_used", p.trucks_used);
  read(j, "total_km", p.total_km);
  read(j, "total_cost", p.total_cost);
  read(j, "feasible", p.feasible);
}

void to_json(json& j, const Violation& v) {
  j = json{{"kind", v.kind}, {"message", v.message}};
  j["route"] = v.route ? json(*v.route) : json(nullptr);
  j["stop"] = v.stop ? json(*v.stop) : json(nullptr);
}

void to_json(json& j, const FeasibilityReport& r) {
  j = json{{"ok", r.ok()}, {"violations", r.violations}};
}

void to_json(json& j, ScenarioId id) { j = std::string(to_string(id)); }
void from_json(const json& j, ScenarioId& id) { id = parse_scenario(j.get<std::string>()); }

void to_json(json& j, const Facility& f) { j = json{{"label", f.label}, {"pos", f.pos}}; }
void from_json(const json& j, Facility& f) {
  read(j, "label", f.label);
  read(j, "pos", f.pos);
}

void to_json(json& j, const RoutingLeg& l) {
  j = json{{"facility", l.facility}, {"problem", l.problem}, {"stop_points", l.stop_points},
           {"stop_parcels", l.stop_parcels}};
}
void from_json(const json& j, RoutingLeg& l) {
  read(j, "facility", l.facility);
  read(j, "problem", l.problem);
  read(j, "stop_points", l.stop_points);
  read(j, "stop_parcels", l.stop_parcels);
}

void to_json(json& j, const LinehaulLoad& l) {
  j = json{{"from_label", l.from_label},     {"to_label", l.to_label},
           {"from_facility", l.from_facility}, {"to_facility", l.to_facility},
           {"parcel_units", l.parcel_units}, {"trucks_needed", l.trucks_needed},
           {"distance_km", l.distance_km},   {"parcel_ids", l.parcel_ids}};
}
void from_json(const json& j, LinehaulLoad& l) {
  read(j, "from_label", l.from_label);
  read(j, "to_label", l.to_label);
  read(j, "from_facility", l.from_facility);
  read(j, "to_facility", l.to_facility);
  read(j, "parcel_units", l.parcel_units);
  read(j, "trucks_needed", l.trucks_needed);
  read(j, "distance_km", l.distance_km);
  read(j, "parcel_ids", l.parcel_ids);
}

void to_json(json& j, const Handoff& h) {
  j = json{{"facility", h.facility}, {"point_id", h.point_id}, {"parcel_units", h.parcel_units},
           {"parcel_ids", h.parcel_ids}};
}
void from_json(const json& j, Handoff& h) {
  read(j, "facility", h.facility);
  read(j, "point_id", h.point_id);
  read(j, "parcel_units", h.parcel_units);
  read(j, "parcel_ids", h.parcel_ids);
}

void to_json(json& j, const ParcelPath& p) { j = json{{"parcel_id", p.parcel_id}, {"nodes", p.nodes}}; }
void from_json(const json& j, ParcelPath& p) {
  read(j, "parcel_id", p.parcel_id);
  read(j, "nodes", p.nodes);
}

void to_json(json& j, const ScenarioPlan& p) {
  j = json{{"scenario", p.scenario},       {"facilities", p.facilities},
           {"first_mile", p.first_mile},   {"line_haul", p.line_haul},
           {"last_mile", p.last_mile},     {"handoffs", p.handoffs},
           {"paths", p.paths},             {"cost_attribution", p.cost_attribution},
           {"fleet", p.fleet},             {"linehaul_roundtrip", p.linehaul_roundtrip}};
}
void from_json(const json& j, ScenarioPlan& p) {
  read(j, "scenario", p.scenario);
  read(j, "facilities", p.facilities);
  read(j, "first_mile", p.first_mile);
  read(j, "line_haul", p.line_haul);
  read(j, "last_mile", p.last_mile);
  read(j, "handoffs", p.handoffs);
  read(j, "paths", p.paths);
  read(j, "cost_attribution", p.cost_attribution);
  read(j, "fleet", p.fleet);
  read(j, "linehaul_roundtrip", p.linehaul_roundtrip);
}

void to_json(json& j, const LegResult& r) { j = json{{"facility", r.facility}, {"plan", r.plan}}; }
void from_json(const json& j, LegResult& r) {
  read(j, "facility", r.facility);
  read(j, "plan", r.plan);
}

void to_json(json& j, const ScenarioResult& r) {
  j = json{{"scenario", r.scenario},
           {"first_mile", r.first_mile},
           {"last_mile", r.last_mile},
           {"first_mile_trucks", r.first_mile_trucks},
           {"last_mile_trucks", r.last_mile_trucks},
           {"linehaul_trucks", r.linehaul_trucks},
           {"first_mile_cost", r.first_mile_cost},
           {"last_mile_cost", r.last_mile_cost},
           {"linehaul_cost", r.linehaul_cost},
           {"trucks_used", r.trucks_used},
           {"pickup_cost", r.pickup_cost},
           {"delivery_cost", r.delivery_cost},
           {"total_cost", r.total_cost},
           {"cost_attribution", r.cost_attribution}};
}
void from_json(const json& j, ScenarioResult& r) {
  read(j, "scenario", r.scenario);
  read(j, "first_mile", r.first_mile);
  read(j, "last_mile", r.last_mile);
  read(j, "first_mile_trucks", r.first_mile_trucks);
  read(j, "last_mile_trucks", r.last_mile_trucks);
  read(j, "linehaul_trucks", r.linehaul_trucks);
  read(j, "first_mile_cost", r.first_mile_cost);
  read(j, "last_mile_cost", r.last_mile_cost);
  read(j, "linehaul_cost", r.linehaul_cost);
  read(j, "trucks_used", r.trucks_used);
  read(j, "pickup_cost", r.pickup_cost);
  read(j, "delivery_cost", r.delivery_cost);
  read(j, "total_cost", r.total_cost);
  read(j, "cost_attribution", r.cost_attribution);
}

void to_json(json& j, const ScenarioTotals& t) {
  j = json{{"scenario", t.scenario}, {"trucks", t.trucks}, {"total_cost", t.total_cost},
           {"pickup_cost", t.pickup_cost}, {"delivery_cost", t.delivery_cost}};
}
void from_json(const json& j, ScenarioTotals& t) {
  read(j, "scenario", t.scenario);
  read(j, "trucks", t.trucks);
  read(j, "total_cost", t.total_cost);
  read(j, "pickup_cost", t.pickup_cost);
  read(j, "delivery_cost", t.delivery_cost);
}

void to_json(json& j, const SweepRow& row) {
  j = json{{"c", row.c}, {"metrics", row.metrics}, {"fpc", row.fpc}, {"clustering", row.clustering}};
}

void to_json(json& j, const CapacityStatus& s) {
  j = json{{"cluster", s.cluster}, {"demand", s.demand}, {"within_target", s.within_target}};
  j["target"] = s.target ? json(*s.target) : json(nullptr);
}

void to_json(json& j, const Suggestion& s) {
  j = json{{"point_index", s.point_index}, {"point_id", s.point_id},
           {"current_cluster", s.current_cluster}, {"membership", s.membership},
           {"demand", s.demand}};
  j["delta_cost"] = s.delta_cost ? json(*s.delta_cost) : json(nullptr);
}

json assignment_to_json(const Assignment& a, const std::vector<DemandPoint>& points) {
  json out = json::object();
  for (std::size_t i = 0; i < points.size() && i < a.size(); ++i) out[points[i].id] = a[i];
  return out;
}

Assignment assignment_from_json(const json& j, const std::vector<DemandPoint>& points) {
  if (!j.is_object()) fail(ErrorCode::validation, "assignment must map point id to cluster");
  Assignment a(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!j.contains(points[i].id)) {
      fail(ErrorCode::validation, fmt::format("assignment is missing point '{}'", points[i].id));
    }
    a[i] = j.at(points[i].id).get<std::size_t>();
  }
  if (j.size() != points.size()) {
    std::string extra;
    for (const auto& [id, _] : j.items()) {
      if (std::none_of(points.begin(), points.end(), [&](const DemandPoint& p) { return p.id == id; })) {
        extra += (extra.empty() ? "'" : ", '") + id + "'";
      }
    }
    fail(ErrorCode::validation, fmt::format("assignment names points not in the instance: {}", extra));
  }
  return a;
}

json design_to_json(const NetworkDesign& d, const std::vector<DemandPoint>& points) {
  return json{{"k", d.k},
              {"assignment", assignment_to_json(d.assignment, points)},
              {"hubs", d.hubs},
              {"provenance", to_string(d.provenance)}};
}

NetworkDesign design_from_json(const json& j, const std::vector<DemandPoint>& points) {
  try {
    NetworkDesign d;
    read(j, "k", d.k);
    d.assignment = assignment_from_json(j.at("assignment"), points);
    read(j, "hubs", d.hubs);
    d.provenance = parse_provenance(j.at("provenance").get<std::string>());
    validate(d, points.size());
    return d;
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, std::string("design: ") + e.what());
  }
}

json session_to_json(const SessionState& s, const std::vector<DemandPoint>& points) {
  json j{{"instance_ref", s.instance_ref},
         {"fcm_params", s.fcm_params},
         {"membership", s.base.membership},
         {"centroids", s.base.centroids},
         {"iterations_run", s.base.iterations_run},
         {"converged", s.base.converged},
         {"fpc", s.base.fpc},
         {"gravity_demand", to_string(s.selector)},
         {"current", assignment_to_json(s.current, points)},
         {"history", s.history},
         {"cursor", s.cursor}};
  j["capacity_targets"] = s.capacity_targets ? json(*s.capacity_targets) : json(nullptr);
  return j;
}

SessionState session_from_json(const json& j, const std::vector<DemandPoint>& points) {
  try {
    SessionState s;
    read(j, "instance_ref", s.instance_ref);
    read(j, "fcm_params", s.fcm_params);
    read(j, "membership", s.base.membership);
    read(j, "centroids", s.base.centroids);
    read(j, "iterations_run", s.base.iterations_run);
    read(j, "converged", s.base.converged);
    read(j, "fpc", s.base.fpc);
    s.selector = parse_demand_selector(j.value("gravity_demand", std::string("delivery")));
    s.current = assignment_from_json(j.at("current"), points);
    read(j, "history", s.history);
    read(j, "cursor", s.cursor);
    if (j.contains("capacity_targets") && !j.at("capacity_targets").is_null()) {
      s.capacity_targets = j.at("capacity_targets").get<std::vector<CapacityTarget>>();
    }
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, std::string("session: ") + e.what());
  }
}

}  // namespace hubspoke
