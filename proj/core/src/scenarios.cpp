#include "hubspoke/scenarios.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "hubspoke/error.hpp"

namespace hubspoke {

std::string_view to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::S0: return "S0";
    case ScenarioId::S1: return "S1";
    case ScenarioId::S2: return "S2";
    case ScenarioId::S3: return "S3";
  }
  return "S0";
}

ScenarioId parse_scenario(std::string_view text) {
  for (auto id : kAllScenarios) {
    if (to_string(id) == text) return id;
  }
  fail(ErrorCode::validation, fmt::format("unknown scenario '{}' (expected S0..S3)", text));
}

std::size_t trucks_for(double units, double capacity) {
  if (!(units > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(units / capacity - 1e-9));
}

double linehaul_cost(const std::vector<LinehaulLoad>& loads, const FleetSpec& fleet,
                     bool roundtrip) {
  double total = 0.0;
  const double legs = roundtrip ? 2.0 : 1.0;
  for (const auto& l : loads) {
    total += static_cast<double>(l.trucks_needed) *
             (fleet.truck_fixed_cost + l.distance_km * legs * fleet.cost_per_km);
  }
  return total;
}

namespace {

// Parcels grouped per facility, then per spoke, in insertion order.
using SpokeParcels = std::map<std::size_t, std::vector<std::size_t>>;  // point -> parcels

RoutingLeg make_leg(const Facility& facility, const SpokeParcels& spokes, const Instance& inst,
                    const Config& cfg) {
  const auto& fleet = inst.fleet;
  RoutingLeg leg;
  leg.facility = facility.label;
  std::vector<Stop> stops;
  for (const auto& [point, parcels] : spokes) {
    const auto& dp = inst.points[point];
    std::vector<std::string> chunk;
    double units = 0.0;
    std::size_t part = 0;
    auto flush = [&] {
      if (chunk.empty()) return;
      const std::string label = part == 0 ? dp.id : fmt::format("{}#{}", dp.id, part + 1);
      stops.push_back(Stop{label, dp.pos, units, fleet.shift_start_min, fleet.shift_end_min,
                           cfg.service_min});
      leg.stop_points.push_back(dp.id);
      leg.stop_parcels.push_back(std::move(chunk));
      chunk.clear();
      units = 0.0;
      ++part;
    };
    for (auto pi : parcels) {
      const auto& parcel = inst.parcels[pi];
      if (parcel.size > fleet.truck_capacity) {
        fail(ErrorCode::validation, fmt::format("parcel '{}' (size {}) exceeds truck capacity {}",
                                                parcel.id, parcel.size, fleet.truck_capacity));
      }
      if (units + parcel.size > fleet.truck_capacity + 1e-9) flush();
      chunk.push_back(parcel.id);
      units += parcel.size;
    }
    flush();
  }
  leg.problem = make_problem(facility.pos, std::move(stops), fleet.truck_capacity,
                             FleetCost{fleet.truck_fixed_cost, fleet.cost_per_km},
                             fleet.shift_start_min, fleet.shift_end_min, cfg.speed_kmh,
                             cfg.detour_factor);
  return leg;
}

}  // namespace

ScenarioPlan expand(const NetworkDesign& design, const Instance& instance, ScenarioId scenario,
                    const Config& config) {
  validate(config);
  validate(design, instance.points.size());

  ScenarioPlan plan;
  plan.scenario = scenario;
  plan.fleet = instance.fleet;
  plan.linehaul_roundtrip = config.linehaul_roundtrip;

  const bool needs_dc = scenario == ScenarioId::S0 || scenario == ScenarioId::S1;
  if (needs_dc && !instance.depot) {
    fail(ErrorCode::validation,
         fmt::format("scenario {} needs a central DC but the instance has no depot", to_string(scenario)));
  }
  // Facility indices: hubs are 0..k-1, the DC (when present) is k.
  for (std::size_t c = 0; c < design.k; ++c) {
    plan.facilities.push_back(Facility{fmt::format("H{}", c), design.hubs[c]});
  }
  const std::size_t dc = design.k;
  if (instance.depot) plan.facilities.push_back(Facility{"DC", *instance.depot});

  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < instance.points.size(); ++i) index.emplace(instance.points[i].id, i);

  std::map<std::size_t, SpokeParcels> first, last;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> haul;
  std::map<std::size_t, SpokeParcels> handoff;

  for (std::size_t pi = 0; pi < instance.parcels.size(); ++pi) {
    const auto& parcel = instance.parcels[pi];
    const auto o_it = index.find(parcel.origin);
    const auto d_it = index.find(parcel.dest);
    if (o_it == index.end() || d_it == index.end()) {
      fail(ErrorCode::validation, fmt::format("parcel '{}' has an unknown endpoint", parcel.id));
    }
    const std::size_t o = o_it->second, d = d_it->second;
    const std::size_t co = design.assignment[o], cd = design.assignment[d];

    std::vector<std::size_t> route;  // facilities visited, in order
    switch (scenario) {
      case ScenarioId::S0: route = {dc}; break;
      case ScenarioId::S1: route = {co, dc, cd}; break;
      case ScenarioId::S2:
      case ScenarioId::S3:
        route = co == cd ? std::vector<std::size_t>{co} : std::vector<std::size_t>{co, cd};
        break;
    }
    first[route.front()][o].push_back(pi);
    for (std::size_t h = 0; h + 1 < route.size(); ++h) haul[{route[h], route[h + 1]}].push_back(pi);
    const bool handed_off =
        scenario == ScenarioId::S3 &&
        haversine_km(instance.points[d].pos, design.hubs[cd]) <= config.handoff_radius_km;
    if (handed_off) handoff[route.back()][d].push_back(pi);
    else last[route.back()][d].push_back(pi);

    ParcelPath path{parcel.id, {parcel.origin}};
    for (auto f : route) path.nodes.push_back(plan.facilities[f].label);
    path.nodes.push_back(parcel.dest);
    plan.paths.push_back(std::move(path));
  }

  for (const auto& [f, spokes] : first) {
    plan.first_mile.push_back(make_leg(plan.facilities[f], spokes, instance, config));
  }
  for (const auto& [f, spokes] : last) {
    plan.last_mile.push_back(make_leg(plan.facilities[f], spokes, instance, config));
  }
  for (const auto& [f, spokes] : handoff) {
    for (const auto& [point, parcels] : spokes) {
      Handoff h{plan.facilities[f].label, instance.points[point].id, 0.0, {}};
      for (auto pi : parcels) {
        h.parcel_units += instance.parcels[pi].size;
        h.parcel_ids.push_back(instance.parcels[pi].id);
      }
      plan.handoffs.push_back(std::move(h));
    }
  }
  for (const auto& [pair, parcels] : haul) {
    const auto& from = plan.facilities[pair.first];
    const auto& to = plan.facilities[pair.second];
    LinehaulLoad load;
    load.from_label = from.label;
    load.to_label = to.label;
    load.from_facility = from.pos;
    load.to_facility = to.pos;
    for (auto pi : parcels) {
      load.parcel_units += instance.parcels[pi].size;
      load.parcel_ids.push_back(instance.parcels[pi].id);
    }
    load.trucks_needed = trucks_for(load.parcel_units, instance.fleet.truck_capacity);
    load.distance_km = haversine_km(from.pos, to.pos) * config.detour_factor;
    plan.line_haul.push_back(std::move(load));
  }
  return plan;
}

std::vector<std::string> check_conservation(const ScenarioPlan& plan, const Instance& instance) {
  std::vector<std::string> problems;
  struct Seen {
    std::vector<std::pair<std::string, std::string>> first;  // (facility, spoke)
    std::vector<std::pair<std::string, std::string>> last;
    std::vector<std::pair<std::string, std::string>> haul;   // (from, to)
  };
  std::unordered_map<std::string, Seen> seen;
  for (const auto& leg : plan.first_mile) {
    for (std::size_t s = 0; s < leg.stop_parcels.size(); ++s) {
      for (const auto& id : leg.stop_parcels[s]) seen[id].first.emplace_back(leg.facility, leg.stop_points[s]);
    }
  }
  for (const auto& leg : plan.last_mile) {
    for (std::size_t s = 0; s < leg.stop_parcels.size(); ++s) {
      for (const auto& id : leg.stop_parcels[s]) seen[id].last.emplace_back(leg.facility, leg.stop_points[s]);
    }
  }
  for (const auto& h : plan.handoffs) {
    for (const auto& id : h.parcel_ids) seen[id].last.emplace_back(h.facility, h.point_id);
  }
  for (const auto& l : plan.line_haul) {
    for (const auto& id : l.parcel_ids) seen[id].haul.emplace_back(l.from_label, l.to_label);
    if (l.trucks_needed != trucks_for(l.parcel_units, plan.fleet.truck_capacity)) {
      problems.push_back(fmt::format("load {}->{}: truck count does not match units", l.from_label,
                                     l.to_label));
    }
  }

  std::unordered_map<std::string_view, const ParcelPath*> paths;
  for (const auto& p : plan.paths) paths.emplace(p.parcel_id, &p);

  for (const auto& parcel : instance.parcels) {
    const auto pit = paths.find(parcel.id);
    if (pit == paths.end()) {
      problems.push_back(fmt::format("parcel '{}': no path", parcel.id));
      continue;
    }
    const auto& nodes = pit->second->nodes;
    if (nodes.size() < 3 || nodes.front() != parcel.origin || nodes.back() != parcel.dest) {
      problems.push_back(fmt::format("parcel '{}': path does not join origin to destination", parcel.id));
      continue;
    }
    const auto& s = seen[parcel.id];
    if (s.first.size() != 1 || s.first[0] != std::pair{nodes[1], parcel.origin}) {
      problems.push_back(fmt::format("parcel '{}': expected one first-mile pickup at {} from {}, found {}",
                                     parcel.id, nodes[1], parcel.origin, s.first.size()));
    }
    if (s.last.size() != 1 || s.last[0] != std::pair{nodes[nodes.size() - 2], parcel.dest}) {
      problems.push_back(fmt::format("parcel '{}': expected one last-mile delivery from {} to {}, found {}",
                                     parcel.id, nodes[nodes.size() - 2], parcel.dest, s.last.size()));
    }
    std::vector<std::pair<std::string, std::string>> expected_haul;
    for (std::size_t i = 1; i + 2 < nodes.size(); ++i) expected_haul.emplace_back(nodes[i], nodes[i + 1]);
    if (s.haul != expected_haul) {
      problems.push_back(fmt::format("parcel '{}': line-haul legs do not follow its path", parcel.id));
    }
  }
  if (plan.paths.size() != instance.parcels.size()) {
    problems.push_back(fmt::format("{} paths for {} parcels", plan.paths.size(), instance.parcels.size()));
  }
  return problems;
}

ScenarioResult solve_scenario(const ScenarioPlan& plan, const SolveOptions& options,
                              std::size_t jobs) {
  std::vector<const RoutingLeg*> legs;
  for (const auto& l : plan.first_mile) legs.push_back(&l);
  for (const auto& l : plan.last_mile) legs.push_back(&l);

  std::vector<RoutePlan> solved(legs.size());
  std::vector<std::exception_ptr> errors(legs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < legs.size(); i = next++) {
      try {
        solved[i] = solve(legs[i]->problem, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(1, legs.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t i = 0; i < legs.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      fail(e.code(), fmt::format("{} leg at {}: {}", i < plan.first_mile.size() ? "first-mile" : "last-mile",
                                 legs[i]->facility, e.what()));
    }
  }

  ScenarioResult r;
  r.scenario = plan.scenario;
  r.cost_attribution = plan.cost_attribution;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const bool first = i < plan.first_mile.size();
    auto& bucket = first ? r.first_mile : r.last_mile;
    bucket.push_back(LegResult{legs[i]->facility, solved[i]});
    (first ? r.first_mile_trucks : r.last_mile_trucks) += solved[i].trucks_used;
    (first ? r.first_mile_cost : r.last_mile_cost) += solved[i].total_cost;
  }
  for (const auto& l : plan.line_haul) r.linehaul_trucks += l.trucks_needed;
  r.linehaul_cost = linehaul_cost(plan.line_haul, plan.fleet, plan.linehaul_roundtrip);
  r.trucks_used = r.first_mile_trucks + r.last_mile_trucks + r.linehaul_trucks;
  r.pickup_cost = r.first_mile_cost + r.linehaul_cost;
  r.delivery_cost = r.last_mile_cost;
  r.total_cost = r.pickup_cost + r.delivery_cost;
  return r;
}

}  // namespace hubspoke
