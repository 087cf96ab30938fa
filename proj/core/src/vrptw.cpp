#include "hubspoke/vrptw.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hubspoke/error.hpp"

namespace hubspoke {

namespace {

constexpr double kTimeTolerance = 1e-9;
constexpr double kValueTolerance = 1e-6;

}  // namespace

VrptwProblem make_problem(const GeoPoint& depot, std::vector<Stop> stops, double capacity,
                          FleetCost fleet_cost, double shift_start, double shift_end,
                          double speed_kmh, double detour_factor) {
  std::vector<GeoPoint> locations;
  locations.reserve(stops.size() + 1);
  locations.push_back(depot);
  for (const auto& s : stops) locations.push_back(s.location);
  VrptwProblem p;
  p.depot = depot;
  p.stops = std::move(stops);
  p.matrix = build_matrix(locations, speed_kmh, detour_factor);
  p.capacity = capacity;
  p.fleet_cost = fleet_cost;
  p.shift_start = shift_start;
  p.shift_end = shift_end;
  validate(p);
  return p;
}

void validate(const VrptwProblem& p) {
  if (p.matrix.size() != p.stops.size() + 1) {
    fail(ErrorCode::validation, fmt::format("matrix covers {} nodes, expected {}", p.matrix.size(),
                                            p.stops.size() + 1));
  }
  if (!(p.capacity > 0.0)) fail(ErrorCode::validation, "capacity must be > 0");
  if (!(p.fleet_cost.fixed_per_truck >= 0.0) || !(p.fleet_cost.per_km >= 0.0)) {
    fail(ErrorCode::validation, "fleet costs must be >= 0");
  }
  if (!(p.shift_start <= p.shift_end)) fail(ErrorCode::validation, "shift_start after shift_end");
  for (std::size_t i = 0; i < p.stops.size(); ++i) {
    const auto& s = p.stops[i];
    if (!(s.demand >= 0.0) || s.demand > p.capacity) {
      fail(ErrorCode::validation,
           fmt::format("stop {} ('{}'): demand {} outside [0, capacity {}]", i, s.label, s.demand,
                       p.capacity));
    }
    if (!(s.earliest <= s.latest) || s.earliest < p.shift_start || s.latest > p.shift_end) {
      fail(ErrorCode::validation,
           fmt::format("stop {} ('{}'): window [{}, {}] not inside shift [{}, {}]", i, s.label,
                       s.earliest, s.latest, p.shift_start, p.shift_end));
    }
    if (!(s.service_min >= 0.0)) {
      fail(ErrorCode::validation, fmt::format("stop {}: negative service time", i));
    }
  }
}

RoutePlan plan_from_sequences(const VrptwProblem& problem,
                              const std::vector<std::vector<std::size_t>>& sequences) {
  RoutePlan plan;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    Route r;
    r.stops = seq;
    std::size_t prev = 0;
    double clock = problem.shift_start;
    for (auto s : seq) {
      const std::size_t node = s + 1;
      r.km += problem.matrix.distance_km(prev, node);
      const double arrival = clock + problem.matrix.duration_min(prev, node);
      r.arrival.push_back(arrival);
      clock = std::max(arrival, problem.stops[s].earliest) + problem.stops[s].service_min;
      r.load += problem.stops[s].demand;
      prev = node;
    }
    r.km += problem.matrix.distance_km(prev, 0);
    r.return_time = clock + problem.matrix.duration_min(prev, 0);
    plan.total_km += r.km;
    plan.routes.push_back(std::move(r));
  }
  plan.trucks_used = plan.routes.size();
  plan.total_cost = static_cast<double>(plan.trucks_used) * problem.fleet_cost.fixed_per_truck +
                    plan.total_km * problem.fleet_cost.per_km;
  plan.feasible = validate(problem, plan).ok();
  return plan;
}

FeasibilityReport validate(const VrptwProblem& problem, const RoutePlan& plan) {
  FeasibilityReport rep;
  auto add = [&](std::string kind, std::optional<std::size_t> route, std::optional<std::size_t> stop,
                 std::string msg) {
    rep.violations.push_back(Violation{std::move(kind), route, stop, std::move(msg)});
  };
  const std::size_t n = problem.stops.size();
  std::vector<int> seen(n, 0);
  double km_total = 0.0;
  std::size_t non_empty = 0;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const auto& route = plan.routes[r];
    if (route.stops.empty()) {
      add("empty route", r, std::nullopt, fmt::format("route {} has no stops", r));
      continue;
    }
    ++non_empty;
    double load = 0.0, km = 0.0, t = problem.shift_start;
    std::size_t at = 0;
    bool indices_ok = true;
    for (std::size_t pos = 0; pos < route.stops.size(); ++pos) {
      const std::size_t s = route.stops[pos];
      if (s >= n) {
        add("unknown stop", r, s, fmt::format("route {} references stop {} of {}", r, s, n));
        indices_ok = false;
        continue;
      }
      if (++seen[s] == 2) {
        add("duplicate stop", r, s, fmt::format("stop {} ('{}') visited more than once", s,
                                                problem.stops[s].label));
      }
      const auto& st = problem.stops[s];
      km += problem.matrix.distance_km(at, s + 1);
      t += problem.matrix.duration_min(at, s + 1);
      if (t > st.latest + kTimeTolerance) {
        add("time window violated", r, s,
            fmt::format("route {} reaches stop {} ('{}') at {:.3f}, latest {:.3f}", r, s, st.label,
                        t, st.latest));
      }
      if (indices_ok && pos < route.arrival.size() &&
          std::abs(route.arrival[pos] - t) > kValueTolerance) {
        add("arrival mismatch", r, s,
            fmt::format("route {} stop {}: reported arrival {} vs {}", r, s, route.arrival[pos], t));
      }
      t = std::max(t, st.earliest) + st.service_min;
      load += st.demand;
      at = s + 1;
    }
    km += problem.matrix.distance_km(at, 0);
    t += problem.matrix.duration_min(at, 0);
    if (load > problem.capacity + kTimeTolerance) {
      add("capacity exceeded", r, std::nullopt,
          fmt::format("route {} carries {} > capacity {}", r, load, problem.capacity));
    }
    if (t > problem.shift_end + kTimeTolerance) {
      add("shift exceeded", r, std::nullopt,
          fmt::format("route {} returns at {:.3f} after shift end {:.3f}", r, t, problem.shift_end));
    }
    if (route.arrival.size() != route.stops.size()) {
      add("arrival mismatch", r, std::nullopt, fmt::format("route {}: arrival count differs", r));
    }
    if (std::abs(route.load - load) > kValueTolerance) {
      add("load mismatch", r, std::nullopt,
          fmt::format("route {}: reported load {} vs {}", r, route.load, load));
    }
    if (std::abs(route.km - km) > kValueTolerance) {
      add("distance mismatch", r, std::nullopt,
          fmt::format("route {}: reported km {} vs {}", r, route.km, km));
    }
    km_total += km;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s] == 0) {
      add("missing stop", std::nullopt, s,
          fmt::format("stop {} ('{}') is not served", s, problem.stops[s].label));
    }
  }
  if (plan.trucks_used != non_empty) {
    add("truck count mismatch", std::nullopt, std::nullopt,
        fmt::format("plan reports {} trucks for {} non-empty routes", plan.trucks_used, non_empty));
  }
  if (std::abs(plan.total_km - km_total) > kValueTolerance * std::max(1.0, km_total)) {
    add("distance mismatch", std::nullopt, std::nullopt,
        fmt::format("plan reports {} km, routes sum to {}", plan.total_km, km_total));
  }
  const double cost = static_cast<double>(non_empty) * problem.fleet_cost.fixed_per_truck +
                      km_total * problem.fleet_cost.per_km;
  if (std::abs(plan.total_cost - cost) > kValueTolerance * std::max(1.0, cost)) {
    add("cost mismatch", std::nullopt, std::nullopt,
        fmt::format("plan reports cost {}, recomputed {}", plan.total_cost, cost));
  }
  return rep;
}

}  // namespace hubspoke
