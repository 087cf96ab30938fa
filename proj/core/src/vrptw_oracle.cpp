#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "hubspoke/error.hpp"
#include "hubspoke/vrptw.hpp"

namespace hubspoke {

namespace {

// Timing is evaluated here independently of the solver's own routines.
bool route_ok(const VrptwProblem& p, const std::vector<std::size_t>& order, double& km) {
  double t = p.shift_start;
  double load = 0.0;
  std::size_t at = 0;
  km = 0.0;
  for (auto s : order) {
    const auto& st = p.stops[s];
    load += st.demand;
    km += p.matrix.distance_km(at, s + 1);
    t += p.matrix.duration_min(at, s + 1);
    if (t > st.latest + 1e-9) return false;
    t = std::max(t, st.earliest) + st.service_min;
    at = s + 1;
  }
  km += p.matrix.distance_km(at, 0);
  t += p.matrix.duration_min(at, 0);
  return load <= p.capacity + 1e-9 && t <= p.shift_end + 1e-9;
}

}  // namespace

RoutePlan brute_force(const VrptwProblem& problem) {
  validate(problem);
  const std::size_t n = problem.stops.size();
  if (n > kBruteForceMaxStops) {
    fail(ErrorCode::validation,
         fmt::format("brute force refuses {} stops (limit {})", n, kBruteForceMaxStops));
  }
  if (n == 0) return plan_from_sequences(problem, {});

  const std::size_t full = (std::size_t{1} << n) - 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Cheapest feasible single route for every subset of stops.
  std::vector<double> route_cost(full + 1, kInf);
  std::vector<std::vector<std::size_t>> route_order(full + 1);
  for (std::size_t mask = 1; mask <= full; ++mask) {
    std::vector<std::size_t> order;
    double demand = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (mask & (std::size_t{1} << s)) {
        order.push_back(s);
        demand += problem.stops[s].demand;
      }
    }
    if (demand > problem.capacity + 1e-9) continue;
    do {
      double km = 0.0;
      if (!route_ok(problem, order, km)) continue;
      const double c = problem.fleet_cost.fixed_per_truck + problem.fleet_cost.per_km * km;
      if (c < route_cost[mask]) {
        route_cost[mask] = c;
        route_order[mask] = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
  }

  // Set-partition DP; the route holding the lowest remaining stop is chosen
  // first so each partition is counted once.
  std::vector<double> best(full + 1, kInf);
  std::vector<std::size_t> choice(full + 1, 0);
  best[0] = 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const std::size_t low = mask & (~mask + 1);
    for (std::size_t sub = mask; sub; sub = (sub - 1) & mask) {
      if (!(sub & low) || route_cost[sub] == kInf || best[mask ^ sub] == kInf) continue;
      const double c = route_cost[sub] + best[mask ^ sub];
      if (c < best[mask]) {
        best[mask] = c;
        choice[mask] = sub;
      }
    }
  }
  if (best[full] == kInf) fail(ErrorCode::infeasible, "no feasible plan exists");

  std::vector<std::vector<std::size_t>> sequences;
  for (std::size_t mask = full; mask; mask ^= choice[mask]) {
    sequences.push_back(route_order[choice[mask]]);
  }
  return plan_from_sequences(problem, sequences);
}

}  // namespace hubspoke
