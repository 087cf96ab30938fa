#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hubspoke/geo.hpp"

namespace hubspoke {

struct Stop {
  std::string label;
  GeoPoint location;
  double demand = 0.0;     // capacity units
  double earliest = 0.0;   // minutes
  double latest = 0.0;     // minutes; latest allowed arrival
  double service_min = 0.0;

  friend bool operator==(const Stop&, const Stop&) = default;
};

struct FleetCost {
  double fixed_per_truck = 0.0;
  double per_km = 1.0;

  friend bool operator==(const FleetCost&, const FleetCost&) = default;
};

/// Matrix node 0 is the depot, node i + 1 is stops[i].
struct VrptwProblem {
  GeoPoint depot;
  std::vector<Stop> stops;
  TravelMatrix matrix;
  double capacity = 0.0;
  FleetCost fleet_cost;
  double shift_start = 0.0;
  double shift_end = 0.0;

  friend bool operator==(const VrptwProblem&, const VrptwProblem&) = default;
};

/// Builds the Haversine travel matrix over depot + stops and validates.
VrptwProblem make_problem(const GeoPoint& depot, std::vector<Stop> stops, double capacity,
                          FleetCost fleet_cost, double shift_start, double shift_end,
                          double speed_kmh, double detour_factor);

/// Throws validation errors for broken problem invariants (matrix size,
/// demand above capacity, windows outside the shift).
void validate(const VrptwProblem& problem);

struct Route {
  std::vector<std::size_t> stops;  // indices into VrptwProblem::stops
  std::vector<double> arrival;     // per stop, minutes
  double load = 0.0;
  double km = 0.0;
  double return_time = 0.0;        // arrival back at the depot

  friend bool operator==(const Route&, const Route&) = default;
};

struct RoutePlan {
  std::vector<Route> routes;  // non-empty routes only
  std::size_t trucks_used = 0;
  double total_km = 0.0;
  double total_cost = 0.0;
  bool feasible = false;

  friend bool operator==(const RoutePlan&, const RoutePlan&) = default;
};

/// Trucks leave the depot at shift_start, wait for a window to open, and
/// must reach each stop no later than its `latest` and be back by shift_end.
RoutePlan plan_from_sequences(const VrptwProblem& problem,
                              const std::vector<std::vector<std::size_t>>& sequences);

struct SolveOptions {
  std::chrono::milliseconds time_limit{5000};
  /// Applied improving moves plus perturbation rounds.
  std::size_t max_iterations = 50000;
  /// Ruin-and-recreate rounds after the first local optimum.
  std::size_t perturbations = 100;
  std::uint64_t seed = 7;
};

/// Savings construction with time-window checks, cheapest feasible insertion
/// for stops left on their own, then first-improvement local search
/// (relocate, swap, 2-opt*, intra-route 2-opt) inside an iterated
/// ruin-and-recreate loop. Deterministic for a fixed seed unless the time
/// limit cuts the search short. Throws `infeasible` naming every stop that a
/// dedicated truck cannot serve.
RoutePlan solve(const VrptwProblem& problem, const SolveOptions& options = {});

/// Local search from an existing feasible plan; never returns a worse plan.
RoutePlan improve(const VrptwProblem& problem, const RoutePlan& start,
                  const SolveOptions& options = {});

struct Violation {
  std::string kind;  // "duplicate stop", "capacity exceeded", ...
  std::optional<std::size_t> route;
  std::optional<std::size_t> stop;
  std::string message;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Recomputes coverage, loads, timing and totals from the stop sequences
/// alone and lists every disagreement with the plan.
FeasibilityReport validate(const VrptwProblem& problem, const RoutePlan& plan);

inline constexpr std::size_t kBruteForceMaxStops = 8;

/// Exact optimum by enumerating set partitions and orderings. Refuses more
/// than kBruteForceMaxStops stops.
RoutePlan brute_force(const VrptwProblem& problem);

/// Solomon benchmark text. Coordinates are planar; distances are Euclidean
/// and travel time equals distance, as in the published instances.
VrptwProblem parse_solomon(std::string_view text, FleetCost cost = {0.0, 1.0});

/// Writes a problem in Solomon layout using an equirectangular projection
/// (km) around the depot. Depot ready/due times are the shift bounds.
std::string to_solomon(const VrptwProblem& problem, std::string_view name);

}  // namespace hubspoke
