#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hubspoke/model.hpp"
#include "hubspoke/vrptw.hpp"

namespace hubspoke {

/// S0 single DC; S1 hubs consolidate for the DC; S2 hubs sort and exchange
/// directly; S3 as S2 with hand-off at the hub for nearby spokes.
enum class ScenarioId { S0, S1, S2, S3 };

inline constexpr std::array<ScenarioId, 4> kAllScenarios = {ScenarioId::S0, ScenarioId::S1,
                                                            ScenarioId::S2, ScenarioId::S3};

std::string_view to_string(ScenarioId id);
ScenarioId parse_scenario(std::string_view text);

inline constexpr std::string_view kCostAttribution =
    "pickup=first_mile+line_haul;delivery=last_mile";

/// A sorting or consolidation site: "DC" or "H<cluster>".
struct Facility {
  std::string label;
  GeoPoint pos;

  friend bool operator==(const Facility&, const Facility&) = default;
};

/// One routing sub-problem rooted at a facility. A spoke whose volume
/// exceeds a truck is split into several stops.
struct RoutingLeg {
  std::string facility;
  VrptwProblem problem;
  std::vector<std::string> stop_points;                // point id per stop
  std::vector<std::vector<std::string>> stop_parcels;  // parcel ids per stop

  friend bool operator==(const RoutingLeg&, const RoutingLeg&) = default;
};

struct LinehaulLoad {
  std::string from_label;
  std::string to_label;
  GeoPoint from_facility;
  GeoPoint to_facility;
  double parcel_units = 0.0;
  std::size_t trucks_needed = 0;  // ceil(units / truck capacity)
  double distance_km = 0.0;
  std::vector<std::string> parcel_ids;

  friend bool operator==(const LinehaulLoad&, const LinehaulLoad&) = default;
};

/// Parcels left at a hub for a nearby spoke to collect (S3).
struct Handoff {
  std::string facility;
  std::string point_id;
  double parcel_units = 0.0;
  std::vector<std::string> parcel_ids;

  friend bool operator==(const Handoff&, const Handoff&) = default;
};

/// Node sequence origin spoke -> facilities -> destination spoke.
struct ParcelPath {
  std::string parcel_id;
  std::vector<std::string> nodes;

  friend bool operator==(const ParcelPath&, const ParcelPath&) = default;
};

struct ScenarioPlan {
  ScenarioId scenario = ScenarioId::S0;
  std::vector<Facility> facilities;
  std::vector<RoutingLeg> first_mile;
  std::vector<LinehaulLoad> line_haul;
  std::vector<RoutingLeg> last_mile;
  std::vector<Handoff> handoffs;
  std::vector<ParcelPath> paths;
  std::string cost_attribution{kCostAttribution};
  FleetSpec fleet;
  bool linehaul_roundtrip = false;

  friend bool operator==(const ScenarioPlan&, const ScenarioPlan&) = default;
};

/// Expands a design into the routing sub-problems and line-haul loads of
/// one scenario. S0 and S1 need the instance depot (central DC).
ScenarioPlan expand(const NetworkDesign& design, const Instance& instance, ScenarioId scenario,
                    const Config& config);

std::size_t trucks_for(double units, double capacity);

/// Sum of trucks * (fixed + km * per_km), km doubled for round trips.
double linehaul_cost(const std::vector<LinehaulLoad>& loads, const FleetSpec& fleet,
                     bool roundtrip = false);

/// Lists every parcel whose path is disconnected or which is missing from,
/// or duplicated in, a stage. Empty when the plan conserves parcels.
std::vector<std::string> check_conservation(const ScenarioPlan& plan, const Instance& instance);

struct LegResult {
  std::string facility;
  RoutePlan plan;

  friend bool operator==(const LegResult&, const LegResult&) = default;
};

struct ScenarioResult {
  ScenarioId scenario = ScenarioId::S0;
  std::vector<LegResult> first_mile;
  std::vector<LegResult> last_mile;
  std::size_t first_mile_trucks = 0;
  std::size_t last_mile_trucks = 0;
  std::size_t linehaul_trucks = 0;
  double first_mile_cost = 0.0;
  double last_mile_cost = 0.0;
  double linehaul_cost = 0.0;
  std::size_t trucks_used = 0;
  double pickup_cost = 0.0;    // first mile + line-haul
  double delivery_cost = 0.0;  // last mile
  double total_cost = 0.0;
  std::string cost_attribution{kCostAttribution};

  friend bool operator==(const ScenarioResult&, const ScenarioResult&) = default;
};

/// Solves every routing leg, up to `jobs` at a time (0 = hardware threads).
ScenarioResult solve_scenario(const ScenarioPlan& plan, const SolveOptions& options,
                              std::size_t jobs = 0);

}  // namespace hubspoke
