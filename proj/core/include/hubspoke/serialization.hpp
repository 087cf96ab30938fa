#pragma once

// JSON mapping of every domain type. Field names follow the C++ members.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubspoke/error.hpp"
#include "hubspoke/fcm.hpp"
#include "hubspoke/geo.hpp"
#include "hubspoke/model.hpp"
#include "hubspoke/netdesign.hpp"
#include "hubspoke/report.hpp"
#include "hubspoke/scenarios.hpp"
#include "hubspoke/session.hpp"
#include "hubspoke/vrptw.hpp"

namespace hubspoke {

using nlohmann::json;

#define HUBSPOKE_JSON(Type)                 \
  void to_json(json& j, const Type& value); \
  void from_json(const json& j, Type& value);

HUBSPOKE_JSON(GeoPoint)
HUBSPOKE_JSON(TravelMatrix)
HUBSPOKE_JSON(DemandPoint)
HUBSPOKE_JSON(Parcel)
HUBSPOKE_JSON(FleetSpec)
HUBSPOKE_JSON(Instance)
HUBSPOKE_JSON(Config)
HUBSPOKE_JSON(FcmParams)
HUBSPOKE_JSON(Membership)
HUBSPOKE_JSON(FuzzyClustering)
HUBSPOKE_JSON(DesignMetrics)
HUBSPOKE_JSON(Move)
HUBSPOKE_JSON(CapacityTarget)
HUBSPOKE_JSON(Stop)
HUBSPOKE_JSON(FleetCost)
HUBSPOKE_JSON(VrptwProblem)
HUBSPOKE_JSON(Route)
HUBSPOKE_JSON(RoutePlan)
HUBSPOKE_JSON(Facility)
HUBSPOKE_JSON(RoutingLeg)
HUBSPOKE_JSON(LinehaulLoad)
HUBSPOKE_JSON(Handoff)
HUBSPOKE_JSON(ParcelPath)
HUBSPOKE_JSON(ScenarioPlan)
HUBSPOKE_JSON(LegResult)
HUBSPOKE_JSON(ScenarioResult)
HUBSPOKE_JSON(ScenarioTotals)

#undef HUBSPOKE_JSON

void to_json(json& j, const Violation& v);
void to_json(json& j, const FeasibilityReport& r);
void to_json(json& j, const SweepRow& row);
void to_json(json& j, const CapacityStatus& s);
void to_json(json& j, const Suggestion& s);

void to_json(json& j, ScenarioId id);
void from_json(const json& j, ScenarioId& id);

/// Designs and sessions key assignments by point id, so they need the points.
json design_to_json(const NetworkDesign& design, const std::vector<DemandPoint>& points);
NetworkDesign design_from_json(const json& j, const std::vector<DemandPoint>& points);

json session_to_json(const SessionState& state, const std::vector<DemandPoint>& points);
SessionState session_from_json(const json& j, const std::vector<DemandPoint>& points);

json assignment_to_json(const Assignment& a, const std::vector<DemandPoint>& points);
Assignment assignment_from_json(const json& j, const std::vector<DemandPoint>& points);

/// Parses text into T, turning JSON errors into validation errors that
/// name `what`.
template <class T>
T parse_json_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, std::string(what) + ": " + e.what());
  }
}

json parse_json_text(std::string_view text, std::string_view what);

}  // namespace hubspoke
