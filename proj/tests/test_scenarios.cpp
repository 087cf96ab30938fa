#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "hubspoke/error.hpp"
#include "hubspoke/fcm.hpp"
#include "hubspoke/netdesign.hpp"
#include "hubspoke/scenarios.hpp"
#include "support/oracles.hpp"

using namespace hubspoke;

namespace {

// Two tight groups of three spokes, a depot between them.
struct Small {
  Instance inst;
  NetworkDesign design;
  Config cfg;

  Small() {
    inst.points = {{"A1", {10.80, 106.60}, 1, 1}, {"A2", {10.81, 106.61}, 1, 1}, {"A3", {10.80, 106.62}, 1, 1},
                   {"B1", {10.90, 106.80}, 1, 1}, {"B2", {10.91, 106.81}, 1, 1}, {"B3", {10.90, 106.82}, 1, 1}};
    int n = 0;
    auto add = [&](const char* o, const char* d, double size) {
      inst.parcels.push_back({"p" + std::to_string(++n), o, d, size});
    };
    add("A1", "B1", 10);
    add("A1", "B2", 20);
    add("A2", "A3", 5);
    add("B3", "A2", 7);
    add("B1", "B3", 3);
    add("A3", "B1", 40);
    add("B2", "A1", 2);
    inst.depot = GeoPoint{10.85, 106.70};
    design.k = 2;
    design.assignment = {0, 0, 0, 1, 1, 1};
    design.hubs = place_hubs(inst.points, design.assignment, 2, DemandSelector::delivery);
  }
};

const LinehaulLoad* find_load(const ScenarioPlan& plan, const std::string& from, const std::string& to) {
  for (const auto& l : plan.line_haul) {
    if (l.from_label == from && l.to_label == to) return &l;
  }
  return nullptr;
}

double units_in(const std::vector<RoutingLeg>& legs) {
  double u = 0;
  for (const auto& leg : legs) {
    for (const auto& s : leg.problem.stops) u += s.demand;
  }
  return u;
}

SolveOptions quick() {
  SolveOptions o;
  o.max_iterations = 3000;
  o.perturbations = 20;
  return o;
}

}  // namespace

TEST_SUITE("scenarios") {
  TEST_CASE("scenario ids") {
    for (auto id : kAllScenarios) CHECK(parse_scenario(to_string(id)) == id);
    CHECK_THROWS_AS(parse_scenario("S4"), Error);
  }

  TEST_CASE("trucks_for and line-haul cost") {
    CHECK(trucks_for(0, 150) == 0);
    CHECK(trucks_for(150, 150) == 1);
    CHECK(trucks_for(150.0000001, 150) == 1);
    CHECK(trucks_for(151, 150) == 2);
    FleetSpec fleet;
    fleet.truck_fixed_cost = 100;
    fleet.cost_per_km = 5;
    std::vector<LinehaulLoad> loads(2);
    loads[0].trucks_needed = 2;
    loads[0].distance_km = 10;
    loads[1].trucks_needed = 1;
    loads[1].distance_km = 4;
    CHECK(linehaul_cost(loads, fleet) == 2 * (100 + 50) + (100 + 20));
    CHECK(linehaul_cost(loads, fleet, true) == 2 * (100 + 100) + (100 + 40));
  }

  TEST_CASE("S0 routes everything through the DC") {
    const Small s;
    const auto plan = expand(s.design, s.inst, ScenarioId::S0, s.cfg);
    CHECK(plan.line_haul.empty());
    REQUIRE(plan.first_mile.size() == 1);
    REQUIRE(plan.last_mile.size() == 1);
    CHECK(plan.first_mile[0].facility == "DC");
    CHECK(plan.first_mile[0].problem.depot == *s.inst.depot);
    CHECK(plan.paths[0].nodes == std::vector<std::string>{"A1", "DC", "B1"});
    CHECK(units_in(plan.first_mile) == 87);
    CHECK(units_in(plan.last_mile) == 87);
    CHECK(check_conservation(plan, s.inst).empty());
  }

  TEST_CASE("S1 consolidates at hubs and hauls through the DC") {
    const Small s;
    const auto plan = expand(s.design, s.inst, ScenarioId::S1, s.cfg);
    CHECK(plan.paths[0].nodes == std::vector<std::string>{"A1", "H0", "DC", "H1", "B1"});
    CHECK(plan.paths[2].nodes == std::vector<std::string>{"A2", "H0", "DC", "H0", "A3"});
    const auto* up = find_load(plan, "H0", "DC");
    const auto* down = find_load(plan, "DC", "H1");
    REQUIRE(up);
    REQUIRE(down);
    CHECK(up->parcel_units == 10 + 20 + 5 + 40);
    CHECK(down->parcel_units == 10 + 20 + 3 + 40);
    CHECK(up->distance_km == doctest::Approx(oracle::great_circle_km(s.design.hubs[0], *s.inst.depot) * 1.4)
                                 .epsilon(1e-12));
    CHECK(check_conservation(plan, s.inst).empty());
  }

  TEST_CASE("S2 line-haul tallies match a direct count") {
    const Small s;
    const auto plan = expand(s.design, s.inst, ScenarioId::S2, s.cfg);
    const auto expected = oracle::inter_cluster_units(s.inst, s.design.assignment);
    REQUIRE(plan.line_haul.size() == expected.size());
    for (const auto& [pair, units] : expected) {
      const auto* l = find_load(plan, "H" + std::to_string(pair.first), "H" + std::to_string(pair.second));
      REQUIRE(l);
      CHECK(l->parcel_units == units);
      CHECK(l->trucks_needed == trucks_for(units, s.inst.fleet.truck_capacity));
    }
    CHECK(plan.paths[2].nodes == std::vector<std::string>{"A2", "H0", "A3"});
    CHECK(plan.handoffs.empty());
    CHECK(check_conservation(plan, s.inst).empty());
  }

  TEST_CASE("S3 hands parcels off near the hub") {
    Small s;
    s.cfg.handoff_radius_km = 0;
    const auto none = expand(s.design, s.inst, ScenarioId::S3, s.cfg);
    CHECK(none.handoffs.empty());
    const auto s2 = expand(s.design, s.inst, ScenarioId::S2, s.cfg);
    CHECK(units_in(none.last_mile) == units_in(s2.last_mile));

    s.cfg.handoff_radius_km = 1000;
    const auto all = expand(s.design, s.inst, ScenarioId::S3, s.cfg);
    CHECK(all.last_mile.empty());
    double units = 0;
    for (const auto& h : all.handoffs) units += h.parcel_units;
    CHECK(units == 87);
    CHECK(check_conservation(all, s.inst).empty());

    // Radius between the nearest and farthest spoke of cluster 1.
    std::vector<double> d;
    for (std::size_t i = 3; i < 6; ++i) d.push_back(oracle::great_circle_km(s.inst.points[i].pos, s.design.hubs[1]));
    std::sort(d.begin(), d.end());
    s.cfg.handoff_radius_km = (d[0] + d[1]) / 2;
    const auto some = expand(s.design, s.inst, ScenarioId::S3, s.cfg);
    CHECK_FALSE(some.handoffs.empty());
    CHECK_FALSE(some.last_mile.empty());
    CHECK(check_conservation(some, s.inst).empty());
  }

  TEST_CASE("spokes above truck capacity are split into several stops") {
    Small s;
    s.inst.fleet.truck_capacity = 25;
    s.inst.parcels = {{"x1", "A1", "A2", 20}, {"x2", "A1", "A2", 20}, {"x3", "A1", "A3", 5}};
    const auto plan = expand(s.design, s.inst, ScenarioId::S2, s.cfg);
    REQUIRE(plan.first_mile.size() == 1);
    const auto& leg = plan.first_mile[0];
    REQUIRE(leg.problem.stops.size() == 2);
    CHECK(leg.problem.stops[0].label == "A1");
    CHECK(leg.problem.stops[1].label == "A1#2");
    CHECK(leg.problem.stops[0].demand == 20);
    CHECK(leg.problem.stops[1].demand == 25);
    CHECK(leg.stop_parcels[1] == std::vector<std::string>{"x2", "x3"});
    CHECK(check_conservation(plan, s.inst).empty());

    s.inst.parcels.push_back({"big", "A1", "B1", 26});
    CHECK_THROWS_WITH_AS(expand(s.design, s.inst, ScenarioId::S2, s.cfg), doctest::Contains("big"), Error);
  }

  TEST_CASE("DC scenarios need a depot") {
    Small s;
    s.inst.depot.reset();
    CHECK_THROWS_WITH_AS(expand(s.design, s.inst, ScenarioId::S0, s.cfg), doctest::Contains("no depot"), Error);
    CHECK_THROWS_AS(expand(s.design, s.inst, ScenarioId::S1, s.cfg), Error);
    CHECK_NOTHROW(expand(s.design, s.inst, ScenarioId::S2, s.cfg));
    CHECK_NOTHROW(expand(s.design, s.inst, ScenarioId::S3, s.cfg));
  }

  TEST_CASE("conservation checks catch lost, duplicated and misrouted parcels") {
    const Small s;
    auto plan = expand(s.design, s.inst, ScenarioId::S2, s.cfg);
    auto lost = plan;
    lost.last_mile[0].stop_parcels[0].pop_back();
    CHECK_FALSE(check_conservation(lost, s.inst).empty());
    auto dup = plan;
    dup.first_mile[0].stop_parcels[0].push_back(dup.first_mile[0].stop_parcels[0][0]);
    CHECK_FALSE(check_conservation(dup, s.inst).empty());
    auto cut = plan;
    cut.paths[0].nodes.pop_back();
    CHECK_FALSE(check_conservation(cut, s.inst).empty());
    auto haul = plan;
    haul.line_haul[0].parcel_ids.clear();
    CHECK_FALSE(check_conservation(haul, s.inst).empty());
    auto count = plan;
    count.line_haul[0].trucks_needed += 1;
    CHECK_FALSE(check_conservation(count, s.inst).empty());
  }

  TEST_CASE("solved scenarios add up") {
    const Small s;
    for (auto id : kAllScenarios) {
      const auto plan = expand(s.design, s.inst, id, s.cfg);
      const auto r = solve_scenario(plan, quick(), 1);
      CHECK(r.scenario == id);
      CHECK(r.pickup_cost == doctest::Approx(r.first_mile_cost + r.linehaul_cost).epsilon(1e-12));
      CHECK(r.total_cost == doctest::Approx(r.pickup_cost + r.delivery_cost).epsilon(1e-12));
      CHECK(r.delivery_cost == r.last_mile_cost);
      CHECK(r.trucks_used == r.first_mile_trucks + r.last_mile_trucks + r.linehaul_trucks);
      CHECK(r.linehaul_cost == linehaul_cost(plan.line_haul, plan.fleet));
      for (const auto& leg : r.first_mile) CHECK(leg.plan.feasible);
      CHECK(solve_scenario(plan, quick(), 3) == r);
    }
  }

  TEST_CASE("the seed-42 instance conserves parcels in every scenario") {
    const auto syn = generate_synthetic({});
    const auto fc = run_fcm(syn.instance.points, FcmParams{});
    NetworkDesign d;
    d.k = 3;
    d.assignment = crisp_assignment(fc);
    d.hubs = place_hubs(syn.instance.points, d.assignment, 3, DemandSelector::delivery);
    for (auto id : kAllScenarios) {
      const auto plan = expand(d, syn.instance, id, Config{});
      CHECK(check_conservation(plan, syn.instance).empty());
    }
  }
}
