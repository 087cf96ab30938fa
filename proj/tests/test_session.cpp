#include <doctest.h>

#include <string>
#include <vector>

#include "hubspoke/error.hpp"
#include "hubspoke/netdesign.hpp"
#include "hubspoke/serialization.hpp"
#include "hubspoke/session.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace hubspoke;

namespace {

struct Fixture {
  std::vector<DemandPoint> points;
  FuzzyClustering fc;

  explicit Fixture(std::uint64_t seed = 3, std::size_t n = 40, std::size_t c = 4) {
    gen::Rng rng(seed);
    points = gen::points(rng, n);
    FcmParams p;
    p.c = c;
    fc = run_fcm(points, p);
  }

  AssignmentSession open() const { return AssignmentSession(fc, points); }
};

DesignMetrics fresh(const AssignmentSession& s) {
  return approx_cost(s.points(), s.current(), cluster_means(s.points(), s.current(), s.cluster_count()),
                     s.selector());
}

// A random move that keeps the partition valid, or nothing when none exists.
std::optional<std::pair<std::string, std::size_t>> random_move(gen::Rng& rng, const AssignmentSession& s) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto i = rng.index(s.points().size());
    const auto to = rng.index(s.cluster_count());
    const auto from = s.current()[i];
    if (to == from || s.metrics().cluster_sizes[from] <= 1) continue;
    return std::make_pair(s.points()[i].id, to);
  }
  return std::nullopt;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("opening a session") {
    const Fixture fx;
    const auto s = fx.open();
    CHECK(s.cursor() == 0);
    CHECK(s.history().empty());
    CHECK(s.current() == crisp_assignment(fx.fc));
    const auto m = fresh(s);
    CHECK(s.metrics().approx_cost_km == m.approx_cost_km);
    CHECK(s.metrics().cluster_demand == m.cluster_demand);
    CHECK(fx.open().state() == s.state());
    for (auto n : s.metrics().cluster_sizes) CHECK(n > 0);
  }

  TEST_CASE("suggestions are ranked by membership and carry exact deltas") {
    const Fixture fx;
    const auto s = fx.open();
    CHECK(s.suggest(0, 0).empty());
    for (std::size_t c = 0; c < s.cluster_count(); ++c) {
      const auto rows = s.suggest(c, 100);
      std::size_t outside = 0;
      for (auto a : s.current()) outside += a != c;
      CHECK(rows.size() == outside);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        CHECK(rows[r].current_cluster != c);
        CHECK(rows[r].membership == fx.fc.membership(rows[r].point_index, c));
        if (r > 0) CHECK(rows[r - 1].membership >= rows[r].membership);
        REQUIRE(rows[r].delta_cost.has_value());
        auto trial = s.current();
        trial[rows[r].point_index] = c;
        const double after =
            oracle::approx_cost(s.points(), trial, oracle::plain_means(s.points(), trial, s.cluster_count()));
        CHECK(std::abs(*rows[r].delta_cost - (after - s.metrics().approx_cost_km)) <= 1e-9);
      }
    }
    CHECK_THROWS_AS(s.suggest(s.cluster_count(), 3), Error);
  }

  TEST_CASE("suggestion for a singleton's only member has no delta") {
    const std::vector<DemandPoint> pts{{"a", {0, 0}, 1, 1}, {"b", {0, 0.01}, 1, 1}, {"c", {1, 1}, 1, 1}};
    FcmParams p;
    p.c = 2;
    AssignmentSession s(run_fcm(pts, p), pts);
    const auto lone = s.current()[2];
    const auto rows = s.suggest(1 - lone, 5);
    bool seen = false;
    for (const auto& r : rows) {
      if (r.point_id == "c") {
        seen = true;
        CHECK_FALSE(r.delta_cost.has_value());
      }
    }
    CHECK(seen);
  }

  TEST_CASE("rejected moves") {
    const std::vector<DemandPoint> pts{{"a", {0, 0}, 1, 1}, {"b", {0, 0.01}, 1, 1}, {"c", {1, 1}, 1, 1}};
    FcmParams p;
    p.c = 2;
    AssignmentSession s(run_fcm(pts, p), pts);
    const auto lone = s.current()[2];
    CHECK(code_of([&] { s.apply_move("zz", 0); }) == ErrorCode::not_found);
    CHECK(code_of([&] { s.apply_move("a", 7); }) == ErrorCode::validation);
    CHECK_THROWS_WITH(s.apply_move("c", lone), "no-op move");
    CHECK_THROWS_WITH(s.apply_move("c", 1 - lone), "would empty cluster");
    CHECK(code_of([&] { s.apply_move("c", 1 - lone); }) == ErrorCode::conflict);
    CHECK(s.history().empty());
  }

  TEST_CASE("undo and redo") {
    const Fixture fx;
    auto s = fx.open();
    CHECK_FALSE(s.undo());
    CHECK_FALSE(s.redo());
    const auto start = s.state();
    const auto start_metrics = s.metrics().approx_cost_km;

    gen::Rng rng(9);
    const auto a = *random_move(rng, s);
    s.apply_move(a.first, a.second, "x", "2026-01-01T00:00:00Z");
    REQUIRE(s.undo());
    CHECK(s.current() == start.current);
    CHECK(s.metrics().approx_cost_km == start_metrics);

    REQUIRE(s.redo());
    const auto b = *random_move(rng, s);
    s.apply_move(b.first, b.second, "x", "2026-01-01T00:00:01Z");
    const auto after_b = s.current();
    const auto after_b_cost = s.metrics().approx_cost_km;
    REQUIRE(s.undo());
    REQUIRE(s.redo());
    CHECK(s.current() == after_b);
    CHECK(s.metrics().approx_cost_km == after_b_cost);

    // A new move after undo drops the redo tail.
    REQUIRE(s.undo());
    const auto c = *random_move(rng, s);
    s.apply_move(c.first, c.second, "x", "2026-01-01T00:00:02Z");
    CHECK(s.history().size() == 2);
    CHECK(s.cursor() == 2);
    CHECK_FALSE(s.redo());
  }

  TEST_CASE("random moves keep metrics equal to a fresh computation") {
    const Fixture fx(17, 50, 5);
    auto s = fx.open();
    gen::Rng rng(1);
    for (int step = 0; step < 20; ++step) {
      const auto mv = random_move(rng, s);
      REQUIRE(mv);
      s.apply_move(mv->first, mv->second);
      const auto m = fresh(s);
      CHECK(std::abs(s.metrics().approx_cost_km - m.approx_cost_km) <= 1e-9);
      CHECK(std::abs(s.metrics().interhub_km - m.interhub_km) <= 1e-9);
      CHECK(std::abs(s.metrics().demand_cv - m.demand_cv) <= 1e-9);
      CHECK(s.metrics().cluster_sizes == m.cluster_sizes);
    }
  }

  TEST_CASE("undo-all then redo-all reproduces the final state") {
    const Fixture fx(23, 60, 4);
    auto s = fx.open();
    const auto start = s.current();
    gen::Rng rng(50);
    for (int step = 0; step < 50; ++step) {
      const auto mv = random_move(rng, s);
      REQUIRE(mv);
      s.apply_move(mv->first, mv->second, "fuzz", "2026-01-01T00:00:00Z");
    }
    const auto final_state = s.current();
    const auto final_cost = s.metrics().approx_cost_km;
    while (s.undo()) {
    }
    CHECK(s.cursor() == 0);
    CHECK(s.current() == start);
    while (s.redo()) {
    }
    CHECK(s.current() == final_state);
    CHECK(s.metrics().approx_cost_km == final_cost);
  }

  TEST_CASE("finalize") {
    const Fixture fx;
    auto s = fx.open();
    auto d = s.finalize();
    CHECK(d.provenance == Provenance::fcm_argmax);
    CHECK(d.k == s.cluster_count());
    CHECK(d.hubs == place_hubs(s.points(), s.current(), d.k, DemandSelector::delivery));

    gen::Rng rng(2);
    const auto mv = *random_move(rng, s);
    s.apply_move(mv.first, mv.second);
    d = s.finalize();
    CHECK(d.provenance == Provenance::expert_adjusted);
    CHECK(d.assignment == s.current());
    CHECK(d.hubs == place_hubs(s.points(), s.current(), d.k, DemandSelector::delivery));
    CHECK_NOTHROW(validate(d, s.points().size()));
  }

  TEST_CASE("capacity targets are advisory") {
    const Fixture fx(3, 40, 2);
    auto s = fx.open();
    CHECK_THROWS_AS(s.set_capacity_targets(std::vector<CapacityTarget>{{0, 1}}), Error);
    CHECK_THROWS_AS(s.set_capacity_targets(std::vector<CapacityTarget>{{5, 1}, {0, 1}}), Error);
    s.set_capacity_targets(std::vector<CapacityTarget>{{0, 1}, {0, 1e9}});
    const auto st = s.capacity_status();
    REQUIRE(st.size() == 2);
    CHECK_FALSE(st[0].within_target);
    CHECK(st[1].within_target);
    CHECK(st[0].demand == s.metrics().cluster_demand[0]);
    gen::Rng rng(4);
    const auto mv = *random_move(rng, s);
    CHECK_NOTHROW(s.apply_move(mv.first, mv.second));
  }

  TEST_CASE("serialized sessions restore exactly, including history and cursor") {
    const Fixture fx;
    auto s = fx.open();
    s.instance_ref = "inst-1";
    s.set_capacity_targets(std::vector<CapacityTarget>(4, {10, 500}));
    gen::Rng rng(6);
    for (int i = 0; i < 6; ++i) {
      const auto mv = *random_move(rng, s);
      s.apply_move(mv.first, mv.second, "ana", "2026-03-0" + std::to_string(i + 1) + "T10:00:00Z");
    }
    s.undo();
    s.undo();
    const auto doc = session_to_json(s.state(), s.points());
    for (const char* key : {"instance_ref", "fcm_params", "membership", "current", "history", "capacity_targets"}) {
      CHECK(doc.contains(key));
    }
    const auto text = doc.dump();
    const auto back = session_from_json(json::parse(text), fx.points);
    CHECK(back == s.state());
    const auto restored = AssignmentSession::restore(back, fx.points);
    CHECK(restored.state() == s.state());
    CHECK(restored.metrics().approx_cost_km == s.metrics().approx_cost_km);

    auto tampered = back;
    tampered.current[0] = (tampered.current[0] + 1) % 4;
    CHECK_THROWS_AS(AssignmentSession::restore(tampered, fx.points), Error);
  }

  TEST_CASE("timestamps default to UTC ISO-8601") {
    const auto t = utc_timestamp_now();
    REQUIRE(t.size() == 24);
    CHECK(t[4] == '-');
    CHECK(t[10] == 'T');
    CHECK(t.back() == 'Z');
  }
}
