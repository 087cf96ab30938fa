#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hubspoke/api.hpp"
#include "hubspoke/serialization.hpp"
#include "hubspoke/session.hpp"
#include "support/tempdir.hpp"

using namespace hubspoke;
using nlohmann::json;

namespace {

Instance small_instance() {
  SyntheticSpec spec;
  spec.n_points = 24;
  spec.parcels_per_day = 150;
  return generate_synthetic(spec).instance;
}

ApiOptions fast_options(std::filesystem::path dir = {}) {
  ApiOptions o;
  o.session_dir = std::move(dir);
  o.solve.max_iterations = 500;
  o.solve.perturbations = 5;
  return o;
}

struct Flow {
  ApiService& api;
  std::string instance_id, clustering_id, session_id;

  explicit Flow(ApiService& service) : api(service) {
    instance_id = api.add_instance(small_instance(), "demo");
    auto r = api.handle("POST", "/api/v1/instances/demo/cluster", {}, R"({"c_min": 2, "c_max": 3})");
    REQUIRE(r.status == 201);
    clustering_id = r.json()["clustering_id"];
    r = api.handle("POST", "/api/v1/sessions", {}, json{{"clustering_id", clustering_id}}.dump());
    REQUIRE(r.status == 201);
    session_id = r.json()["session_id"];
  }

  std::string path(const std::string& tail = "") const { return "/api/v1/sessions/" + session_id + tail; }

  ApiResponse move(const std::string& point, std::size_t to) {
    return api.handle("POST", path("/moves"), {},
                      json{{"point", point}, {"to", to}, {"actor", "t"}, {"timestamp", "2026-01-01T00:00:00Z"}}
                          .dump());
  }
};

}  // namespace

TEST_SUITE("api") {
  TEST_CASE("instances") {
    ApiService api(fast_options());
    CHECK(api.handle("GET", "/api/v1/instances").json()["instances"].empty());
    const auto body = json(small_instance()).dump();
    auto r = api.handle("POST", "/api/v1/instances", {{"id", "x"}}, body);
    CHECK(r.status == 201);
    CHECK(r.json()["id"] == "x");
    CHECK(api.handle("POST", "/api/v1/instances", {{"id", "x"}}, body).status == 409);
    r = api.handle("POST", "/api/v1/instances", {}, body);
    CHECK(r.status == 201);
    CHECK(api.handle("GET", "/api/v1/instances").json()["instances"].size() == 2);
    r = api.handle("GET", "/api/v1/instances/x");
    CHECK(r.status == 200);
    CHECK(r.json()["points"].size() == 24);
    r = api.handle("GET", "/api/v1/instances/nope");
    CHECK(r.status == 404);
    CHECK(r.json()["code"] == "not_found");
    CHECK(api.handle("POST", "/api/v1/instances", {}, "{oops").status == 400);
    CHECK(api.handle("DELETE", "/api/v1/instances/x").status == 404);
    CHECK(api.handle("GET", "/elsewhere").status == 404);
  }

  TEST_CASE("cluster sweep") {
    ApiService api(fast_options());
    api.add_instance(small_instance(), "demo");
    auto r = api.handle("POST", "/api/v1/instances/demo/cluster", {}, R"({"c_min": 2, "c_max": 4})");
    REQUIRE(r.status == 201);
    const auto j = r.json();
    CHECK(j["rows"].size() == 3);
    double best = 1e300;
    for (const auto& row : j["rows"]) best = std::min(best, row["metrics"]["approx_cost_km"].get<double>());
    for (const auto& row : j["rows"]) {
      if (row["c"] == j["best_c"]) CHECK(row["metrics"]["approx_cost_km"].get<double>() == best);
    }
    r = api.handle("GET", "/api/v1/clusterings/" + j["clustering_id"].get<std::string>());
    CHECK(r.status == 200);
    CHECK(r.json()["fcm_params"]["c"] == j["best_c"]);
    r = api.handle("POST", "/api/v1/instances/demo/cluster", {}, R"({"c_min": 5, "c_max": 2})");
    CHECK(r.status == 400);
    CHECK(r.json()["message"] == "empty sweep range");
    r = api.handle("POST", "/api/v1/instances/demo/cluster", {}, R"({"c": 3})");
    CHECK(r.json()["rows"].size() == 1);
  }

  TEST_CASE("session moves mirror a direct session") {
    ApiService api(fast_options());
    Flow f(api);
    const auto clu = api.handle("GET", "/api/v1/clusterings/" + f.clustering_id).json();
    const auto inst = small_instance();
    AssignmentSession direct(clu["clustering"].get<FuzzyClustering>(), inst.points);

    auto view = api.handle("GET", f.path()).json();
    CHECK(view["metrics"]["approx_cost_km"].get<double>() == direct.metrics().approx_cost_km);
    CHECK_FALSE(view["can_undo"].get<bool>());

    auto sug = api.handle("GET", f.path("/suggestions"), {{"cluster", "0"}, {"limit", "3"}});
    REQUIRE(sug.status == 200);
    const auto rows = sug.json()["suggestions"];
    REQUIRE(rows.size() == 3);
    const std::string point = rows[0]["point_id"];

    auto r = f.move(point, 0);
    REQUIRE(r.status == 200);
    direct.apply_move(point, 0, "t", "2026-01-01T00:00:00Z");
    view = r.json();
    CHECK(view["metrics"]["approx_cost_km"].get<double>() == direct.metrics().approx_cost_km);
    CHECK(view["assignment"][point] == 0);
    CHECK(view["history"].size() == 1);
    CHECK(view["can_undo"].get<bool>());

    CHECK(f.move(point, 0).status == 409);
    CHECK(f.move("nope", 0).status == 404);
    CHECK(f.move(point, 99).status == 400);
    CHECK(api.handle("POST", f.path("/moves"), {}, R"({"point": "P01"})").status == 400);

    r = api.handle("POST", f.path("/undo"));
    CHECK(r.status == 200);
    direct.undo();
    CHECK(r.json()["metrics"]["approx_cost_km"].get<double>() == direct.metrics().approx_cost_km);
    r = api.handle("POST", f.path("/undo"));
    CHECK(r.status == 409);
    CHECK(r.json()["message"] == "nothing to undo");
    CHECK(api.handle("POST", f.path("/redo")).status == 200);
    r = api.handle("POST", f.path("/redo"));
    CHECK(r.status == 409);
    CHECK(r.json()["message"] == "nothing to redo");

    CHECK(api.handle("GET", f.path("/suggestions")).status == 400);
    CHECK(api.handle("GET", "/api/v1/sessions/ses-999").status == 404);
  }

  TEST_CASE("capacity targets") {
    ApiService api(fast_options());
    Flow f(api);
    const auto k = api.handle("GET", f.path()).json()["k"].get<std::size_t>();
    json targets = json::array();
    for (std::size_t c = 0; c < k; ++c) targets.push_back({{"min_demand", 0}, {"max_demand", 1}});
    auto r = api.handle("PUT", f.path("/capacity_targets"), {}, json{{"capacity_targets", targets}}.dump());
    REQUIRE(r.status == 200);
    for (const auto& st : r.json()["capacity_status"]) CHECK_FALSE(st["within_target"].get<bool>());
    r = api.handle("PUT", f.path("/capacity_targets"), {}, R"({"capacity_targets": null})");
    CHECK(r.status == 200);
    r = api.handle("PUT", f.path("/capacity_targets"), {}, R"([{"min_demand": 0, "max_demand": 1}])");
    CHECK(r.status == 400);
  }

  TEST_CASE("finalize, solve and compare") {
    ApiService api(fast_options());
    Flow f(api);
    auto r = api.handle("POST", f.path("/finalize"));
    REQUIRE(r.status == 201);
    const std::string design = r.json()["design_id"];
    CHECK(r.json()["design"]["provenance"] == "fcm_argmax");
    const auto base = "/api/v1/designs/" + design;

    r = api.handle("GET", base + "/comparison");
    CHECK(r.status == 409);
    CHECK(r.json()["message"].get<std::string>().find("S0") != std::string::npos);

    r = api.handle("POST", base + "/scenarios/S3/solve", {{"wait", "true"}});
    REQUIRE(r.status == 200);
    CHECK(r.json()["result"]["scenario"] == "S3");

    r = api.handle("POST", base + "/scenarios/S0/solve");
    REQUIRE(r.status == 202);
    const std::string job = r.json()["job_id"];
    api.wait_for_jobs();
    r = api.handle("GET", "/api/v1/jobs/" + job);
    CHECK(r.json()["status"] == "done");
    CHECK(r.json()["result"]["scenario"] == "S0");

    r = api.handle("GET", base + "/comparison", {{"format", "markdown"}});
    REQUIRE(r.status == 200);
    CHECK(r.content_type == "text/markdown");
    CHECK(r.body.find("| S3 |") != std::string::npos);
    r = api.handle("GET", base + "/comparison", {{"format", "csv"}});
    CHECK(r.body.starts_with("scenario,trucks,trucks_ratio"));
    r = api.handle("GET", base + "/comparison");
    CHECK(r.json()["rows"].size() == 2);

    CHECK(api.handle("POST", base + "/scenarios/S9/solve").status == 400);
    CHECK(api.handle("GET", "/api/v1/jobs/job-999").status == 404);
    r = api.handle("GET", base);
    CHECK(r.json()["design_id"] == design);
  }

  TEST_CASE("DC scenarios without a depot fail up front") {
    ApiService api(fast_options());
    auto inst = small_instance();
    inst.depot.reset();
    api.add_instance(inst, "nodepot");
    auto r = api.handle("POST", "/api/v1/instances/nodepot/cluster", {}, R"({"c": 2})");
    r = api.handle("POST", "/api/v1/sessions", {}, json{{"clustering_id", r.json()["clustering_id"]}}.dump());
    const std::string ses = r.json()["session_id"];
    r = api.handle("POST", "/api/v1/sessions/" + ses + "/finalize");
    const std::string design = r.json()["design_id"];
    r = api.handle("POST", "/api/v1/designs/" + design + "/scenarios/S0/solve");
    CHECK(r.status == 400);
    CHECK(r.json()["message"].get<std::string>().find("no depot") != std::string::npos);
  }

  TEST_CASE("state survives a restart") {
    support::TempDir dir("api");
    std::string session, design;
    json before;
    {
      ApiService api(fast_options(dir.path()));
      Flow f(api);
      session = f.session_id;
      const auto sug = api.handle("GET", f.path("/suggestions"), {{"cluster", "1"}}).json();
      REQUIRE(f.move(sug["suggestions"][0]["point_id"], 1).status == 200);
      REQUIRE(f.move(sug["suggestions"][1]["point_id"], 1).status == 200);
      REQUIRE(api.handle("POST", f.path("/undo")).status == 200);
      before = api.handle("GET", f.path()).json();
      design = api.handle("POST", f.path("/finalize")).json()["design_id"];
      REQUIRE(api.handle("POST", "/api/v1/designs/" + design + "/scenarios/S2/solve", {{"wait", "1"}}).status ==
              200);
    }
    ApiService api(fast_options(dir.path()));
    const auto after = api.handle("GET", "/api/v1/sessions/" + session).json();
    CHECK(after == before);
    CHECK(api.handle("POST", "/api/v1/sessions/" + session + "/redo").status == 200);
    const auto d = api.handle("GET", "/api/v1/designs/" + design);
    CHECK(d.status == 200);
    CHECK(d.json()["design"]["provenance"] == "expert_adjusted");
    // Fresh ids do not collide with reloaded ones.
    const auto id = api.add_instance(small_instance());
    CHECK(id != "demo");
    CHECK(api.handle("GET", "/api/v1/instances").json()["instances"].size() == 2);
  }

  TEST_CASE("concurrent clients see one linear history") {
    ApiService api(fast_options());
    Flow f(api);
    const auto view = api.handle("GET", f.path()).json();
    const auto ids = view["point_ids"].get<std::vector<std::string>>();
    const auto k = view["k"].get<std::size_t>();
    std::atomic<int> applied{0};
    std::vector<std::thread> clients;
    for (int t = 0; t < 4; ++t) {
      clients.emplace_back([&, t] {
        for (std::size_t i = 0; i < 25; ++i) {
          const auto& id = ids[(i * 4 + static_cast<std::size_t>(t)) % ids.size()];
          const auto r = api.handle("POST", f.path("/moves"), {},
                                    json{{"point", id}, {"to", (i + static_cast<std::size_t>(t)) % k}}.dump());
          if (r.status == 200) ++applied;
          if (i % 5 == 0) api.handle("POST", f.path("/undo"));
        }
      });
    }
    for (auto& c : clients) c.join();
    const auto after = api.handle("GET", f.path()).json();
    CHECK(applied > 0);
    CHECK(after["history"].size() >= after["cursor"].get<std::size_t>());
    // Replaying the recorded history on a fresh session lands on the same state.
    const auto clu = api.handle("GET", "/api/v1/clusterings/" + f.clustering_id).json();
    const auto inst = small_instance();
    AssignmentSession replay(clu["clustering"].get<FuzzyClustering>(), inst.points);
    const auto history = after["history"].get<std::vector<Move>>();
    for (std::size_t i = 0; i < after["cursor"].get<std::size_t>(); ++i) {
      replay.apply_move(history[i].point_id, history[i].to_cluster, history[i].actor, history[i].timestamp);
    }
    CHECK(json(replay.metrics()) == after["metrics"]);
  }

  TEST_CASE("an S0 job on the seed-42 instance finishes with feasible legs") {
    ApiService api(fast_options());
    api.add_instance(generate_synthetic({}).instance, "seed42");
    auto r = api.handle("POST", "/api/v1/instances/seed42/cluster", {}, R"({"c_min": 2, "c_max": 5})");
    REQUIRE(r.status == 201);
    CHECK(r.json()["best_c"] == 3);
    r = api.handle("POST", "/api/v1/sessions", {}, json{{"clustering_id", r.json()["clustering_id"]}}.dump());
    r = api.handle("POST", "/api/v1/sessions/" + r.json()["session_id"].get<std::string>() + "/finalize");
    const std::string design = r.json()["design_id"];
    r = api.handle("POST", "/api/v1/designs/" + design + "/scenarios/S0/solve");
    REQUIRE(r.status == 202);
    api.wait_for_jobs();
    const auto job = api.handle("GET", "/api/v1/jobs/" + r.json()["job_id"].get<std::string>()).json();
    REQUIRE(job["status"] == "done");
    const auto result = job["result"].get<ScenarioResult>();
    for (const auto& leg : result.first_mile) CHECK(leg.plan.feasible);
    for (const auto& leg : result.last_mile) CHECK(leg.plan.feasible);
    CHECK(result.trucks_used > 0);
  }

  TEST_CASE("http transport with CORS") {
    ApiService api(fast_options());
    api.add_instance(small_instance(), "demo");
    ApiServer server(api, "http://localhost:5173");
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    {
      httplib::Client cli("127.0.0.1", port);
      auto res = cli.Get("/api/v1/instances");
      REQUIRE(res);
      CHECK(res->status == 200);
      CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
      CHECK(json::parse(res->body)["instances"][0] == "demo");
      res = cli.Post("/api/v1/instances/demo/cluster", R"({"c": 2})", "application/json");
      REQUIRE(res);
      CHECK(res->status == 201);
      res = cli.Options("/api/v1/sessions");
      REQUIRE(res);
      CHECK(res->status == 204);
      res = cli.Get("/api/v1/sessions/none");
      REQUIRE(res);
      CHECK(res->status == 404);
    }
    server.stop();
    t.join();
  }
}
