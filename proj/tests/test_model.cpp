#include <doctest.h>

#include <cmath>
#include <string>

#include "hubspoke/error.hpp"
#include "hubspoke/model.hpp"
#include "hubspoke/serialization.hpp"
#include "support/tempdir.hpp"

using namespace hubspoke;

namespace {

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* kPoints =
    "id,lat,lon,pickup_demand,delivery_demand\n"
    "P01,10.77,106.70,12,30\n"
    "P02,10.80,106.66,8.5,21\n";

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("minimal well-formed file set loads") {
    support::TempDir dir("model");
    write_text_file(dir / "points.csv", kPoints);
    write_text_file(dir / "parcels.csv", "id,origin,dest,size\nK1,P01,P02,1\n");
    const auto inst = load_instance(dir / "points.csv", dir / "parcels.csv", Config{});
    CHECK(inst.points.size() == 2);
    CHECK(inst.parcels.size() == 1);
    CHECK(inst.points[1].pickup_demand == 8.5);
    CHECK(inst.fleet == Config{}.fleet());
    CHECK_FALSE(inst.depot.has_value());
  }

  TEST_CASE("duplicate point id is named") {
    const auto msg = error_of([] {
      parse_points_csv("id,lat,lon,pickup_demand,delivery_demand\nP01,10.7,106.7,1,1\nP01,10.8,106.7,1,1\n");
    });
    CHECK(msg.find("P01") != std::string::npos);
    CHECK(msg.find("row 3") != std::string::npos);
  }

  TEST_CASE("parcel with an unknown endpoint is named") {
    support::TempDir dir("model");
    write_text_file(dir / "points.csv", kPoints);
    write_text_file(dir / "parcels.csv", "id,origin,dest,size\nK1,P01,ZZ,1\n");
    const auto msg = error_of([&] { load_instance(dir / "points.csv", dir / "parcels.csv", Config{}); });
    CHECK(msg.find("ZZ") != std::string::npos);
  }

  TEST_CASE("malformed coordinates report every bad row") {
    const auto msg = error_of([] {
      parse_points_csv(
          "id,lat,lon,pickup_demand,delivery_demand\nP01,abc,106.7,1,1\nP02,10.7,106.7,1,1\nP03,95,106.7,1,1\n");
    });
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("row 4") != std::string::npos);
    CHECK(msg.find("row 3") == std::string::npos);
  }

  TEST_CASE("negative demand and bad parcel size are rejected") {
    CHECK_THROWS_AS(parse_points_csv("id,lat,lon,pickup_demand,delivery_demand\nP01,10.7,106.7,-1,1\n"), Error);
    CHECK_THROWS_AS(parse_parcels_csv("id,origin,dest,size\nK1,P01,P02,0\n"), Error);
  }

  TEST_CASE("intra-point parcels need the config flag") {
    support::TempDir dir("model");
    write_text_file(dir / "points.csv", kPoints);
    write_text_file(dir / "parcels.csv", "id,origin,dest,size\nK1,P01,P01,1\n");
    CHECK_THROWS_AS(load_instance(dir / "points.csv", dir / "parcels.csv", Config{}), Error);
    Config cfg;
    cfg.allow_intra_point = true;
    CHECK(load_instance(dir / "points.csv", dir / "parcels.csv", cfg).parcels.size() == 1);
  }

  TEST_CASE("instance invariants") {
    Instance inst;
    inst.points = parse_points_csv(kPoints);
    CHECK_NOTHROW(validate(inst));
    inst.depot = GeoPoint{10.78, 106.69};
    CHECK_NOTHROW(validate(inst));
    inst.depot = GeoPoint{12.0, 106.69};  // ~135 km north of the box
    CHECK_THROWS_AS(validate(inst), Error);
    inst.depot.reset();
    inst.points.pop_back();
    CHECK_THROWS_WITH_AS(validate(inst), "instance needs at least 2 points", Error);
  }

  TEST_CASE("partition checks") {
    CHECK_NOTHROW(validate_partition({0, 1, 1}, 3, 2));
    try {
      validate_partition({0, 0, 0}, 3, 2);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::conflict);
      CHECK(std::string(e.what()) == "cluster 1 is empty");
    }
    CHECK_THROWS_AS(validate_partition({0, 2}, 2, 2), Error);
    CHECK_THROWS_AS(validate_partition({0}, 2, 1), Error);
  }

  TEST_CASE("CSV and JSON round trips give an equal instance") {
    SyntheticSpec spec;
    spec.seed = 5;
    spec.n_points = 20;
    spec.parcels_per_day = 150;
    const auto inst = generate_synthetic(spec).instance;
    support::TempDir dir("model");

    save_instance_csv(inst, dir / "p.csv", dir / "k.csv");
    Config cfg;
    cfg.depot = inst.depot;
    const auto back = load_instance(dir / "p.csv", dir / "k.csv", cfg);
    CHECK(back == inst);

    save_instance_json(inst, dir / "i.json");
    CHECK(load_instance_json(dir / "i.json") == inst);
  }

  TEST_CASE("instance JSON uses the documented field names") {
    SyntheticSpec spec;
    spec.n_points = 4;
    spec.n_blobs = 2;
    spec.parcels_per_day = 3;
    const json j = generate_synthetic(spec).instance;
    CHECK(j.contains("points"));
    CHECK(j.contains("parcels"));
    CHECK(j.contains("depot"));
    CHECK(j.contains("fleet"));
    CHECK(j["points"][0].contains("pickup_demand"));
    CHECK(j["parcels"][0].contains("origin"));
  }

  TEST_CASE("config files: JSON and key = value") {
    support::TempDir dir("model");
    write_text_file(dir / "a.json", R"({"speed_kmh": 30, "gravity_demand": "total", "allow_intra_point": true})");
    const auto a = load_config(dir / "a.json");
    CHECK(a.speed_kmh == 30);
    CHECK(a.gravity_demand == DemandSelector::total);
    CHECK(a.allow_intra_point);

    write_text_file(dir / "b.toml",
                    "# fleet\ntruck_capacity = 90\ncost_per_km = 2.5 # per km\ngravity_zero_demand = \"mean\"\n");
    const auto b = load_config(dir / "b.toml");
    CHECK(b.truck_capacity == 90);
    CHECK(b.cost_per_km == 2.5);
    CHECK(b.gravity_zero_demand == ZeroDemandPolicy::mean);
    CHECK(b.speed_kmh == Config{}.speed_kmh);

    write_text_file(dir / "c.toml", "speed = 3\n");
    CHECK(error_of([&] { load_config(dir / "c.toml"); }).find("speed") != std::string::npos);
    write_text_file(dir / "d.toml", "speed_kmh = 0\n");
    CHECK_THROWS_AS(load_config(dir / "d.toml"), Error);
    write_text_file(dir / "e.toml", "depot_lat = 10.8\n");
    CHECK_THROWS_AS(load_config(dir / "e.toml"), Error);
    CHECK_THROWS_AS(load_config(dir / "missing.toml"), Error);
  }

  TEST_CASE("missing file is an I/O error") {
    try {
      read_text_file("/nonexistent/hubspoke/file.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
    }
  }

  TEST_CASE("synthetic generator is a pure function of its spec") {
    SyntheticSpec spec;
    spec.seed = 1;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(json(a.instance).dump() == json(b.instance).dump());
    spec.seed = 2;
    CHECK(generate_synthetic(spec).instance != a.instance);
  }

  TEST_CASE("synthetic instance shape") {
    const auto s = generate_synthetic(SyntheticSpec{});
    const auto& inst = s.instance;
    CHECK(inst.points.size() == 77);
    CHECK(inst.parcels.size() == 2000);
    CHECK(s.blob_centers.size() == 3);
    CHECK_NOTHROW(validate(inst));
    CHECK(inst.points.front().id == "P01");
    CHECK(inst.parcels.front().id == "K0001");
    for (const auto& p : inst.parcels) CHECK(p.origin != p.dest);
    for (const auto& p : inst.points) {
      CHECK(p.pos.lat >= 10.70);
      CHECK(p.pos.lat <= 10.90);
      CHECK(p.pickup_demand > 0);
      CHECK(p.delivery_demand > 0);
    }
  }

  TEST_CASE("one tight blob keeps every point within three sigma") {
    SyntheticSpec spec;
    spec.n_blobs = 1;
    spec.blob_sigma_fraction = 0.001;
    const auto s = generate_synthetic(spec);
    const auto c = s.blob_centers.at(0);
    for (const auto& p : s.instance.points) {
      CHECK(std::abs(p.pos.lat - c.lat) <= 3 * s.blob_sigma_deg);
      CHECK(std::abs(p.pos.lon - c.lon) <= 3 * s.blob_sigma_deg);
    }
  }

  TEST_CASE("synthetic preconditions") {
    SyntheticSpec spec;
    spec.bbox.max_lat = spec.bbox.min_lat;
    CHECK_THROWS_WITH_AS(generate_synthetic(spec), "degenerate bounding box", Error);
    spec = SyntheticSpec{};
    spec.n_blobs = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
    spec.n_blobs = 5;
    spec.n_points = 4;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
  }
}
