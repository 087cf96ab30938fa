#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hubspoke/error.hpp"
#include "hubspoke/fcm.hpp"
#include "hubspoke/netdesign.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace hubspoke;

namespace {

FuzzyClustering from_rows(const std::vector<std::vector<double>>& rows) {
  FuzzyClustering fc;
  fc.membership = Membership(rows.size(), rows.at(0).size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) fc.membership(i, k) = rows[i][k];
  }
  fc.centroids.resize(rows.at(0).size());
  return fc;
}

FcmParams tight(std::size_t c) {
  FcmParams p;
  p.c = c;
  p.error = 1e-12;
  p.maxiter = 5000;
  return p;
}

}  // namespace

TEST_SUITE("fcm") {
  TEST_CASE("well separated pairs get near-crisp memberships") {
    const std::vector<GeoPoint> pts{{10.0, 106.0}, {10.001, 106.0}, {11.0, 107.0}, {11.001, 107.0}};
    const auto fc = run_fcm(pts, FcmParams{.c = 2});
    const auto a = crisp_assignment(fc);
    CHECK(a[0] == a[1]);
    CHECK(a[2] == a[3]);
    CHECK(a[0] != a[2]);
    for (std::size_t i = 0; i < 4; ++i) CHECK(fc.membership(i, a[i]) >= 0.99);
  }

  TEST_CASE("mirror-symmetric data gives mirrored centroids and an even split in the middle") {
    const std::vector<GeoPoint> pts{{0.0, -1.0}, {0.1, -1.1}, {-0.1, -1.1}, {0.0, 0.0},
                                    {0.0, 1.0},  {0.1, 1.1},  {-0.1, 1.1}};
    const auto fc = run_fcm(pts, tight(2));
    REQUIRE(fc.converged);
    const auto& c = fc.centroids;
    CHECK(std::abs(c[0].lon + c[1].lon) <= 1e-6);
    CHECK(std::abs(c[0].lat - c[1].lat) <= 1e-6);
    CHECK(std::abs(fc.membership(3, 0) - 0.5) <= 1e-6);
    CHECK(std::abs(fc.membership(3, 1) - 0.5) <= 1e-6);
  }

  TEST_CASE("rows stay stochastic at every iteration") {
    gen::Rng rng(8);
    const auto dps = gen::points(rng, 60);
    std::size_t calls = 0;
    FcmParams p;
    p.c = 4;
    run_fcm(dps, p, [&](std::size_t iteration, const Membership& w) {
      CHECK(iteration == ++calls);
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const auto row = w.row(i);
        CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-9);
        for (double v : row) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
      }
    });
    CHECK(calls >= 1);
  }

  TEST_CASE("a point sitting on a centroid gets a one-hot row") {
    // Duplicates collapse onto their centroid; must not produce NaN.
    const std::vector<GeoPoint> pts{{1, 1}, {1, 1}, {1, 1}, {5, 5}, {5, 5}};
    const auto fc = run_fcm(pts, tight(2));
    for (double v : fc.membership.values()) CHECK(std::isfinite(v));
    const auto a = crisp_assignment(fc);
    CHECK(a[0] != a[3]);
    CHECK(fc.membership(0, a[0]) == 1.0);
  }

  TEST_CASE("run is deterministic for a seed") {
    gen::Rng rng(21);
    const auto dps = gen::points(rng, 40);
    FcmParams p;
    p.c = 3;
    CHECK(run_fcm(dps, p) == run_fcm(dps, p));
    auto q = p;
    q.seed = 99;
    CHECK(run_fcm(dps, q).membership != run_fcm(dps, p).membership);
  }

  TEST_CASE("preconditions") {
    const std::vector<GeoPoint> pts{{0, 0}, {1, 1}};
    CHECK_THROWS_WITH_AS(run_fcm(pts, FcmParams{.c = 3}), "fewer points than clusters", Error);
    CHECK_THROWS_AS(run_fcm(pts, FcmParams{.c = 2, .m = 1.0}), Error);
    CHECK_THROWS_AS(run_fcm(pts, FcmParams{.c = 1}), Error);
    CHECK_THROWS_AS(run_fcm(pts, FcmParams{.c = 2, .m = 3, .error = 0}), Error);
    CHECK_THROWS_AS(run_fcm(pts, FcmParams{.c = 2, .m = 3, .error = 0.1, .maxiter = 0}), Error);
  }

  TEST_CASE("one-hot centroid step is the plain mean") {
    gen::Rng rng(4);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
    Membership w(pts.size(), 2);
    double lat = 0, lon = 0;
    int n = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t k = i % 3 == 0 ? 1 : 0;
      w(i, k) = 1.0;
      if (k == 1) {
        lat += pts[i].lat;
        lon += pts[i].lon;
        ++n;
      }
    }
    const auto c = fcm_centroids(pts, w, 3.0);
    CHECK(c[1].lat == doctest::Approx(lat / n).epsilon(1e-14));
    CHECK(c[1].lon == doctest::Approx(lon / n).epsilon(1e-14));
  }

  TEST_CASE("partition coefficient closed forms") {
    for (std::size_t c = 2; c <= 7; ++c) {
      Membership uniform(13, c, 1.0 / static_cast<double>(c));
      CHECK(partition_coefficient(uniform) == 1.0 / static_cast<double>(c));

      Membership onehot(13, c);
      for (std::size_t i = 0; i < 13; ++i) onehot(i, i % c) = 1.0;
      CHECK(partition_coefficient(onehot) == 1.0);
    }
  }

  TEST_CASE("partition coefficient matches the double-loop oracle") {
    gen::Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      const auto c = rng.between(2, 6);
      const auto w = gen::membership(rng, rng.between(1, 50), c);
      const double fpc = partition_coefficient(w);
      CHECK(std::abs(fpc - oracle::partition_coefficient(w)) <= 1e-12);
      CHECK(fpc >= 1.0 / static_cast<double>(c) - 1e-12);
      CHECK(fpc <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("crisp assignment tie rule and repair") {
    CHECK(crisp_assignment(from_rows({{0.7, 0.3}, {0.2, 0.8}})) == Assignment{0, 1});
    CHECK(crisp_assignment(from_rows({{0.5, 0.5}, {0.1, 0.9}})) == Assignment{0, 1});
    // Cluster 2 wins no argmax; the point leaning most towards it moves.
    const auto a = crisp_assignment(from_rows({{0.6, 0.1, 0.3}, {0.5, 0.1, 0.4}, {0.1, 0.8, 0.1}}));
    CHECK(a == Assignment{0, 2, 1});
  }

  TEST_CASE("relabelling clusters leaves fpc and the induced cost unchanged") {
    gen::Rng rng(5);
    const auto dps = gen::points(rng, 30);
    FcmParams p;
    p.c = 3;
    const auto fc = run_fcm(dps, p);
    const std::vector<std::size_t> perm{2, 0, 1};
    FuzzyClustering swapped = fc;
    for (std::size_t i = 0; i < dps.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) swapped.membership(i, perm[k]) = fc.membership(i, k);
    }
    for (std::size_t k = 0; k < 3; ++k) swapped.centroids[perm[k]] = fc.centroids[k];
    CHECK(partition_coefficient(swapped) == doctest::Approx(partition_coefficient(fc)).epsilon(1e-15));
    const auto a = crisp_assignment(fc);
    const auto b = crisp_assignment(swapped);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == perm[a[i]]);
    CHECK(approx_cost(dps, b, swapped.centroids).approx_cost_km ==
          doctest::Approx(approx_cost(dps, a, fc.centroids).approx_cost_km).epsilon(1e-12));
  }

  TEST_CASE("sweep has one row per c, in order") {
    const auto s = generate_synthetic(SyntheticSpec{});
    const auto rows = sweep_cluster_counts(s.instance.points, {2, 3, 4, 5}, FcmParams{});
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].c == i + 2);
      CHECK(rows[i].clustering.cluster_count() == i + 2);
      CHECK(rows[i].fpc == rows[i].clustering.fpc);
      const auto a = crisp_assignment(rows[i].clustering);
      CHECK(rows[i].metrics.approx_cost_km ==
            approx_cost(s.instance.points, a, rows[i].clustering.centroids).approx_cost_km);
    }
    CHECK_THROWS_WITH_AS(sweep_cluster_counts(s.instance.points, {}, FcmParams{}), "empty sweep range", Error);
  }

  TEST_CASE("three-blob instance: argmax labels recover the blobs") {
    const auto s = generate_synthetic(SyntheticSpec{});
    FcmParams p;
    p.c = 3;
    const auto fc = run_fcm(s.instance.points, p);
    const auto labels = crisp_assignment(fc);
    CHECK(oracle::adjusted_rand_index(labels, s.blob_of_point) >= 0.95);
    std::vector<std::size_t> sizes(3, 0);
    for (auto l : labels) ++sizes[l];
    for (auto n : sizes) CHECK(n > 0);
  }
}
