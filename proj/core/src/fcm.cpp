#include "hubspoke/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include <fmt/format.h>

#include "hubspoke/error.hpp"

namespace hubspoke {

namespace {

constexpr double kSingularDistance = 1e-12;

double euclid(const GeoPoint& a, const GeoPoint& b) { return std::hypot(a.lat - b.lat, a.lon - b.lon); }

Membership random_membership(std::size_t n, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  Membership w(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      // (0, 1]: a zero row would be impossible to normalise
      const double u = (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53;
      w(i, k) = u;
      sum += u;
    }
    for (std::size_t k = 0; k < c; ++k) w(i, k) /= sum;
  }
  return w;
}

void update_membership(std::span<const GeoPoint> points, std::span<const GeoPoint> centroids,
                       double m, Membership& w) {
  const std::size_t c = centroids.size();
  const double exponent = 2.0 / (m - 1.0);
  std::vector<double> d(c);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto row = w.row(i);
    std::size_t singular = c;
    for (std::size_t k = 0; k < c; ++k) {
      d[k] = euclid(points[i], centroids[k]);
      if (singular == c && d[k] < kSingularDistance) singular = k;
    }
    if (singular != c) {
      std::fill(row.begin(), row.end(), 0.0);
      row[singular] = 1.0;
      continue;
    }
    for (std::size_t k = 0; k < c; ++k) {
      double denom = 0.0;
      for (std::size_t l = 0; l < c; ++l) denom += std::pow(d[k] / d[l], exponent);
      row[k] = 1.0 / denom;
    }
  }
}

}  // namespace

void validate(const FcmParams& p) {
  if (p.c < 2) fail(ErrorCode::validation, "cluster count c must be >= 2");
  if (!(p.m > 1.0) || !std::isfinite(p.m)) fail(ErrorCode::validation, "fuzziness m must be > 1");
  if (!(p.error > 0.0) || !std::isfinite(p.error)) {
    fail(ErrorCode::validation, "convergence error must be > 0");
  }
  if (p.maxiter < 1) fail(ErrorCode::validation, "maxiter must be >= 1");
}

std::vector<GeoPoint> fcm_centroids(std::span<const GeoPoint> points, const Membership& w,
                                    double m) {
  std::vector<GeoPoint> centroids(w.cols());
  for (std::size_t k = 0; k < w.cols(); ++k) {
    double num_lat = 0.0, num_lon = 0.0, den = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double wm = std::pow(w(i, k), m);
      num_lat += wm * points[i].lat;
      num_lon += wm * points[i].lon;
      den += wm;
    }
    if (den > 0.0) centroids[k] = GeoPoint{num_lat / den, num_lon / den};
    else centroids[k] = points.empty() ? GeoPoint{} : points[k % points.size()];
  }
  return centroids;
}

FuzzyClustering run_fcm(std::span<const GeoPoint> points, const FcmParams& params,
                        const FcmObserver& observer) {
  validate(params);
  if (points.size() < params.c) fail(ErrorCode::validation, "fewer points than clusters");

  FuzzyClustering fc;
  fc.membership = random_membership(points.size(), params.c, params.seed);
  Membership next = fc.membership;
  for (std::size_t iter = 1; iter <= params.maxiter; ++iter) {
    fc.centroids = fcm_centroids(points, fc.membership, params.m);
    update_membership(points, fc.centroids, params.m, next);
    fc.iterations_run = iter;
    if (observer) observer(iter, next);
    double change = 0.0;
    for (std::size_t j = 0; j < next.values().size(); ++j) {
      change = std::max(change, std::abs(next.values()[j] - fc.membership.values()[j]));
    }
    std::swap(fc.membership, next);
    if (change < params.error) {
      fc.converged = true;
      break;
    }
  }
  fc.fpc = partition_coefficient(fc.membership);
  return fc;
}

FuzzyClustering run_fcm(std::span<const DemandPoint> points, const FcmParams& params,
                        const FcmObserver& observer) {
  std::vector<GeoPoint> xs;
  xs.reserve(points.size());
  for (const auto& p : points) xs.push_back(p.pos);
  return run_fcm(std::span<const GeoPoint>(xs), params, observer);
}

double partition_coefficient(const Membership& w) {
  if (w.rows() == 0) return 0.0;
  // Compensated sum of squares and division, so a uniform matrix gives
  // exactly 1/c instead of drifting by an ulp.
  double hi = 0.0, lo = 0.0;
  for (double v : w.values()) {
    const double p = v * v;
    const double p_err = std::fma(v, v, -p);
    const double s = hi + p;
    const double z = s - hi;
    lo += (hi - (s - z)) + (p - z) + p_err;
    hi = s;
  }
  const double n = static_cast<double>(w.rows());
  const double q = hi / n;
  return q + (std::fma(-q, n, hi) + lo) / n;
}

double partition_coefficient(const FuzzyClustering& fc) {
  return partition_coefficient(fc.membership);
}

Assignment crisp_assignment(const FuzzyClustering& fc) {
  const auto& w = fc.membership;
  const std::size_t n = w.rows();
  const std::size_t c = w.cols();
  Assignment a(n, 0);
  std::vector<std::size_t> sizes(c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (w(i, k) > w(i, best)) best = k;
    }
    a[i] = best;
    ++sizes[best];
  }
  for (std::size_t k = 0; k < c; ++k) {
    if (sizes[k] > 0) continue;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (sizes[a[i]] < 2) continue;
      if (pick == n || w(i, k) > w(pick, k)) pick = i;
    }
    if (pick == n) break;  // fewer points than clusters; caller's validation reports it
    --sizes[a[pick]];
    a[pick] = k;
    ++sizes[k];
  }
  return a;
}

std::vector<SweepRow> sweep_cluster_counts(std::span<const DemandPoint> points,
                                           std::vector<std::size_t> c_values,
                                           const FcmParams& params, DemandSelector selector) {
  if (c_values.empty()) fail(ErrorCode::validation, "empty sweep range");
  std::sort(c_values.begin(), c_values.end());
  c_values.erase(std::unique(c_values.begin(), c_values.end()), c_values.end());
  for (auto c : c_values) {
    FcmParams p = params;
    p.c = c;
    validate(p);
    if (c > points.size()) {
      fail(ErrorCode::validation, fmt::format("fewer points than clusters (c = {})", c));
    }
  }

  std::vector<std::future<SweepRow>> jobs;
  for (auto c : c_values) {
    jobs.push_back(std::async(std::launch::async, [&, c] {
      FcmParams p = params;
      p.c = c;
      SweepRow row;
      row.c = c;
      row.clustering = run_fcm(points, p);
      row.fpc = row.clustering.fpc;
      row.metrics = approx_cost(points, crisp_assignment(row.clustering),
                                row.clustering.centroids, selector);
      return row;
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

const SweepRow& best_row(const std::vector<SweepRow>& rows) {
  if (rows.empty()) fail(ErrorCode::validation, "empty sweep");
  const SweepRow* best = &rows.front();
  for (const auto& r : rows) {
    if (r.metrics.approx_cost_km < best->metrics.approx_cost_km) best = &r;
  }
  return *best;
}

}  // namespace hubspoke
