#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "hubspoke/error.hpp"
#include "hubspoke/model.hpp"

namespace hubspoke {

namespace {

// Distribution code is written out by hand: the standard distributions are
// implementation-defined, and generated instances must be identical across
// standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }
  double normal() {
    // Box-Muller; one draw per call keeps the stream easy to reason about.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double lognormal(double median, double sigma) { return median * std::exp(sigma * normal()); }

  std::size_t weighted(const std::vector<double>& cumulative) {
    const double r = uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                 cumulative.size() - 1);
  }

 private:
  std::mt19937_64 engine_;
};

double round_to_tenth(double v) { return std::max(0.1, std::round(v * 10.0) / 10.0); }

std::string padded_id(char prefix, std::size_t i, std::size_t width) {
  return fmt::format("{}{:0{}}", prefix, i, width);
}

std::size_t digits(std::size_t n) { return fmt::format("{}", n).size(); }

std::vector<double> cumulative(const std::vector<DemandPoint>& points, DemandSelector sel) {
  std::vector<double> c;
  double acc = 0.0;
  for (const auto& p : points) c.push_back(acc += demand_of(p, sel));
  return c;
}

}  // namespace

SyntheticInstance generate_synthetic(const SyntheticSpec& spec) {
  const auto& box = spec.bbox;
  if (!(box.min_lat < box.max_lat) || !(box.min_lon < box.max_lon) ||
      !is_valid({box.min_lat, box.min_lon}) || !is_valid({box.max_lat, box.max_lon})) {
    fail(ErrorCode::validation, "degenerate bounding box");
  }
  if (spec.n_blobs < 1 || spec.n_points < spec.n_blobs) {
    fail(ErrorCode::validation, "need n_points >= n_blobs >= 1");
  }
  if (spec.n_points < 2) fail(ErrorCode::validation, "need at least 2 points");
  if (!(spec.blob_sigma_fraction > 0.0)) fail(ErrorCode::validation, "blob sigma must be > 0");
  validate(spec.fleet);

  Sampler rng(spec.seed);
  const double span_lat = box.max_lat - box.min_lat;
  const double span_lon = box.max_lon - box.min_lon;
  const double span = std::min(span_lat, span_lon);
  const double sigma = spec.blob_sigma_fraction * span;

  SyntheticInstance out;
  out.blob_sigma_deg = sigma;

  double separation = 0.3 * span;
  while (out.blob_centers.size() < spec.n_blobs) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const GeoPoint c{rng.uniform(box.min_lat + 0.15 * span_lat, box.max_lat - 0.15 * span_lat),
                       rng.uniform(box.min_lon + 0.15 * span_lon, box.max_lon - 0.15 * span_lon)};
      const bool far_enough =
          std::all_of(out.blob_centers.begin(), out.blob_centers.end(), [&](const GeoPoint& o) {
            return std::hypot(o.lat - c.lat, o.lon - c.lon) >= separation;
          });
      if (far_enough) {
        out.blob_centers.push_back(c);
        placed = true;
      }
    }
    if (!placed) separation *= 0.8;
  }

  const std::size_t id_width = std::max<std::size_t>(2, digits(spec.n_points));
  auto& points = out.instance.points;
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const std::size_t blob = i < spec.n_blobs ? i : rng.index(spec.n_blobs);
    const GeoPoint& center = out.blob_centers[blob];
    GeoPoint pos{};
    for (int attempt = 0;; ++attempt) {
      pos = GeoPoint{center.lat + sigma * rng.normal(), center.lon + sigma * rng.normal()};
      const bool inside = pos.lat >= box.min_lat && pos.lat <= box.max_lat &&
                          pos.lon >= box.min_lon && pos.lon <= box.max_lon;
      if (inside) break;
      if (attempt == 100) {
        pos.lat = std::clamp(pos.lat, box.min_lat, box.max_lat);
        pos.lon = std::clamp(pos.lon, box.min_lon, box.max_lon);
        break;
      }
    }
    const double pickup = round_to_tenth(rng.lognormal(30.0, 0.6));
    const double delivery = round_to_tenth(rng.lognormal(40.0, 0.5));
    points.push_back(DemandPoint{padded_id('P', i + 1, id_width), pos, pickup, delivery});
    out.blob_of_point.push_back(blob);
  }

  const auto origin_cdf = cumulative(points, DemandSelector::pickup);
  const auto dest_cdf = cumulative(points, DemandSelector::delivery);
  const std::size_t parcel_width = std::max<std::size_t>(4, digits(spec.parcels_per_day));
  for (std::size_t i = 0; i < spec.parcels_per_day; ++i) {
    const std::size_t origin = rng.weighted(origin_cdf);
    std::size_t dest = rng.weighted(dest_cdf);
    for (int attempt = 0; dest == origin && attempt < 100; ++attempt) dest = rng.weighted(dest_cdf);
    if (dest == origin) dest = (origin + 1) % points.size();
    out.instance.parcels.push_back(
        Parcel{padded_id('K', i + 1, parcel_width), points[origin].id, points[dest].id, 1.0});
  }

  out.instance.depot = GeoPoint{(box.min_lat + box.max_lat) / 2.0, (box.min_lon + box.max_lon) / 2.0};
  out.instance.fleet = spec.fleet;
  validate(out.instance);
  return out;
}

}  // namespace hubspoke
