#include "hubspoke/geo.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>

#include <fmt/format.h>

#include "hubspoke/error.hpp"

namespace hubspoke {

namespace {

double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

GeoPoint GeoPoint::checked(double lat, double lon) {
  GeoPoint p{lat, lon};
  if (!is_valid(p)) {
    fail(ErrorCode::validation, fmt::format("invalid coordinate ({}, {})", lat, lon));
  }
  return p;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  if (a == b) return 0.0;
  const double dlat = to_radians(b.lat - a.lat);
  const double dlon = to_radians(b.lon - a.lon);
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  double h = s_lat * s_lat + std::cos(to_radians(a.lat)) * std::cos(to_radians(b.lat)) * s_lon * s_lon;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

TravelMatrix TravelMatrix::from_values(std::size_t n, std::vector<double> distance_km,
                                       std::vector<double> duration_min) {
  if (distance_km.size() != n * n || duration_min.size() != n * n) {
    fail(ErrorCode::validation, "travel matrix dimensions do not match location count");
  }
  for (std::size_t i = 0; i < n * n; ++i) {
    if (!(distance_km[i] >= 0.0) || !(duration_min[i] >= 0.0)) {
      fail(ErrorCode::validation, "travel matrix entries must be finite and non-negative");
    }
  }
  TravelMatrix m;
  m.n_ = n;
  m.distance_ = std::move(distance_km);
  m.duration_ = std::move(duration_min);
  return m;
}

TravelMatrix build_matrix(std::span<const GeoPoint> points, double speed_kmh,
                          double detour_factor) {
  if (points.empty()) fail(ErrorCode::validation, "empty location set");
  if (!(speed_kmh > 0.0) || !std::isfinite(speed_kmh)) {
    fail(ErrorCode::validation, "speed_kmh must be positive");
  }
  if (!(detour_factor >= 1.0) || !std::isfinite(detour_factor)) {
    fail(ErrorCode::validation, "detour_factor must be >= 1");
  }
  const std::size_t n = points.size();
  std::vector<double> dist(n * n, 0.0);
  std::vector<double> dur(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double km = haversine_km(points[i], points[j]) * detour_factor;
      const double minutes = km / speed_kmh * 60.0;
      dist[i * n + j] = dist[j * n + i] = km;
      dur[i * n + j] = dur[j * n + i] = minutes;
    }
  }
  return TravelMatrix::from_values(n, std::move(dist), std::move(dur));
}

}  // namespace hubspoke
