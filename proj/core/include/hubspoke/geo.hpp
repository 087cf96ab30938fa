#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hubspoke {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Latitude/longitude in degrees. Construct through `GeoPoint::checked` when
/// the values come from outside the program.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  static GeoPoint checked(double lat, double lon);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

/// Great-circle distance in km on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Dense n x n distance (km) and duration (minutes) matrices.
class TravelMatrix {
 public:
  TravelMatrix() = default;

  /// Builds from explicit row-major values; both must be n*n.
  static TravelMatrix from_values(std::size_t n, std::vector<double> distance_km,
                                  std::vector<double> duration_min);

  std::size_t size() const { return n_; }
  double distance_km(std::size_t i, std::size_t j) const { return distance_[i * n_ + j]; }
  double duration_min(std::size_t i, std::size_t j) const { return duration_[i * n_ + j]; }

  const std::vector<double>& distance_values() const { return distance_; }
  const std::vector<double>& duration_values() const { return duration_; }

  friend bool operator==(const TravelMatrix&, const TravelMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> distance_;
  std::vector<double> duration_;
};

/// Road distance = haversine * detour_factor; duration at a constant speed.
TravelMatrix build_matrix(std::span<const GeoPoint> points, double speed_kmh,
                          double detour_factor);

}  // namespace hubspoke
