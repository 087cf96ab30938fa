#include "hubspoke/netdesign.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hubspoke/error.hpp"

namespace hubspoke {

double interhub_km(std::span<const GeoPoint> centroids) {
  double total = 0.0;
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    for (std::size_t l = 0; l < centroids.size(); ++l) {
      if (k != l) total += haversine_km(centroids[k], centroids[l]);
    }
  }
  return total;
}

double intracluster_km(std::span<const DemandPoint> points, const Assignment& assignment,
                       std::size_t cluster, const GeoPoint& centroid) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assignment[i] == cluster) total += haversine_km(centroid, points[i].pos);
  }
  return total;
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return std::sqrt(var) / std::abs(mean);
}

DesignMetrics approx_cost(std::span<const DemandPoint> points, const Assignment& assignment,
                          std::span<const GeoPoint> centroids, DemandSelector selector) {
  const std::size_t k = centroids.size();
  validate_partition(assignment, points.size(), k);

  DesignMetrics m;
  m.cluster_demand.assign(k, 0.0);
  m.cluster_sizes.assign(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.cluster_demand[assignment[i]] += demand_of(points[i], selector);
    ++m.cluster_sizes[assignment[i]];
  }
  m.interhub_km = interhub_km(centroids);
  for (std::size_t c = 0; c < k; ++c) {
    m.intracluster_km += intracluster_km(points, assignment, c, centroids[c]);
  }
  m.approx_cost_km = m.interhub_km + m.intracluster_km;
  m.demand_cv = coefficient_of_variation(m.cluster_demand);
  return m;
}

std::vector<GeoPoint> cluster_means(std::span<const DemandPoint> points,
                                    const Assignment& assignment, std::size_t k) {
  validate_partition(assignment, points.size(), k);
  std::vector<GeoPoint> means(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    means[assignment[i]].lat += points[i].pos.lat;
    means[assignment[i]].lon += points[i].pos.lon;
    ++counts[assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    means[c].lat /= static_cast<double>(counts[c]);
    means[c].lon /= static_cast<double>(counts[c]);
  }
  return means;
}

GeoPoint center_of_gravity(std::span<const DemandPoint> cluster_points, DemandSelector selector,
                           ZeroDemandPolicy zero_policy) {
  if (cluster_points.empty()) fail(ErrorCode::validation, "center of gravity of an empty cluster");
  double total = 0.0;
  for (const auto& p : cluster_points) total += demand_of(p, selector);
  if (!(total > 0.0)) {
    if (zero_policy == ZeroDemandPolicy::error) fail(ErrorCode::validation, "zero-demand cluster");
    GeoPoint mean{};
    for (const auto& p : cluster_points) {
      mean.lat += p.pos.lat;
      mean.lon += p.pos.lon;
    }
    mean.lat /= static_cast<double>(cluster_points.size());
    mean.lon /= static_cast<double>(cluster_points.size());
    return mean;
  }
  GeoPoint hub{};
  for (const auto& p : cluster_points) {
    const double beta = demand_of(p, selector) / total;
    hub.lat += beta * p.pos.lat;
    hub.lon += beta * p.pos.lon;
  }
  return hub;
}

std::vector<GeoPoint> place_hubs(std::span<const DemandPoint> points, const Assignment& assignment,
                                 std::size_t k, DemandSelector selector,
                                 ZeroDemandPolicy zero_policy) {
  validate_partition(assignment, points.size(), k);
  std::vector<std::vector<DemandPoint>> members(k);
  for (std::size_t i = 0; i < points.size(); ++i) members[assignment[i]].push_back(points[i]);
  std::vector<GeoPoint> hubs;
  hubs.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    try {
      hubs.push_back(center_of_gravity(members[c], selector, zero_policy));
    } catch (const Error& e) {
      fail(e.code(), fmt::format("cluster {}: {}", c, e.what()));
    }
  }
  return hubs;
}

}  // namespace hubspoke
