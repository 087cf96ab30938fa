#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hubspoke/geo.hpp"
#include "hubspoke/model.hpp"

namespace hubspoke {

struct DesignMetrics {
  double approx_cost_km = 0.0;
  double interhub_km = 0.0;       // ordered centroid pairs, each unordered pair twice
  double intracluster_km = 0.0;
  std::vector<double> cluster_demand;
  double demand_cv = 0.0;
  std::vector<std::size_t> cluster_sizes;

  /// Same objective with each centroid pair counted once.
  double approx_cost_unordered_km() const { return intracluster_km + interhub_km / 2.0; }

  friend bool operator==(const DesignMetrics&, const DesignMetrics&) = default;
};

/// Inter-hub term over ordered centroid pairs (k != l), Haversine km.
double interhub_km(std::span<const GeoPoint> centroids);

/// Haversine km from each member of `cluster` to `centroid`, in point order.
double intracluster_km(std::span<const DemandPoint> points, const Assignment& assignment,
                       std::size_t cluster, const GeoPoint& centroid);

/// Approximate transportation cost of a partition plus balance metrics.
/// Throws a conflict error on an empty cluster.
DesignMetrics approx_cost(std::span<const DemandPoint> points, const Assignment& assignment,
                          std::span<const GeoPoint> centroids,
                          DemandSelector selector = DemandSelector::delivery);

/// Plain (unweighted) coordinate mean of each cluster.
std::vector<GeoPoint> cluster_means(std::span<const DemandPoint> points,
                                    const Assignment& assignment, std::size_t k);

/// Demand-weighted mean position of the given points, component-wise on
/// (lat, lon). Zero total demand throws unless the policy asks for the
/// unweighted mean.
GeoPoint center_of_gravity(std::span<const DemandPoint> cluster_points, DemandSelector selector,
                           ZeroDemandPolicy zero_policy = ZeroDemandPolicy::error);

/// Center of gravity per cluster, in cluster index order.
std::vector<GeoPoint> place_hubs(std::span<const DemandPoint> points, const Assignment& assignment,
                                 std::size_t k, DemandSelector selector,
                                 ZeroDemandPolicy zero_policy = ZeroDemandPolicy::error);

/// Population coefficient of variation; 0 when the mean is 0.
double coefficient_of_variation(std::span<const double> values);

}  // namespace hubspoke
