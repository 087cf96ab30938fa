#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hubspoke/geo.hpp"
#include "hubspoke/model.hpp"
#include "hubspoke/netdesign.hpp"

namespace hubspoke {

struct FcmParams {
  std::size_t c = 3;
  double m = 3.0;
  double error = 0.002;
  std::size_t maxiter = 1000;
  std::uint64_t seed = 12345;

  friend bool operator==(const FcmParams&, const FcmParams&) = default;
};

void validate(const FcmParams& params);

/// Row-major N x c matrix of membership degrees.
class Membership {
 public:
  Membership() = default;
  Membership(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& values() const { return data_; }

  friend bool operator==(const Membership&, const Membership&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct FuzzyClustering {
  Membership membership;
  std::vector<GeoPoint> centroids;
  std::size_t iterations_run = 0;
  bool converged = false;
  double fpc = 0.0;

  std::size_t cluster_count() const { return centroids.size(); }

  friend bool operator==(const FuzzyClustering&, const FuzzyClustering&) = default;
};

/// Called after each membership update with the 1-based iteration number.
using FcmObserver = std::function<void(std::size_t iteration, const Membership&)>;

/// Fuzzy c-means with Euclidean distance on (lat, lon) degrees.
///
/// Memberships start uniform-random (row-normalised) from an mt19937_64
/// seeded with params.seed. Each iteration recomputes centroids as
/// membership^m weighted means, then memberships as
/// w_k = 1 / sum_l (d_k / d_l)^(2/(m-1)). A point closer than 1e-12 to a
/// centroid gets a one-hot row. Iteration stops once the largest absolute
/// membership change drops below params.error, or after params.maxiter.
FuzzyClustering run_fcm(std::span<const GeoPoint> points, const FcmParams& params,
                        const FcmObserver& observer = {});
FuzzyClustering run_fcm(std::span<const DemandPoint> points, const FcmParams& params,
                        const FcmObserver& observer = {});

/// Centroid step on its own: membership^m weighted mean per cluster.
std::vector<GeoPoint> fcm_centroids(std::span<const GeoPoint> points, const Membership& w,
                                    double m);

/// (1/N) * sum of squared memberships.
double partition_coefficient(const Membership& w);
double partition_coefficient(const FuzzyClustering& fc);

/// Argmax per row, lowest index on ties. Any cluster left empty then takes
/// the point with the highest membership towards it, among points whose
/// current cluster keeps at least one member.
Assignment crisp_assignment(const FuzzyClustering& fc);

struct SweepRow {
  std::size_t c = 0;
  DesignMetrics metrics;  // approximate cost of the argmax partition with FCM centroids
  double fpc = 0.0;
  FuzzyClustering clustering;
};

/// Runs FCM once per c (concurrently), rows ordered by c.
std::vector<SweepRow> sweep_cluster_counts(std::span<const DemandPoint> points,
                                           std::vector<std::size_t> c_values,
                                           const FcmParams& params,
                                           DemandSelector selector = DemandSelector::delivery);

/// Row with the smallest approximate cost (first on ties).
const SweepRow& best_row(const std::vector<SweepRow>& rows);

}  // namespace hubspoke
