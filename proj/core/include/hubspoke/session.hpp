#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hubspoke/fcm.hpp"
#include "hubspoke/model.hpp"
#include "hubspoke/netdesign.hpp"

namespace hubspoke {

struct Move {
  std::string point_id;
  std::size_t from_cluster = 0;
  std::size_t to_cluster = 0;
  std::string timestamp;  // ISO-8601 UTC
  std::string actor;

  friend bool operator==(const Move&, const Move&) = default;
};

/// Advisory per-cluster demand bounds; violations are reported, never enforced.
struct CapacityTarget {
  double min_demand = 0.0;
  double max_demand = 0.0;

  friend bool operator==(const CapacityTarget&, const CapacityTarget&) = default;
};

struct CapacityStatus {
  std::size_t cluster = 0;
  double demand = 0.0;
  std::optional<CapacityTarget> target;
  bool within_target = true;
};

struct Suggestion {
  std::size_t point_index = 0;
  std::string point_id;
  std::size_t current_cluster = 0;
  double membership = 0.0;  // towards the requested cluster
  double demand = 0.0;
  /// Change of the approximate cost if the point moved; empty when the move
  /// would empty the point's current cluster.
  std::optional<double> delta_cost;
};

/// Persisted form of a session.
struct SessionState {
  std::string instance_ref;
  FcmParams fcm_params;
  FuzzyClustering base;
  DemandSelector selector = DemandSelector::delivery;
  Assignment current;
  std::vector<Move> history;
  std::size_t cursor = 0;
  std::optional<std::vector<CapacityTarget>> capacity_targets;

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

std::string utc_timestamp_now();

/// Editable cluster assignment driven by a domain expert.
///
/// The assignment is always a partition with no empty cluster. Metrics are
/// the approximate transportation cost of the current partition measured
/// against the crisp cluster means; a move only recomputes the two clusters
/// it touches, and the result is identical to a full `approx_cost` call.
/// History is linear: a new move after undo drops the redo tail.
class AssignmentSession {
 public:
  AssignmentSession(FuzzyClustering base, std::vector<DemandPoint> points,
                    DemandSelector selector = DemandSelector::delivery,
                    std::optional<std::vector<CapacityTarget>> capacity_targets = std::nullopt);

  /// Rebuilds a session by replaying the stored history; throws if the
  /// stored assignment disagrees with the replay.
  static AssignmentSession restore(const SessionState& state, std::vector<DemandPoint> points);

  SessionState state() const;

  const FuzzyClustering& base() const { return base_; }
  const std::vector<DemandPoint>& points() const { return points_; }
  const Assignment& current() const { return current_; }
  const std::vector<Move>& history() const { return history_; }
  std::size_t cursor() const { return cursor_; }
  const DesignMetrics& metrics() const { return metrics_; }
  const std::vector<GeoPoint>& centroids() const { return centroids_; }
  std::size_t cluster_count() const { return centroids_.size(); }
  DemandSelector selector() const { return selector_; }

  std::string instance_ref;
  FcmParams fcm_params;

  const std::optional<std::vector<CapacityTarget>>& capacity_targets() const { return targets_; }
  void set_capacity_targets(std::optional<std::vector<CapacityTarget>> targets);
  std::vector<CapacityStatus> capacity_status() const;

  /// Points outside `cluster`, by descending membership towards it (ties by
  /// point order), at most `limit` rows.
  std::vector<Suggestion> suggest(std::size_t cluster, std::size_t limit) const;

  /// Moves a point; throws not_found for unknown ids, validation for a bad
  /// cluster index, conflict for no-op or cluster-emptying moves.
  const DesignMetrics& apply_move(std::string_view point_id, std::size_t to_cluster,
                                  std::string actor = "expert",
                                  std::string timestamp = utc_timestamp_now());

  /// Both return false (and change nothing) at the ends of the history.
  bool undo();
  bool redo();

  NetworkDesign finalize(ZeroDemandPolicy zero_policy = ZeroDemandPolicy::error) const;

 private:
  void move_point(std::size_t point, std::size_t to);
  void refresh_cluster(std::size_t cluster);
  void refresh_totals();
  double cost_after_move(std::size_t point, std::size_t to) const;

  FuzzyClustering base_;
  std::vector<DemandPoint> points_;
  DemandSelector selector_;
  std::optional<std::vector<CapacityTarget>> targets_;

  Assignment current_;
  std::vector<Move> history_;
  std::size_t cursor_ = 0;

  std::vector<GeoPoint> centroids_;
  std::vector<double> intra_km_;
  DesignMetrics metrics_;
};

}  // namespace hubspoke
