#include "hubspoke/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include <fmt/format.h>

#include "hubspoke/error.hpp"

namespace hubspoke {

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

namespace {

GeoPoint mean_of(std::span<const DemandPoint> points, const Assignment& a, std::size_t cluster) {
  GeoPoint sum{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (a[i] != cluster) continue;
    sum.lat += points[i].pos.lat;
    sum.lon += points[i].pos.lon;
    ++count;
  }
  return GeoPoint{sum.lat / static_cast<double>(count), sum.lon / static_cast<double>(count)};
}

// points.size() when absent
std::size_t point_index(const std::vector<DemandPoint>& points, std::string_view id) {
  const auto it = std::find_if(points.begin(), points.end(),
                               [&](const DemandPoint& p) { return p.id == id; });
  return static_cast<std::size_t>(it - points.begin());
}

}  // namespace

AssignmentSession::AssignmentSession(FuzzyClustering base, std::vector<DemandPoint> points,
                                     DemandSelector selector,
                                     std::optional<std::vector<CapacityTarget>> capacity_targets)
    : base_(std::move(base)), points_(std::move(points)), selector_(selector) {
  const std::size_t k = base_.cluster_count();
  if (base_.membership.rows() != points_.size() || base_.membership.cols() != k) {
    fail(ErrorCode::validation,
         fmt::format("clustering has {}x{} memberships for {} points and {} centroids",
                     base_.membership.rows(), base_.membership.cols(), points_.size(), k));
  }
  current_ = crisp_assignment(base_);
  validate_partition(current_, points_.size(), k);
  set_capacity_targets(std::move(capacity_targets));

  centroids_.assign(k, GeoPoint{});
  intra_km_.assign(k, 0.0);
  metrics_.cluster_demand.assign(k, 0.0);
  metrics_.cluster_sizes.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) refresh_cluster(c);
  refresh_totals();
}

AssignmentSession AssignmentSession::restore(const SessionState& state,
                                             std::vector<DemandPoint> points) {
  AssignmentSession s(state.base, std::move(points), state.selector, state.capacity_targets);
  s.instance_ref = state.instance_ref;
  s.fcm_params = state.fcm_params;
  if (state.cursor > state.history.size()) {
    fail(ErrorCode::validation, "session cursor beyond history length");
  }
  for (const auto& mv : state.history) {
    s.apply_move(mv.point_id, mv.to_cluster, mv.actor, mv.timestamp);
  }
  while (s.cursor_ > state.cursor) s.undo();
  if (s.current_ != state.current) {
    fail(ErrorCode::validation, "stored assignment does not match the replayed history");
  }
  return s;
}

SessionState AssignmentSession::state() const {
  return SessionState{instance_ref, fcm_params, base_, selector_, current_, history_, cursor_, targets_};
}

void AssignmentSession::set_capacity_targets(std::optional<std::vector<CapacityTarget>> targets) {
  if (targets && targets->size() != base_.cluster_count()) {
    fail(ErrorCode::validation, fmt::format("expected {} capacity targets, got {}",
                                            base_.cluster_count(), targets->size()));
  }
  if (targets) {
    for (const auto& t : *targets) {
      if (!(t.min_demand <= t.max_demand)) {
        fail(ErrorCode::validation, "capacity target min_demand exceeds max_demand");
      }
    }
  }
  targets_ = std::move(targets);
}

std::vector<CapacityStatus> AssignmentSession::capacity_status() const {
  std::vector<CapacityStatus> out;
  for (std::size_t c = 0; c < cluster_count(); ++c) {
    CapacityStatus s;
    s.cluster = c;
    s.demand = metrics_.cluster_demand[c];
    if (targets_) {
      s.target = (*targets_)[c];
      s.within_target = s.demand >= s.target->min_demand && s.demand <= s.target->max_demand;
    }
    out.push_back(s);
  }
  return out;
}

void AssignmentSession::refresh_cluster(std::size_t c) {
  centroids_[c] = mean_of(points_, current_, c);
  intra_km_[c] = intracluster_km(points_, current_, c, centroids_[c]);
  double demand = 0.0;
  std::size_t size = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (current_[i] != c) continue;
    demand += demand_of(points_[i], selector_);
    ++size;
  }
  metrics_.cluster_demand[c] = demand;
  metrics_.cluster_sizes[c] = size;
}

void AssignmentSession::refresh_totals() {
  metrics_.interhub_km = interhub_km(centroids_);
  metrics_.intracluster_km = 0.0;
  for (double v : intra_km_) metrics_.intracluster_km += v;
  metrics_.approx_cost_km = metrics_.interhub_km + metrics_.intracluster_km;
  metrics_.demand_cv = coefficient_of_variation(metrics_.cluster_demand);
}

void AssignmentSession::move_point(std::size_t point, std::size_t to) {
  const std::size_t from = current_[point];
  current_[point] = to;
  refresh_cluster(from);
  refresh_cluster(to);
  refresh_totals();
}

double AssignmentSession::cost_after_move(std::size_t point, std::size_t to) const {
  Assignment trial = current_;
  const std::size_t from = trial[point];
  trial[point] = to;
  auto centroids = centroids_;
  centroids[from] = mean_of(points_, trial, from);
  centroids[to] = mean_of(points_, trial, to);
  auto intra = intra_km_;
  intra[from] = intracluster_km(points_, trial, from, centroids[from]);
  intra[to] = intracluster_km(points_, trial, to, centroids[to]);
  double intra_total = 0.0;
  for (double v : intra) intra_total += v;
  return interhub_km(centroids) + intra_total;
}

std::vector<Suggestion> AssignmentSession::suggest(std::size_t cluster, std::size_t limit) const {
  if (cluster >= cluster_count()) {
    fail(ErrorCode::validation, fmt::format("cluster {} outside [0, {})", cluster, cluster_count()));
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (current_[i] != cluster) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return base_.membership(a, cluster) > base_.membership(b, cluster);
  });
  if (candidates.size() > limit) candidates.resize(limit);

  std::vector<Suggestion> out;
  for (auto i : candidates) {
    Suggestion s;
    s.point_index = i;
    s.point_id = points_[i].id;
    s.current_cluster = current_[i];
    s.membership = base_.membership(i, cluster);
    s.demand = demand_of(points_[i], selector_);
    if (metrics_.cluster_sizes[current_[i]] > 1) {
      s.delta_cost = cost_after_move(i, cluster) - metrics_.approx_cost_km;
    }
    out.push_back(std::move(s));
  }
  return out;
}

const DesignMetrics& AssignmentSession::apply_move(std::string_view point_id,
                                                   std::size_t to_cluster, std::string actor,
                                                   std::string timestamp) {
  const std::size_t point = point_index(points_, point_id);
  if (point == points_.size()) fail(ErrorCode::not_found, fmt::format("unknown point '{}'", point_id));
  if (to_cluster >= cluster_count()) {
    fail(ErrorCode::validation,
         fmt::format("cluster {} outside [0, {})", to_cluster, cluster_count()));
  }
  const std::size_t from = current_[point];
  if (from == to_cluster) fail(ErrorCode::conflict, "no-op move");
  if (metrics_.cluster_sizes[from] <= 1) fail(ErrorCode::conflict, "would empty cluster");

  move_point(point, to_cluster);
  history_.resize(cursor_);
  history_.push_back(Move{std::string(point_id), from, to_cluster, std::move(timestamp), std::move(actor)});
  ++cursor_;
  return metrics_;
}

bool AssignmentSession::undo() {
  if (cursor_ == 0) return false;
  const Move& mv = history_[cursor_ - 1];
  move_point(point_index(points_, mv.point_id), mv.from_cluster);
  --cursor_;
  return true;
}

bool AssignmentSession::redo() {
  if (cursor_ >= history_.size()) return false;
  const Move& mv = history_[cursor_];
  move_point(point_index(points_, mv.point_id), mv.to_cluster);
  ++cursor_;
  return true;
}

NetworkDesign AssignmentSession::finalize(ZeroDemandPolicy zero_policy) const {
  NetworkDesign d;
  d.k = cluster_count();
  d.assignment = current_;
  d.hubs = place_hubs(points_, current_, d.k, selector_, zero_policy);
  d.provenance = cursor_ > 0 ? Provenance::expert_adjusted : Provenance::fcm_argmax;
  return d;
}

}  // namespace hubspoke
