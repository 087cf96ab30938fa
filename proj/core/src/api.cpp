#include "hubspoke/api.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>

#include "hubspoke/error.hpp"
#include "hubspoke/fcm.hpp"
#include "hubspoke/report.hpp"
#include "hubspoke/scenarios.hpp"
#include "hubspoke/serialization.hpp"
#include "hubspoke/session.hpp"

namespace hubspoke {

namespace {

namespace fs = std::filesystem;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::infeasible: return 422;
    case ErrorCode::io:
    case ErrorCode::internal: return 500;
  }
  return 500;
}

json error_body(ErrorCode code, std::string_view message, json details = json::object()) {
  // Storage failures surface as internal errors; the wire enum has no io code.
  const auto wire = code == ErrorCode::io ? ErrorCode::internal : code;
  return json{{"code", to_string(wire)}, {"message", message}, {"details", std::move(details)}};
}

ApiResponse reply(int status, const json& body) {
  return ApiResponse{status, "application/json", body.dump()};
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const auto slash = path.find('/');
    const auto part = path.substr(0, slash);
    if (!part.empty()) parts.push_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

std::size_t parse_index(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    fail(ErrorCode::validation, fmt::format("{} must be a non-negative integer, got '{}'", what, text));
  }
  return value;
}

// Atomic replace so a crash never leaves a half-written record.
void persist(const fs::path& path, const json& doc) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  write_text_file(tmp, doc.dump(1));
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io, fmt::format("cannot write {}: {}", path.string(), ec.message()));
}

class WorkerPool {
 public:
  explicit WorkerPool(std::size_t n) {
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
      threads_.emplace_back([this](std::stop_token st) { run(st); });
    }
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
  }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(task));
      ++pending_;
    }
    cv_.notify_one();
  }

  void wait_idle() {
    std::unique_lock lock(mu_);
    idle_.wait(lock, [this] { return pending_ == 0; });
  }

 private:
  void run(std::stop_token) {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
      {
        std::lock_guard lock(mu_);
        --pending_;
      }
      idle_.notify_all();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> queue_;
  std::size_t pending_ = 0;
  bool stopping_ = false;
  std::vector<std::jthread> threads_;
};

struct ClusteringRecord {
  std::string instance_id;
  FcmParams params;
  DemandSelector selector = DemandSelector::delivery;
  FuzzyClustering clustering;
};

struct SessionRecord {
  std::string clustering_id;
  std::shared_ptr<const Instance> instance;
  mutable std::shared_mutex mu;
  AssignmentSession session;

  SessionRecord(std::string clu, std::shared_ptr<const Instance> inst, AssignmentSession s)
      : clustering_id(std::move(clu)), instance(std::move(inst)), session(std::move(s)) {}
};

struct DesignRecord {
  std::string instance_id;
  std::string session_id;
  NetworkDesign design;
  std::mutex mu;
  std::map<ScenarioId, ScenarioResult> results;
};

struct Job {
  std::string design_id;
  ScenarioId scenario = ScenarioId::S0;
  std::string status = "queued";
  json result;
  json error;
};

}  // namespace

struct ApiService::Impl {
  ApiOptions options;

  std::shared_mutex registry_mu;
  std::map<std::string, std::shared_ptr<const Instance>> instances;
  std::map<std::string, std::shared_ptr<const ClusteringRecord>> clusterings;
  std::map<std::string, std::shared_ptr<SessionRecord>> sessions;
  std::map<std::string, std::shared_ptr<DesignRecord>> designs;

  std::mutex jobs_mu;
  std::map<std::string, Job> jobs;

  std::atomic<std::uint64_t> next_id{1};
  WorkerPool pool;

  explicit Impl(ApiOptions opts)
      : options(std::move(opts)), pool(options.solver_workers) {
    if (!options.session_dir.empty()) load_all();
  }

  std::string fresh_id(std::string_view prefix) {
    return fmt::format("{}-{}", prefix, next_id.fetch_add(1));
  }

  // ------------------------------------------------------------------ storage

  fs::path record_path(std::string_view kind, std::string_view id) const {
    return options.session_dir / kind / (std::string(id) + ".json");
  }

  void save(std::string_view kind, std::string_view id, const json& doc) const {
    if (options.session_dir.empty()) return;
    persist(record_path(kind, id), doc);
  }

  void bump_counter(std::string_view id) {
    const auto dash = id.rfind('-');
    if (dash == std::string_view::npos) return;
    std::uint64_t n = 0;
    const auto tail = id.substr(dash + 1);
    if (std::from_chars(tail.data(), tail.data() + tail.size(), n).ec != std::errc{}) return;
    auto cur = next_id.load();
    while (cur <= n && !next_id.compare_exchange_weak(cur, n + 1)) {
    }
  }

  template <class F>
  void for_each_record(std::string_view kind, F&& f) {
    const auto dir = options.session_dir / kind;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const auto id = file.stem().string();
      f(id, parse_json_text(read_text_file(file), file.string()));
      bump_counter(id);
    }
  }

  void load_all() {
    for_each_record("instances", [&](const std::string& id, const json& j) {
      instances[id] = std::make_shared<const Instance>(j.get<Instance>());
    });
    for_each_record("clusterings", [&](const std::string& id, const json& j) {
      auto rec = std::make_shared<ClusteringRecord>();
      rec->instance_id = j.at("instance_id").get<std::string>();
      rec->params = j.at("fcm_params").get<FcmParams>();
      rec->selector = parse_demand_selector(j.at("gravity_demand").get<std::string>());
      rec->clustering = j.at("clustering").get<FuzzyClustering>();
      clusterings[id] = std::move(rec);
    });
    for_each_record("sessions", [&](const std::string& id, const json& j) {
      const auto inst = instance(j.at("instance_ref").get<std::string>());
      auto state = session_from_json(j, inst->points);
      auto session = AssignmentSession::restore(state, inst->points);
      sessions[id] = std::make_shared<SessionRecord>(j.value("clustering_id", std::string{}), inst,
                                                     std::move(session));
    });
    for_each_record("designs", [&](const std::string& id, const json& j) {
      auto rec = std::make_shared<DesignRecord>();
      rec->instance_id = j.at("instance_id").get<std::string>();
      rec->session_id = j.value("session_id", std::string{});
      rec->design = design_from_json(j.at("design"), instance(rec->instance_id)->points);
      if (j.contains("results")) {
        for (const auto& [sid, r] : j.at("results").items()) {
          rec->results.emplace(parse_scenario(sid), r.get<ScenarioResult>());
        }
      }
      designs[id] = std::move(rec);
    });
  }

  json session_document(std::string_view id, const SessionRecord& rec) const {
    auto doc = session_to_json(rec.session.state(), rec.instance->points);
    doc["clustering_id"] = rec.clustering_id;
    doc["id"] = id;
    return doc;
  }

  json design_document(const DesignRecord& rec) const {
    const auto& points = instances.at(rec.instance_id)->points;
    json results = json::object();
    for (const auto& [sid, r] : rec.results) results[std::string(to_string(sid))] = r;
    return json{{"instance_id", rec.instance_id},
                {"session_id", rec.session_id},
                {"design", design_to_json(rec.design, points)},
                {"results", std::move(results)}};
  }

  // ------------------------------------------------------------------ lookup

  template <class Map>
  typename Map::mapped_type find(Map& map, std::string_view kind, std::string_view id) {
    std::shared_lock lock(registry_mu);
    const auto it = map.find(std::string(id));
    if (it == map.end()) fail(ErrorCode::not_found, fmt::format("unknown {} '{}'", kind, id));
    return it->second;
  }

  std::shared_ptr<const Instance> instance(std::string_view id) {
    const auto it = instances.find(std::string(id));
    if (it == instances.end()) fail(ErrorCode::not_found, fmt::format("unknown instance '{}'", id));
    return it->second;
  }

  // ------------------------------------------------------------------ views

  static json session_view(std::string_view id, const SessionRecord& rec) {
    const auto& s = rec.session;
    const auto& points = rec.instance->points;
    json ids = json::array();
    for (const auto& p : points) ids.push_back(p.id);
    return json{{"session_id", id},
                {"instance_id", s.instance_ref},
                {"clustering_id", rec.clustering_id},
                {"k", s.cluster_count()},
                {"point_ids", std::move(ids)},
                {"assignment", assignment_to_json(s.current(), points)},
                {"memberships", s.base().membership},
                {"centroids", s.centroids()},
                {"metrics", s.metrics()},
                {"capacity_status", s.capacity_status()},
                {"history", s.history()},
                {"cursor", s.cursor()},
                {"can_undo", s.cursor() > 0},
                {"can_redo", s.cursor() < s.history().size()}};
  }

  // ------------------------------------------------------------------ handlers

  ApiResponse get_instance(std::string_view id) {
    const auto inst = find(instances, "instance", id);
    json body = *inst;
    body["id"] = id;
    return reply(200, body);
  }

  ApiResponse list_instances() {
    std::shared_lock lock(registry_mu);
    json ids = json::array();
    for (const auto& [id, _] : instances) ids.push_back(id);
    return reply(200, json{{"instances", std::move(ids)}});
  }

  std::string register_instance(Instance inst, std::string id) {
    validate(inst, options.config.allow_intra_point);
    std::unique_lock lock(registry_mu);
    if (id.empty()) id = fresh_id("inst");
    if (instances.contains(id)) fail(ErrorCode::conflict, fmt::format("instance '{}' already exists", id));
    save("instances", id, json(inst));
    instances[id] = std::make_shared<const Instance>(std::move(inst));
    return id;
  }

  ApiResponse post_instance(const json& body, const std::map<std::string, std::string>& query) {
    const auto it = query.find("id");
    auto inst = body.get<Instance>();
    const auto id = register_instance(std::move(inst), it == query.end() ? std::string{} : it->second);
    return reply(201, json{{"id", id}});
  }

  ApiResponse cluster(std::string_view instance_id, const json& body) {
    const auto inst = find(instances, "instance", instance_id);
    FcmParams params = body.get<FcmParams>();
    const auto c_min = body.value("c_min", std::size_t{2});
    const auto c_max = body.value("c_max", std::size_t{5});
    if (c_min > c_max) fail(ErrorCode::validation, "empty sweep range");
    const auto selector =
        parse_demand_selector(body.value("gravity_demand", std::string(to_string(options.config.gravity_demand))));
    std::vector<std::size_t> cs;
    if (body.contains("c")) {
      cs.push_back(params.c);
    } else {
      for (auto c = c_min; c <= c_max; ++c) cs.push_back(c);
    }
    const auto rows = sweep_cluster_counts(inst->points, cs, params, selector);
    const auto& best = best_row(rows);

    json out_rows = json::array();
    std::string best_id;
    std::unique_lock lock(registry_mu);
    for (const auto& row : rows) {
      auto rec = std::make_shared<ClusteringRecord>();
      rec->instance_id = std::string(instance_id);
      rec->params = params;
      rec->params.c = row.c;
      rec->selector = selector;
      rec->clustering = row.clustering;
      const auto id = fresh_id("clu");
      save("clusterings", id,
           json{{"instance_id", rec->instance_id}, {"fcm_params", rec->params},
                {"gravity_demand", to_string(selector)}, {"clustering", rec->clustering}});
      clusterings[id] = rec;
      if (&row == &best) best_id = id;
      out_rows.push_back(json{{"clustering_id", id},
                              {"c", row.c},
                              {"metrics", row.metrics},
                              {"fpc", row.fpc},
                              {"iterations_run", row.clustering.iterations_run},
                              {"converged", row.clustering.converged}});
    }
    return reply(201, json{{"clustering_id", best_id}, {"best_c", best.c}, {"rows", std::move(out_rows)}});
  }

  ApiResponse get_clustering(std::string_view id) {
    const auto rec = find(clusterings, "clustering", id);
    return reply(200, json{{"clustering_id", id},
                           {"instance_id", rec->instance_id},
                           {"fcm_params", rec->params},
                           {"gravity_demand", to_string(rec->selector)},
                           {"clustering", rec->clustering}});
  }

  ApiResponse create_session(const json& body) {
    if (!body.contains("clustering_id")) fail(ErrorCode::validation, "clustering_id is required");
    const auto clu_id = body.at("clustering_id").get<std::string>();
    const auto clu = find(clusterings, "clustering", clu_id);
    const auto inst = find(instances, "instance", clu->instance_id);
    std::optional<std::vector<CapacityTarget>> targets;
    if (body.contains("capacity_targets") && !body.at("capacity_targets").is_null()) {
      targets = body.at("capacity_targets").get<std::vector<CapacityTarget>>();
    }
    AssignmentSession session(clu->clustering, inst->points, clu->selector, std::move(targets));
    session.instance_ref = clu->instance_id;
    session.fcm_params = clu->params;
    auto rec = std::make_shared<SessionRecord>(clu_id, inst, std::move(session));

    std::unique_lock lock(registry_mu);
    const auto id = fresh_id("ses");
    save("sessions", id, session_document(id, *rec));
    sessions[id] = rec;
    return reply(201, session_view(id, *rec));
  }

  ApiResponse get_session(std::string_view id) {
    const auto rec = find(sessions, "session", id);
    std::shared_lock lock(rec->mu);
    return reply(200, session_view(id, *rec));
  }

  // Runs one mutation under the session's writer lock and persists it.
  template <class F>
  ApiResponse mutate_session(std::string_view id, F&& mutation) {
    const auto rec = find(sessions, "session", id);
    std::unique_lock lock(rec->mu);
    mutation(rec->session);
    save("sessions", id, session_document(id, *rec));
    return reply(200, session_view(id, *rec));
  }

  ApiResponse apply_move(std::string_view id, const json& body) {
    if (!body.contains("point") || !body.contains("to")) {
      fail(ErrorCode::validation, "move needs 'point' and 'to'");
    }
    const auto point = body.at("point").get<std::string>();
    const auto to = body.at("to").get<std::size_t>();
    const auto actor = body.value("actor", std::string("expert"));
    auto timestamp = body.value("timestamp", std::string{});
    if (timestamp.empty()) timestamp = utc_timestamp_now();
    return mutate_session(id, [&](AssignmentSession& s) { s.apply_move(point, to, actor, timestamp); });
  }

  ApiResponse step_history(std::string_view id, bool forward) {
    return mutate_session(id, [&](AssignmentSession& s) {
      const bool moved = forward ? s.redo() : s.undo();
      if (!moved) fail(ErrorCode::conflict, forward ? "nothing to redo" : "nothing to undo");
    });
  }

  ApiResponse set_targets(std::string_view id, const json& body) {
    std::optional<std::vector<CapacityTarget>> targets;
    if (!body.is_null() && !(body.is_object() && body.value("capacity_targets", json()).is_null())) {
      const auto& list = body.is_array() ? body : body.at("capacity_targets");
      targets = list.get<std::vector<CapacityTarget>>();
    }
    return mutate_session(id, [&](AssignmentSession& s) { s.set_capacity_targets(std::move(targets)); });
  }

  ApiResponse suggestions(std::string_view id, const std::map<std::string, std::string>& query) {
    const auto it = query.find("cluster");
    if (it == query.end()) fail(ErrorCode::validation, "query parameter 'cluster' is required");
    const auto cluster = parse_index(it->second, "cluster");
    const auto lim = query.find("limit");
    const auto limit = lim == query.end() ? std::size_t{10} : parse_index(lim->second, "limit");
    const auto rec = find(sessions, "session", id);
    std::shared_lock lock(rec->mu);
    return reply(200, json{{"session_id", id},
                           {"cluster", cluster},
                           {"suggestions", rec->session.suggest(cluster, limit)}});
  }

  ApiResponse finalize(std::string_view id, const json& body) {
    const auto rec = find(sessions, "session", id);
    const auto policy = parse_zero_demand_policy(
        body.value("gravity_zero_demand", std::string(to_string(options.config.gravity_zero_demand))));
    NetworkDesign design;
    std::string instance_id;
    {
      std::shared_lock lock(rec->mu);
      design = rec->session.finalize(policy);
      instance_id = rec->session.instance_ref;
    }
    auto drec = std::make_shared<DesignRecord>();
    drec->instance_id = instance_id;
    drec->session_id = std::string(id);
    drec->design = design;

    std::unique_lock lock(registry_mu);
    const auto design_id = fresh_id("des");
    save("designs", design_id, design_document(*drec));
    designs[design_id] = drec;
    return reply(201, json{{"design_id", design_id},
                           {"design", design_to_json(design, rec->instance->points)}});
  }

  ApiResponse get_design(std::string_view id) {
    const auto rec = find(designs, "design", id);
    std::shared_lock registry(registry_mu);
    std::lock_guard lock(rec->mu);
    auto doc = design_document(*rec);
    doc["design_id"] = id;
    return reply(200, doc);
  }

  ApiResponse comparison(std::string_view id, const std::map<std::string, std::string>& query) {
    const auto rec = find(designs, "design", id);
    const auto it = query.find("format");
    const auto format = parse_format(it == query.end() ? "json" : it->second);
    std::map<ScenarioId, ScenarioResult> results;
    {
      std::lock_guard lock(rec->mu);
      results = rec->results;
    }
    if (!results.contains(ScenarioId::S0)) {
      fail(ErrorCode::conflict, "comparison needs the S0 baseline plan (missing S0); solve S0 first");
    }
    const auto text = render(compare_scenarios(results), format);
    const char* type = format == ReportFormat::json       ? "application/json"
                       : format == ReportFormat::csv      ? "text/csv"
                                                          : "text/markdown";
    return ApiResponse{200, type, text};
  }

  // Expansion is quick and surfaces input errors synchronously; routing
  // runs on the worker pool unless the caller asks to wait.
  ApiResponse solve(std::string_view design_id, std::string_view scenario_text,
                    const std::map<std::string, std::string>& query) {
    const auto scenario = parse_scenario(scenario_text);
    const auto rec = find(designs, "design", design_id);
    const auto inst = find(instances, "instance", rec->instance_id);
    auto plan = std::make_shared<ScenarioPlan>(expand(rec->design, *inst, scenario, options.config));

    const auto wait = query.find("wait");
    if (wait != query.end() && (wait->second == "1" || wait->second == "true")) {
      auto result = solve_scenario(*plan, options.solve, options.solve_jobs);
      store_result(std::string(design_id), rec, result);
      return reply(200, json{{"status", "done"}, {"result", result}});
    }

    std::string job_id;
    {
      std::lock_guard lock(jobs_mu);
      job_id = fresh_id("job");
      Job job;
      job.design_id = std::string(design_id);
      job.scenario = scenario;
      jobs[job_id] = std::move(job);
    }
    pool.submit([this, job_id, plan, rec, design = std::string(design_id)] {
      set_job(job_id, [](Job& j) { j.status = "running"; });
      try {
        auto result = solve_scenario(*plan, options.solve, options.solve_jobs);
        store_result(design, rec, result);
        set_job(job_id, [&](Job& j) {
          j.status = "done";
          j.result = result;
        });
      } catch (const Error& e) {
        set_job(job_id, [&](Job& j) {
          j.status = "failed";
          j.error = error_body(e.code(), e.what());
        });
      } catch (const std::exception& e) {
        set_job(job_id, [&](Job& j) {
          j.status = "failed";
          j.error = error_body(ErrorCode::internal, e.what());
        });
      }
    });
    return reply(202, json{{"job_id", job_id}, {"status", "queued"}});
  }

  void store_result(const std::string& design_id, const std::shared_ptr<DesignRecord>& rec,
                    const ScenarioResult& result) {
    std::shared_lock registry(registry_mu);
    std::lock_guard lock(rec->mu);
    rec->results[result.scenario] = result;
    save("designs", design_id, design_document(*rec));
  }

  template <class F>
  void set_job(const std::string& id, F&& f) {
    std::lock_guard lock(jobs_mu);
    f(jobs.at(id));
  }

  ApiResponse get_job(std::string_view id) {
    std::lock_guard lock(jobs_mu);
    const auto it = jobs.find(std::string(id));
    if (it == jobs.end()) fail(ErrorCode::not_found, fmt::format("unknown job '{}'", id));
    const auto& job = it->second;
    json body{{"job_id", id},
              {"design_id", job.design_id},
              {"scenario", job.scenario},
              {"status", job.status}};
    if (job.status == "done") body["result"] = job.result;
    if (job.status == "failed") body["error"] = job.error;
    return reply(200, body);
  }

  // ------------------------------------------------------------------ routing

  ApiResponse route(std::string_view method, std::string_view path,
                    const std::map<std::string, std::string>& query, std::string_view raw_body) {
    const auto parts = split_path(path);
    if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") {
      fail(ErrorCode::not_found, fmt::format("no route for {} {}", method, path));
    }
    const std::vector<std::string_view> p(parts.begin() + 2, parts.end());
    const auto body = [&] {
      if (raw_body.empty()) return json::object();
      return parse_json_text(raw_body, "request body");
    };
    const bool get = method == "GET";
    const bool post = method == "POST";
    const bool put = method == "PUT";
    const auto& kind = p[0];
    const auto n = p.size();

    if (kind == "instances") {
      if (n == 1 && get) return list_instances();
      if (n == 1 && post) return post_instance(body(), query);
      if (n == 2 && get) return get_instance(p[1]);
      if (n == 3 && post && p[2] == "cluster") return cluster(p[1], body());
    } else if (kind == "clusterings") {
      if (n == 2 && get) return get_clustering(p[1]);
    } else if (kind == "sessions") {
      if (n == 1 && post) return create_session(body());
      if (n == 2 && get) return get_session(p[1]);
      if (n == 3 && post && p[2] == "moves") return apply_move(p[1], body());
      if (n == 3 && post && p[2] == "undo") return step_history(p[1], false);
      if (n == 3 && post && p[2] == "redo") return step_history(p[1], true);
      if (n == 3 && get && p[2] == "suggestions") return suggestions(p[1], query);
      if (n == 3 && post && p[2] == "finalize") return finalize(p[1], body());
      if (n == 3 && put && p[2] == "capacity_targets") return set_targets(p[1], body());
    } else if (kind == "designs") {
      if (n == 2 && get) return get_design(p[1]);
      if (n == 3 && get && p[2] == "comparison") return comparison(p[1], query);
      if (n == 5 && post && p[2] == "scenarios" && p[4] == "solve") return solve(p[1], p[3], query);
    } else if (kind == "jobs") {
      if (n == 2 && get) return get_job(p[1]);
    }
    fail(ErrorCode::not_found, fmt::format("no route for {} {}", method, path));
  }
};

ApiService::ApiService(ApiOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

ApiService::~ApiService() = default;

ApiResponse ApiService::handle(std::string_view method, std::string_view path,
                               const std::map<std::string, std::string>& query,
                               std::string_view body) {
  try {
    return impl_->route(method, path, query, body);
  } catch (const Error& e) {
    return reply(http_status(e.code()), error_body(e.code(), e.what()));
  } catch (const json::exception& e) {
    return reply(400, error_body(ErrorCode::validation, fmt::format("invalid request body: {}", e.what())));
  } catch (const std::exception& e) {
    return reply(500, error_body(ErrorCode::internal, e.what()));
  }
}

std::string ApiService::add_instance(const Instance& instance, std::string id) {
  return impl_->register_instance(instance, std::move(id));
}

void ApiService::wait_for_jobs() { impl_->pool.wait_idle(); }

// ---------------------------------------------------------------------------

struct ApiServer::Impl {
  ApiService& service;
  httplib::Server server;

  Impl(ApiService& s, const std::string& origin) : service(s) {
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      const auto out = service.handle(req.method, req.path, query, req.body);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    const std::string pattern = R"(/api/v1/.*)";
    server.Get(pattern, forward);
    server.Post(pattern, forward);
    server.Put(pattern, forward);
    server.Options(pattern, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
};

ApiServer::ApiServer(ApiService& service, std::string cors_origin)
    : impl_(std::make_unique<Impl>(service, cors_origin)) {}

ApiServer::~ApiServer() { stop(); }

bool ApiServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int ApiServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void ApiServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace hubspoke
