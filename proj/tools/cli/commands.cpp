#include "commands.hpp"

#include <csignal>
#include <filesystem>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hubspoke/api.hpp"
#include "hubspoke/error.hpp"
#include "hubspoke/fcm.hpp"
#include "hubspoke/netdesign.hpp"
#include "hubspoke/report.hpp"
#include "hubspoke/scenarios.hpp"
#include "hubspoke/serialization.hpp"
#include "hubspoke/session.hpp"

namespace hubspoke::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::infeasible: return 2;
    case ErrorCode::io: return 3;
    default: return 1;
  }
}

namespace {

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::io, fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  }
  write_text_file(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path) { return parse_json_text(read_text_file(path), path.string()); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

std::string extension_for(ReportFormat f) {
  switch (f) {
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
    case ReportFormat::markdown: return "md";
  }
  return "txt";
}

// Accepts an instance JSON file, a directory holding instance.json, or a
// points CSV together with a parcels CSV.
Instance load_instance_arg(const fs::path& path, const std::string& parcels_csv,
                           const Settings& settings) {
  Instance inst;
  if (fs::is_directory(path)) {
    inst = load_instance_json(path / "instance.json");
  } else if (path.extension() == ".csv") {
    if (parcels_csv.empty()) fail(ErrorCode::validation, "a points CSV needs --parcels");
    inst = load_instance(path, parcels_csv, settings.config);
  } else {
    inst = load_instance_json(path);
  }
  apply_to_instance(inst, settings);
  return inst;
}

struct Clustering {
  std::string instance_ref;
  FcmParams params;
  DemandSelector selector = DemandSelector::delivery;
  FuzzyClustering clustering;
};

json clustering_to_json(const Clustering& c) {
  return json{{"instance_ref", c.instance_ref},
              {"fcm_params", c.params},
              {"gravity_demand", to_string(c.selector)},
              {"clustering", c.clustering}};
}

Clustering clustering_from_json(const json& j) {
  try {
    Clustering c;
    c.instance_ref = j.value("instance_ref", std::string{});
    c.params = j.at("fcm_params").get<FcmParams>();
    c.selector = parse_demand_selector(j.value("gravity_demand", std::string("delivery")));
    c.clustering = j.at("clustering").get<FuzzyClustering>();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, std::string("clustering file: ") + e.what());
  }
}

std::string metrics_line(const DesignMetrics& m) {
  return fmt::format("approx_cost_km={} interhub_km={} intracluster_km={} demand_cv={}",
                     m.approx_cost_km, m.interhub_km, m.intracluster_km, m.demand_cv);
}

// Shared state of one invocation: options are bound into these fields.
struct Invocation {
  Invocation(std::ostream& o, std::ostream& e, EnvLookup lookup) : out(o), err(e), env(std::move(lookup)) {}

  std::ostream& out;
  std::ostream& err;
  EnvLookup env;

  std::string config_file;
  bool json_errors = false;
  std::map<std::string, std::string> config_flags;
  Settings settings;

  // generate
  std::uint64_t gen_seed = 42;
  std::size_t gen_points = 77;
  std::size_t gen_blobs = 3;
  std::size_t gen_parcels = 2000;
  std::string out_path;

  // shared inputs
  std::string instance_path;
  std::string parcels_path;
  std::string format = "markdown";

  // cluster
  std::size_t c_min = 2;
  std::size_t c_max = 5;
  std::size_t c_pick = 0;
  FcmParams fcm;

  // session
  std::string clustering_path;
  std::string session_path;
  std::string targets_path;
  std::string point_id;
  std::size_t to_cluster = 0;
  std::size_t cluster = 0;
  std::size_t limit = 10;
  std::string actor = "expert";
  std::string timestamp;

  // hubs / scenario / compare
  std::string design_path;
  std::string which = "all";
  std::size_t jobs = 0;
  SolveOptions solve;
  std::int64_t time_limit_ms = 5000;
  std::vector<std::string> plans;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string session_dir;
  std::vector<std::string> preload;
  std::size_t workers = 2;
  std::string cors_origin = "*";
};

// ------------------------------------------------------------------ commands

void cmd_generate(Invocation& inv) {
  SyntheticSpec spec;
  spec.seed = inv.gen_seed;
  spec.n_points = inv.gen_points;
  spec.n_blobs = inv.gen_blobs;
  spec.parcels_per_day = inv.gen_parcels;
  spec.fleet = inv.settings.config.fleet();
  auto synth = generate_synthetic(spec);
  apply_to_instance(synth.instance, inv.settings);

  const fs::path dir = inv.out_path;
  ensure_dir(dir);
  save_instance_json(synth.instance, dir / "instance.json");
  save_instance_csv(synth.instance, dir / "points.csv", dir / "parcels.csv");
  write_json(dir / "truth.json", json{{"blob_of_point", synth.blob_of_point},
                                      {"blob_centers", synth.blob_centers},
                                      {"blob_sigma_deg", synth.blob_sigma_deg}});
  inv.out << fmt::format("generated {} points, {} parcels in {}\n", synth.instance.points.size(),
                         synth.instance.parcels.size(), dir.string());
}

void cmd_cluster(Invocation& inv) {
  if (inv.c_min > inv.c_max) fail(ErrorCode::validation, "empty sweep range");
  const auto inst = load_instance_arg(inv.instance_path, inv.parcels_path, inv.settings);
  const auto format = parse_format(inv.format);
  std::vector<std::size_t> cs;
  for (auto c = inv.c_min; c <= inv.c_max; ++c) cs.push_back(c);
  const auto selector = inv.settings.config.gravity_demand;
  const auto rows = sweep_cluster_counts(inst.points, cs, inv.fcm, selector);

  const SweepRow* chosen = &best_row(rows);
  if (inv.c_pick != 0) {
    chosen = nullptr;
    for (const auto& r : rows) {
      if (r.c == inv.c_pick) chosen = &r;
    }
    if (!chosen) fail(ErrorCode::validation, fmt::format("--c {} is outside the sweep range", inv.c_pick));
  }

  Clustering out;
  out.instance_ref = inv.instance_path;
  out.params = inv.fcm;
  out.params.c = chosen->c;
  out.selector = selector;
  out.clustering = chosen->clustering;

  const fs::path dir = inv.out_path;
  ensure_dir(dir);
  write_text_file(dir / ("sweep." + extension_for(format)), render(rows, format));
  if (format != ReportFormat::json) write_text_file(dir / "sweep.json", render(rows, ReportFormat::json));
  write_json(dir / "clustering.json", clustering_to_json(out));
  inv.out << render(rows, format);
  inv.out << fmt::format("chosen c={} -> {}\n", chosen->c, (dir / "clustering.json").string());
}

// The session file remembers its instance; --instance overrides it.
AssignmentSession open_session(Invocation& inv, std::vector<DemandPoint>& points) {
  const auto doc = read_json(inv.session_path);
  if (inv.instance_path.empty()) inv.instance_path = doc.value("instance_ref", std::string{});
  points = load_instance_arg(inv.instance_path, inv.parcels_path, inv.settings).points;
  auto state = session_from_json(doc, points);
  return AssignmentSession::restore(state, points);
}

void save_session(Invocation& inv, const AssignmentSession& s) {
  write_json(inv.session_path, session_to_json(s.state(), s.points()));
}

void print_session(Invocation& inv, const AssignmentSession& s) {
  inv.out << fmt::format("k={} cursor={}/{} {}\n", s.cluster_count(), s.cursor(), s.history().size(),
                         metrics_line(s.metrics()));
}

void cmd_session_create(Invocation& inv) {
  if (inv.clustering_path.empty() || inv.instance_path.empty() || inv.out_path.empty()) {
    fail(ErrorCode::validation, "session needs --clustering, --instance and --out (or a subcommand)");
  }
  const auto clu = clustering_from_json(read_json(inv.clustering_path));
  const auto inst = load_instance_arg(inv.instance_path, inv.parcels_path, inv.settings);
  std::optional<std::vector<CapacityTarget>> targets;
  if (!inv.targets_path.empty()) {
    targets = read_json(inv.targets_path).get<std::vector<CapacityTarget>>();
  }
  AssignmentSession s(clu.clustering, inst.points, clu.selector, targets);
  s.instance_ref = inv.instance_path;
  s.fcm_params = clu.params;
  inv.session_path = inv.out_path;
  save_session(inv, s);
  print_session(inv, s);
}

void cmd_session_apply(Invocation& inv) {
  std::vector<DemandPoint> points;
  auto s = open_session(inv, points);
  s.apply_move(inv.point_id, inv.to_cluster, inv.actor,
               inv.timestamp.empty() ? utc_timestamp_now() : inv.timestamp);
  save_session(inv, s);
  print_session(inv, s);
}

void cmd_session_step(Invocation& inv, bool forward) {
  std::vector<DemandPoint> points;
  auto s = open_session(inv, points);
  if (!(forward ? s.redo() : s.undo())) {
    fail(ErrorCode::conflict, forward ? "nothing to redo" : "nothing to undo");
  }
  save_session(inv, s);
  print_session(inv, s);
}

void cmd_session_suggest(Invocation& inv) {
  std::vector<DemandPoint> points;
  const auto s = open_session(inv, points);
  const auto rows = s.suggest(inv.cluster, inv.limit);
  inv.out << "point,current_cluster,membership,demand,delta_cost_km\n";
  for (const auto& r : rows) {
    inv.out << fmt::format("{},{},{:.6f},{},{}\n", r.point_id, r.current_cluster, r.membership, r.demand,
                           r.delta_cost ? fmt::format("{:.6f}", *r.delta_cost) : std::string("n/a"));
  }
}

void cmd_session_show(Invocation& inv) {
  std::vector<DemandPoint> points;
  const auto s = open_session(inv, points);
  json view{{"k", s.cluster_count()},
            {"assignment", assignment_to_json(s.current(), s.points())},
            {"metrics", s.metrics()},
            {"capacity_status", s.capacity_status()},
            {"history", s.history()},
            {"cursor", s.cursor()}};
  inv.out << view.dump(2) << "\n";
}

void cmd_session_finalize(Invocation& inv) {
  std::vector<DemandPoint> points;
  const auto s = open_session(inv, points);
  const auto design = s.finalize(inv.settings.config.gravity_zero_demand);
  if (inv.out_path.empty()) fail(ErrorCode::validation, "finalize needs --out");
  write_json(inv.out_path, design_to_json(design, s.points()));
  inv.out << fmt::format("design with {} hubs ({}) -> {}\n", design.k, to_string(design.provenance),
                         inv.out_path);
}

void cmd_hubs(Invocation& inv) {
  const auto inst = load_instance_arg(inv.instance_path, inv.parcels_path, inv.settings);
  auto design = design_from_json(read_json(inv.design_path), inst.points);
  const auto& cfg = inv.settings.config;
  design.hubs = place_hubs(inst.points, design.assignment, design.k, cfg.gravity_demand,
                           cfg.gravity_zero_demand);
  if (!inv.out_path.empty()) write_json(inv.out_path, design_to_json(design, inst.points));

  std::vector<std::size_t> sizes(design.k, 0);
  std::vector<double> demand(design.k, 0.0);
  for (std::size_t i = 0; i < inst.points.size(); ++i) {
    ++sizes[design.assignment[i]];
    demand[design.assignment[i]] += demand_of(inst.points[i], cfg.gravity_demand);
  }
  inv.out << "hub,lat,lon,points,demand\n";
  for (std::size_t k = 0; k < design.k; ++k) {
    inv.out << fmt::format("H{},{:.6f},{:.6f},{},{}\n", k, design.hubs[k].lat, design.hubs[k].lon,
                           sizes[k], demand[k]);
  }
}

std::vector<ScenarioId> which_scenarios(const std::string& which) {
  if (which == "all") return {kAllScenarios.begin(), kAllScenarios.end()};
  std::vector<ScenarioId> ids;
  std::string_view rest = which;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    ids.push_back(parse_scenario(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ids;
}

void cmd_scenario(Invocation& inv) {
  const auto inst = load_instance_arg(inv.instance_path, inv.parcels_path, inv.settings);
  const auto design = design_from_json(read_json(inv.design_path), inst.points);
  inv.solve.time_limit = std::chrono::milliseconds(inv.time_limit_ms);
  const fs::path dir = inv.out_path;
  ensure_dir(dir);
  for (auto id : which_scenarios(inv.which)) {
    const auto plan = expand(design, inst, id, inv.settings.config);
    if (const auto problems = check_conservation(plan, inst); !problems.empty()) {
      fail(ErrorCode::internal, fmt::format("scenario {} loses parcels: {}", to_string(id), problems.front()));
    }
    const auto result = solve_scenario(plan, inv.solve, inv.jobs);
    const auto file = dir / fmt::format("{}.json", to_string(id));
    write_json(file, json{{"scenario", id}, {"totals", totals_of(result)}, {"result", result}, {"plan", plan}});
    inv.out << fmt::format("{}: trucks={} total={:.2f} pickup={:.2f} delivery={:.2f} -> {}\n", to_string(id),
                           result.trucks_used, result.total_cost, result.pickup_cost, result.delivery_cost,
                           file.string());
  }
}

void cmd_compare(Invocation& inv) {
  const auto format = parse_format(inv.format);
  std::map<ScenarioId, ScenarioTotals> totals;
  for (const auto& path : inv.plans) {
    const auto doc = read_json(path);
    try {
      const auto t = doc.contains("totals") ? doc.at("totals").get<ScenarioTotals>()
                                            : totals_of(doc.at("result").get<ScenarioResult>());
      if (!totals.emplace(t.scenario, t).second) {
        fail(ErrorCode::validation, fmt::format("scenario {} given twice ({})", to_string(t.scenario), path));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::validation, fmt::format("{}: not a scenario plan: {}", path, e.what()));
    }
  }
  const auto text = render(compare_scenarios(totals), format);
  if (!inv.out_path.empty()) write_text_file(inv.out_path, text);
  inv.out << text;
}

ApiServer* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

void cmd_serve(Invocation& inv) {
  ApiOptions opts;
  opts.session_dir = inv.session_dir;
  opts.solver_workers = inv.workers;
  opts.config = inv.settings.config;
  inv.solve.time_limit = std::chrono::milliseconds(inv.time_limit_ms);
  opts.solve = inv.solve;
  ApiService service(opts);
  for (const auto& path : inv.preload) {
    const auto inst = load_instance_arg(path, "", inv.settings);
    const fs::path p = path;
    const auto id = fs::is_directory(p) ? p.filename().string() : p.stem().string();
    const auto got = service.handle("GET", "/api/v1/instances/" + id);
    if (got.status == 404) service.add_instance(inst, id);
  }
  ApiServer server(service, inv.cors_origin);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  inv.out << fmt::format("serving /api/v1 on http://{}:{}\n", inv.host, inv.port) << std::flush;
  const bool ok = server.listen(inv.host, inv.port);
  g_server = nullptr;
  if (!ok && inv.port != 0) fail(ErrorCode::io, fmt::format("cannot listen on {}:{}", inv.host, inv.port));
}

void report_error(Invocation& inv, ErrorCode code, const std::string& message) {
  if (inv.json_errors) {
    inv.err << json{{"code", to_string(code)}, {"message", message}, {"exit_code", exit_code_for(code)}}.dump()
            << "\n";
  } else {
    inv.err << "error: " << message << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  Invocation inv(out, err, env);
  CLI::App app{"Hub-and-spoke network design: clustering, expert sessions, hubs, scenario routing"};
  app.name("hubspoke");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", inv.config_file, "Config file (JSON object or key = value lines)");
  app.add_flag("--json-errors", inv.json_errors, "Print errors as JSON on stderr");
  for (auto key : config_keys()) {
    app.add_option_function<std::string>(
           flag_name(key), [&inv, k = std::string(key)](const std::string& v) { inv.config_flags[k] = v; },
           fmt::format("Config key {} (env {})", key, env_name(key)))
        ->group("Config overrides");
  }

  std::function<void(Invocation&)> action;
  auto bind = [&](CLI::App* sub, void (*fn)(Invocation&)) {
    sub->callback([&action, fn] { action = fn; });
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic clustered instance");
  gen->add_option("--seed", inv.gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--points", inv.gen_points, "Number of demand points")->capture_default_str();
  gen->add_option("--blobs", inv.gen_blobs, "Number of Gaussian blobs")->capture_default_str();
  gen->add_option("--parcels", inv.gen_parcels, "Parcels per day")->capture_default_str();
  gen->add_option("--out", inv.out_path, "Output directory")->required();
  bind(gen, cmd_generate);

  auto* clu = app.add_subcommand("cluster", "Sweep fuzzy c-means over a range of cluster counts");
  clu->add_option("--instance", inv.instance_path, "Instance JSON, directory, or points CSV")->required();
  clu->add_option("--parcels", inv.parcels_path, "Parcels CSV when --instance is a points CSV");
  clu->add_option("--c-min", inv.c_min)->capture_default_str();
  clu->add_option("--c-max", inv.c_max)->capture_default_str();
  clu->add_option("--c", inv.c_pick, "Keep this c instead of the cheapest");
  clu->add_option("--m", inv.fcm.m, "Fuzzifier")->capture_default_str();
  clu->add_option("--error", inv.fcm.error, "Stopping tolerance on membership change")->capture_default_str();
  clu->add_option("--maxiter", inv.fcm.maxiter)->capture_default_str();
  clu->add_option("--seed", inv.fcm.seed)->capture_default_str();
  clu->add_option("--format", inv.format, "markdown, csv or json")->capture_default_str();
  clu->add_option("--out", inv.out_path, "Output directory")->required();
  bind(clu, cmd_cluster);

  auto* ses = app.add_subcommand("session", "Create or edit an expert assignment session");
  ses->add_option("--clustering", inv.clustering_path, "Clustering file from `cluster`");
  ses->add_option("--instance", inv.instance_path, "Instance (defaults to the one the session names)");
  ses->add_option("--parcels", inv.parcels_path);
  ses->add_option("--targets", inv.targets_path, "JSON list of {min_demand, max_demand} per cluster");
  ses->add_option("--out", inv.out_path, "Session file to create");
  ses->require_subcommand(0, 1);
  // Parent callbacks run after the subcommand's, so only claim the action
  // when no edit subcommand was given.
  ses->callback([&action, ses] {
    if (ses->get_subcommands().empty()) action = cmd_session_create;
  });
  auto session_sub = [&](const char* name, const char* help, void (*fn)(Invocation&)) {
    auto* sub = ses->add_subcommand(name, help);
    sub->add_option("--session", inv.session_path, "Session file")->required();
    sub->add_option("--instance", inv.instance_path);
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };
  auto* apply = session_sub("apply", "Move a point to another cluster", cmd_session_apply);
  apply->add_option("--point", inv.point_id)->required();
  apply->add_option("--to", inv.to_cluster)->required();
  apply->add_option("--actor", inv.actor)->capture_default_str();
  apply->add_option("--timestamp", inv.timestamp, "ISO-8601 time recorded with the move (default: now)");
  session_sub("undo", "Undo the last move", [](Invocation& i) { cmd_session_step(i, false); });
  session_sub("redo", "Redo the next move", [](Invocation& i) { cmd_session_step(i, true); });
  auto* sug = session_sub("suggest", "Rank candidate points for a cluster", cmd_session_suggest);
  sug->add_option("--cluster", inv.cluster)->required();
  sug->add_option("--limit", inv.limit)->capture_default_str();
  auto* fin = session_sub("finalize", "Place hubs and write the design", cmd_session_finalize);
  fin->add_option("--out", inv.out_path)->required();
  session_sub("show", "Print the session state", cmd_session_show);

  auto* hubs = app.add_subcommand("hubs", "Place hubs at each cluster's center of gravity");
  hubs->add_option("--design", inv.design_path)->required();
  hubs->add_option("--instance", inv.instance_path)->required();
  hubs->add_option("--parcels", inv.parcels_path);
  hubs->add_option("--out", inv.out_path, "Design file with the recomputed hubs");
  bind(hubs, cmd_hubs);

  auto* sc = app.add_subcommand("scenario", "Expand and solve operating scenarios S0..S3");
  sc->add_option("--design", inv.design_path)->required();
  sc->add_option("--instance", inv.instance_path)->required();
  sc->add_option("--parcels", inv.parcels_path);
  sc->add_option("--which", inv.which, "S0..S3, comma list, or all")->capture_default_str();
  sc->add_option("--jobs", inv.jobs, "Concurrent routing solves (0 = logical cores)")->capture_default_str();
  sc->add_option("--seed", inv.solve.seed, "Routing search seed")->capture_default_str();
  sc->add_option("--time-limit-ms", inv.time_limit_ms, "Per sub-problem time budget")->capture_default_str();
  sc->add_option("--max-iterations", inv.solve.max_iterations)->capture_default_str();
  sc->add_option("--perturbations", inv.solve.perturbations)->capture_default_str();
  sc->add_option("--out", inv.out_path, "Output directory")->required();
  bind(sc, cmd_scenario);

  auto* cmp = app.add_subcommand("compare", "Compare solved scenarios against S0");
  cmp->add_option("--plans", inv.plans, "Scenario files from `scenario`")->required();
  cmp->add_option("--format", inv.format, "markdown, csv or json")->capture_default_str();
  cmp->add_option("--out", inv.out_path, "Also write the report here");
  bind(cmp, cmd_compare);

  auto* srv = app.add_subcommand("serve", "Run the HTTP API for the web UI");
  srv->add_option("--host", inv.host)->capture_default_str();
  srv->add_option("--port", inv.port)->capture_default_str();
  srv->add_option("--session-dir", inv.session_dir, "Directory for persisted state");
  srv->add_option("--instance", inv.preload, "Instance to preload (id = file stem)");
  srv->add_option("--workers", inv.workers, "Solver worker threads")->capture_default_str();
  srv->add_option("--time-limit-ms", inv.time_limit_ms)->capture_default_str();
  srv->add_option("--cors-origin", inv.cors_origin)->capture_default_str();
  bind(srv, cmd_serve);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(inv, ErrorCode::validation, e.what());
    return 1;
  }

  try {
    std::optional<fs::path> file;
    if (!inv.config_file.empty()) file = inv.config_file;
    inv.settings = resolve_settings(file, env, inv.config_flags);
    if (!action) fail(ErrorCode::validation, "no command given");
    action(inv);
    return 0;
  } catch (const Error& e) {
    report_error(inv, e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error(inv, ErrorCode::internal, e.what());
    return 1;
  }
}

}  // namespace hubspoke::cli
