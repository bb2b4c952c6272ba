#include "fpp/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "fpp/report_io.hpp"
#include "fpp/rng.hpp"
#include "json.hpp"

namespace fpp {

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

Point2 point_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw BadTarget("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

int default_workers() {
  if (const char* env = std::getenv("FPP_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

struct CommonArgs {
  uint64_t seed = 0;
  bool seed_set = false;
};

void require_seed(const CommonArgs& args) {
  if (!args.seed_set)
    throw MissingSeed("--seed is mandatory; runs must be reproducible");
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

struct SampleArgs {
  CommonArgs common;
  std::vector<double> window;
  double intensity = 1.0;
  std::string out;
};

int cmd_sample(const SampleArgs& args) {
  require_seed(args.common);
  if (args.window.size() != 4) throw BadWindow("--window needs xmin,xmax,ymin,ymax");
  const Window win =
      make_window(args.window[0], args.window[1], args.window[2], args.window[3]);
  PointConfig cfg;
  if (args.intensity > 0.0) {
    cfg = PointConfig::poisson(win, args.intensity, args.common.seed);
  } else if (args.intensity == 0.0) {
    cfg = PointConfig::from_points(win, {}, SeedRecord{args.common.seed, 0.0, "poisson"});
  } else {
    throw BadIntensity("intensity must be nonnegative");
  }
  write_text_file(args.out, environment_to_json(cfg));
  std::cerr << "sampled " << cfg.size() << " points -> " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// geodesic
// ---------------------------------------------------------------------------

struct GeodesicArgs {
  CommonArgs common;
  std::string env_path;
  std::vector<double> window;
  double intensity = 1.0;
  bool intensity_set = false;
  std::string target_json;
  double line_t = 0.0;
  bool line_t_set = false;
  double c = 0.0;
  bool c_set = false;
  double t = 0.0;
  bool t_set = false;
  double s = 0.0;
  bool s_set = false;
  bool force_exact = false;
  bool force_heuristic = false;
  int max_exact_points = 18;
  int restarts = 8;
  std::string out;
};

std::string solution_to_json(const PathSolution& sol, const PointConfig& cfg) {
  JsonWriter w;
  w.begin_object();
  w.key("action").value(sol.action);
  w.key("length").value(sol.length);
  w.key("n_points").value(static_cast<int64_t>(sol.n_points));
  w.key("optimal").value(sol.optimal);
  w.key("candidates_used").value(static_cast<int64_t>(sol.candidates_used));
  w.key("path").begin_array();
  for (const Point2& p : path_vertices(sol.path, cfg))
    w.begin_array().value(p.x).value(p.y).end_array();
  w.end_array();
  w.key("terminal").begin_array().value(sol.path.terminal.x).value(sol.path.terminal.y).end_array();
  w.key("interior_indices").begin_array();
  for (int32_t idx : sol.path.interior) w.value(static_cast<int64_t>(idx));
  w.end_array();
  w.key("solver_log").begin_object();
  w.key("states_expanded").value(sol.log.states_expanded);
  w.key("prune_hits").value(sol.log.prune_hits);
  w.key("moves_applied").value(sol.log.moves_applied);
  w.end_object();
  w.end_object();
  return w.str() + "\n";
}

int cmd_geodesic(const GeodesicArgs& args) {
  require_seed(args.common);

  PointConfig cfg;
  if (!args.env_path.empty()) {
    cfg = environment_from_json(read_text_file(args.env_path));
  } else {
    if (args.window.size() != 4)
      throw BadWindow("need --env or --window xmin,xmax,ymin,ymax");
    const Window win =
        make_window(args.window[0], args.window[1], args.window[2], args.window[3]);
    if (args.intensity > 0.0)
      cfg = PointConfig::poisson(win, args.intensity, args.common.seed);
    else
      cfg = PointConfig::from_points(win, {}, SeedRecord{args.common.seed, 0.0, "poisson"});
  }

  TargetSet target;
  if (!args.target_json.empty()) {
    target = target_from_json(args.target_json);
  } else if (args.line_t_set) {
    target = make_line_target({args.line_t, 0.0}, {0.0, 1.0});
  } else if (args.t_set) {
    target = make_line_target({args.t, 0.0}, {0.0, 1.0});
  } else {
    throw BadTarget("need --target, --line-t, or --t");
  }

  double s = 0.0;
  if (args.s_set) {
    s = args.s;
  } else if (args.c_set && args.t_set) {
    s = args.c * args.t;
  } else if (args.c_set && args.line_t_set) {
    s = args.c * args.line_t;
  } else {
    throw BadSpec("need --s, or --c together with --t/--line-t");
  }

  SolverOptions opts;
  opts.max_exact_points = args.max_exact_points;
  opts.heuristic_restarts = args.restarts;
  opts.heuristic_seed = mix_seed(args.common.seed, 2);
  if (args.force_exact && args.force_heuristic)
    throw BadSpec("--exact and --heuristic are mutually exclusive");
  if (args.force_exact) opts.force_mode = SolveMode::Exact;
  if (args.force_heuristic) opts.force_mode = SolveMode::Heuristic;

  const GeodesicProblem pb =
      make_problem(cfg, {0.0, 0.0}, target, make_params(s), opts);
  const PathSolution sol = solve(pb);

  const std::string text = solution_to_json(sol, cfg);
  if (args.out.empty())
    std::cout << text;
  else
    write_text_file(args.out, text);
  return 0;
}

// ---------------------------------------------------------------------------
// animal
// ---------------------------------------------------------------------------

struct AnimalArgs {
  CommonArgs common;
  std::string grid_path;
  int n = 1;
  bool heuristic = false;
  std::string out;
};

int cmd_animal(const AnimalArgs& args) {
  require_seed(args.common);
  const AnimalGrid grid = grid_from_json(read_text_file(args.grid_path));
  const Animal animal = args.heuristic
                            ? greedy_animal_heuristic(grid, args.n, args.common.seed)
                            : greedy_animal_exact(grid, args.n);
  JsonWriter w;
  w.begin_object();
  w.key("n").value(static_cast<int64_t>(args.n));
  w.key("mode").value(args.heuristic ? "heuristic" : "exact");
  w.key("weight").value(animal.weight);
  w.key("cells").begin_array();
  for (const Cell& c : animal.cells)
    w.begin_array().value(static_cast<int64_t>(c.first)).value(static_cast<int64_t>(c.second)).end_array();
  w.end_array();
  w.end_object();
  const std::string text = w.str() + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_text_file(args.out, text);
  return 0;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentArgs {
  CommonArgs common;
  std::string config_path;
  std::string out_dir = ".";
  int workers = 0;
  double c = 0.0;
  bool c_set = false;
  std::string t_list;
  double gamma_prime = 0.0;
  bool gamma_prime_set = false;
  long replicas = 0;
  bool replicas_set = false;
  bool force_exact = false;
  int k = 0;
  bool k_set = false;
  bool timings = false;
  bool quiet = false;
};

int cmd_experiment(const ExperimentArgs& args) {
  std::vector<std::string> errors;
  ExperimentSpec spec =
      experiment_spec_from_json(read_text_file(args.config_path), errors);

  if (args.common.seed_set) spec.master_seed = args.common.seed;
  if (args.c_set) spec.c = args.c;
  if (!args.t_list.empty()) {
    spec.t_grid.clear();
    std::string item;
    for (char ch : args.t_list + ",") {
      if (ch == ',') {
        if (!item.empty()) spec.t_grid.push_back(std::atof(item.c_str()));
        item.clear();
      } else {
        item += ch;
      }
    }
  }
  if (args.gamma_prime_set) spec.gamma_prime = args.gamma_prime;
  if (args.replicas_set) spec.replicas = args.replicas;
  if (args.force_exact) spec.solver.force_mode = SolveMode::Exact;
  if (args.k_set) spec.box_side = args.k;
  if (args.timings) spec.record_timings = true;

  if (!args.common.seed_set && !spec.master_seed)
    errors.push_back("MissingSeed: provide --seed or master_seed in the config");
  for (const std::string& e : spec.validate()) errors.push_back(e);
  if (!errors.empty()) {
    std::cerr << "experiment config invalid:\n";
    for (const std::string& e : errors) std::cerr << "  - " << e << "\n";
    return 1;
  }

  std::signal(SIGINT, handle_sigint);
  RunControl ctrl;
  ctrl.workers = args.workers > 0 ? args.workers : default_workers();
  ctrl.stop = &g_interrupted;
  long last_decile = -1;
  if (!args.quiet) {
    ctrl.progress = [&](long done, long total) {
      const long decile = 10 * done / std::max(1L, total);
      if (decile != last_decile) {
        last_decile = decile;
        std::cerr << "progress: " << done << "/" << total << "\n";
      }
      return true;
    };
  }

  const ExperimentReport report = run_experiment(spec, ctrl);

  std::filesystem::create_directories(args.out_dir);
  const std::string base = args.out_dir + "/" + spec.effective_id();
  write_text_file(base + "_records.csv", report.records_csv());
  write_text_file(base + "_aggregates.json", report.aggregates_json());
  std::cerr << "wrote " << base << "_records.csv and " << base << "_aggregates.json\n";

  if (!report.violations.empty()) {
    std::cerr << "invariant violations:\n";
    for (const std::string& v : report.violations) std::cerr << "  - " << v << "\n";
    return 2;
  }
  if (report.truncated) {
    std::cerr << "run truncated (" << report.completed << "/" << report.total << ")\n";
    return 130;
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------------

TargetSet target_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw BadTarget(std::string("target is not valid JSON: ") + e.what());
  }
  try {
    const std::string type = doc.at("type").get<std::string>();
    if (type == "point") return make_point_target(point_from(doc.at("p")));
    if (type == "segment")
      return make_segment_target(point_from(doc.at("a")), point_from(doc.at("b")));
    if (type == "line")
      return line_through(point_from(doc.at("origin")), point_from(doc.at("direction")));
    throw BadTarget("unknown target type: " + type);
  } catch (const nlohmann::json::exception& e) {
    throw BadTarget(std::string("malformed target: ") + e.what());
  }
}

ExperimentSpec experiment_spec_from_json(const std::string& text,
                                         std::vector<std::string>& errors) {
  ExperimentSpec spec;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return spec;
  }
  if (!doc.is_object()) {
    errors.push_back("config must be a JSON object");
    return spec;
  }

  auto check_keys = [&errors](const nlohmann::json& obj, const char* where,
                              std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed)
        if (it.key() == k) ok = true;
      if (!ok)
        errors.push_back(std::string("unknown field '") + it.key() + "' in " + where);
    }
  };
  check_keys(doc, "config",
             {"kind", "id", "c", "t_grid", "gamma", "gamma_prime", "replicas",
              "master_seed", "intensity", "box_side", "solver", "locality", "animal",
              "gamma_grid", "record_timings"});

  auto get = [&](const char* key, auto& dest) {
    if (!doc.contains(key)) return;
    try {
      dest = doc.at(key).get<std::decay_t<decltype(dest)>>();
    } catch (const nlohmann::json::exception&) {
      errors.push_back(std::string("field '") + key + "' has the wrong type");
    }
  };

  std::string kind;
  get("kind", kind);
  if (kind == "moments") spec.kind = ExperimentKind::Moments;
  else if (kind == "xi") spec.kind = ExperimentKind::Xi;
  else if (kind == "variance_diff") spec.kind = ExperimentKind::VarianceDiff;
  else if (kind == "locality") spec.kind = ExperimentKind::Locality;
  else if (kind == "animal_tail") spec.kind = ExperimentKind::AnimalTail;
  else errors.push_back("kind must be one of moments|xi|variance_diff|locality|animal_tail");

  get("id", spec.id);
  get("c", spec.c);
  get("t_grid", spec.t_grid);
  get("gamma", spec.gamma);
  get("gamma_prime", spec.gamma_prime);
  get("replicas", spec.replicas);
  get("master_seed", spec.master_seed);
  get("intensity", spec.intensity);
  get("box_side", spec.box_side);
  get("gamma_grid", spec.gamma_grid);
  get("record_timings", spec.record_timings);

  if (doc.contains("solver")) {
    const auto& js = doc.at("solver");
    check_keys(js, "solver",
               {"max_exact_points", "heuristic_restarts", "action_tolerance",
                "force_mode"});
    try {
      if (js.contains("max_exact_points"))
        spec.solver.max_exact_points = js.at("max_exact_points").get<int>();
      if (js.contains("heuristic_restarts"))
        spec.solver.heuristic_restarts = js.at("heuristic_restarts").get<int>();
      if (js.contains("action_tolerance"))
        spec.solver.action_tolerance = js.at("action_tolerance").get<double>();
      if (js.contains("force_mode")) {
        const std::string mode = js.at("force_mode").get<std::string>();
        if (mode == "auto") spec.solver.force_mode = SolveMode::Auto;
        else if (mode == "exact") spec.solver.force_mode = SolveMode::Exact;
        else if (mode == "heuristic") spec.solver.force_mode = SolveMode::Heuristic;
        else errors.push_back("solver.force_mode must be auto|exact|heuristic");
      }
    } catch (const nlohmann::json::exception& e) {
      errors.push_back(std::string("malformed solver block: ") + e.what());
    }
  }
  if (doc.contains("locality")) {
    const auto& jl = doc.at("locality");
    check_keys(jl, "locality", {"max_insert", "radii", "max_points", "corridor_cells"});
    try {
      if (jl.contains("max_insert")) spec.locality.max_insert = jl.at("max_insert").get<int>();
      if (jl.contains("radii"))
        spec.locality.radii = jl.at("radii").get<std::vector<double>>();
      if (jl.contains("max_points"))
        spec.locality.max_points = jl.at("max_points").get<int>();
      if (jl.contains("corridor_cells"))
        spec.locality.corridor_cells = jl.at("corridor_cells").get<int>();
    } catch (const nlohmann::json::exception& e) {
      errors.push_back(std::string("malformed locality block: ") + e.what());
    }
  }
  if (doc.contains("animal")) {
    const auto& ja = doc.at("animal");
    check_keys(ja, "animal",
               {"box_sides", "sizes", "y_factor", "epsilons", "bernoulli_size",
                "c_tilde", "rho"});
    try {
      if (ja.contains("box_sides"))
        spec.animal.box_sides = ja.at("box_sides").get<std::vector<int>>();
      if (ja.contains("sizes"))
        spec.animal.sizes = ja.at("sizes").get<std::vector<int>>();
      if (ja.contains("y_factor")) spec.animal.y_factor = ja.at("y_factor").get<double>();
      if (ja.contains("epsilons"))
        spec.animal.epsilons = ja.at("epsilons").get<std::vector<double>>();
      if (ja.contains("bernoulli_size"))
        spec.animal.bernoulli_size = ja.at("bernoulli_size").get<int>();
      if (ja.contains("c_tilde")) spec.animal.c_tilde = ja.at("c_tilde").get<double>();
      if (ja.contains("rho")) spec.animal.rho = ja.at("rho").get<double>();
    } catch (const nlohmann::json::exception& e) {
      errors.push_back(std::string("malformed animal block: ") + e.what());
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"continuum first-passage percolation toolkit"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* cmd_s = app.add_subcommand("sample", "sample a Poisson environment");
  cmd_s->add_option("--window", sample.window, "xmin,xmax,ymin,ymax")->delimiter(',');
  cmd_s->add_option("--intensity", sample.intensity, "points per unit area");
  auto* s_seed = cmd_s->add_option("--seed", sample.common.seed, "master seed");
  cmd_s->add_option("--out", sample.out, "output environment file")->required();

  GeodesicArgs geo;
  auto* cmd_g = app.add_subcommand("geodesic", "solve one geodesic problem");
  cmd_g->add_option("--env", geo.env_path, "environment file");
  cmd_g->add_option("--window", geo.window, "xmin,xmax,ymin,ymax")->delimiter(',');
  auto* g_int = cmd_g->add_option("--intensity", geo.intensity, "sampling intensity");
  cmd_g->add_option("--target", geo.target_json, "target JSON");
  auto* g_lt = cmd_g->add_option("--line-t", geo.line_t, "target line at x = t");
  auto* g_c = cmd_g->add_option("--c", geo.c, "time scale factor, s = c t");
  auto* g_t = cmd_g->add_option("--t", geo.t, "distance scale t");
  auto* g_s = cmd_g->add_option("--s", geo.s, "time budget s");
  cmd_g->add_flag("--exact", geo.force_exact, "force the exact solver");
  cmd_g->add_flag("--heuristic", geo.force_heuristic, "force the heuristic solver");
  cmd_g->add_option("--max-exact-points", geo.max_exact_points, "exact solver cap");
  cmd_g->add_option("--restarts", geo.restarts, "heuristic restarts");
  auto* g_seed = cmd_g->add_option("--seed", geo.common.seed, "master seed");
  cmd_g->add_option("--out", geo.out, "output file (stdout when omitted)");

  AnimalArgs ani;
  auto* cmd_a = app.add_subcommand("animal", "greedy lattice animal on a grid file");
  cmd_a->add_option("--grid", ani.grid_path, "grid file")->required();
  cmd_a->add_option("--n", ani.n, "animal size")->required();
  cmd_a->add_flag("--heuristic", ani.heuristic, "use the accretion heuristic");
  auto* a_seed = cmd_a->add_option("--seed", ani.common.seed, "master seed");
  cmd_a->add_option("--out", ani.out, "output file (stdout when omitted)");

  ExperimentArgs exp;
  auto* cmd_e = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  cmd_e->add_option("--config", exp.config_path, "experiment spec JSON")->required();
  auto* e_seed = cmd_e->add_option("--seed", exp.common.seed, "master seed override");
  cmd_e->add_option("--out", exp.out_dir, "output directory");
  cmd_e->add_option("--workers", exp.workers, "worker threads (default FPP_WORKERS or 1)");
  auto* e_c = cmd_e->add_option("--c", exp.c, "override c");
  cmd_e->add_option("--t", exp.t_list, "override t grid, comma separated");
  auto* e_gp = cmd_e->add_option("--gamma-prime", exp.gamma_prime, "override gamma'");
  auto* e_r = cmd_e->add_option("--replicas", exp.replicas, "override replicas");
  cmd_e->add_flag("--exact", exp.force_exact, "force the exact solver");
  auto* e_k = cmd_e->add_option("--k", exp.k, "override box side K (odd)");
  cmd_e->add_flag("--timings", exp.timings,
                  "record wall times per record (breaks byte-identical reruns)");
  cmd_e->add_flag("--quiet", exp.quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_s->parsed()) {
      sample.common.seed_set = s_seed->count() > 0;
      return cmd_sample(sample);
    }
    if (cmd_g->parsed()) {
      geo.common.seed_set = g_seed->count() > 0;
      geo.intensity_set = g_int->count() > 0;
      geo.line_t_set = g_lt->count() > 0;
      geo.c_set = g_c->count() > 0;
      geo.t_set = g_t->count() > 0;
      geo.s_set = g_s->count() > 0;
      return cmd_geodesic(geo);
    }
    if (cmd_a->parsed()) {
      ani.common.seed_set = a_seed->count() > 0;
      return cmd_animal(ani);
    }
    if (cmd_e->parsed()) {
      exp.common.seed_set = e_seed->count() > 0;
      exp.c_set = e_c->count() > 0;
      exp.gamma_prime_set = e_gp->count() > 0;
      exp.replicas_set = e_r->count() > 0;
      exp.k_set = e_k->count() > 0;
      return cmd_experiment(exp);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace fpp
