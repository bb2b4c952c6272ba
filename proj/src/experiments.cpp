#include "fpp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "fpp/report_io.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr double kHardTol = 1e-9;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Moments: return "moments";
    case ExperimentKind::Xi: return "xi";
    case ExperimentKind::VarianceDiff: return "variance_diff";
    case ExperimentKind::Locality: return "locality";
    case ExperimentKind::AnimalTail: return "animal_tail";
  }
  return "unknown";
}

std::string ExperimentSpec::effective_id() const {
  if (!id.empty()) return id;
  return kind_name(kind) + "-s" + fmt_u64(master_seed);
}

std::vector<std::string> ExperimentSpec::validate() const {
  std::vector<std::string> errors;
  const bool needs_t = kind != ExperimentKind::AnimalTail;

  if (needs_t) {
    if (t_grid.empty()) errors.push_back("t_grid must not be empty");
    for (double t : t_grid)
      if (!(t > 1.0)) errors.push_back("t values must exceed 1");
    for (size_t i = 1; i < t_grid.size(); ++i)
      if (!(t_grid[i] > t_grid[i - 1]))
        errors.push_back("t_grid must be strictly increasing");
    if (!(c > 0.0 && c <= 1.0)) errors.push_back("c must lie in (0, 1]");
    if (!(intensity >= 0.0)) errors.push_back("intensity must be nonnegative");
  }
  if (replicas < 1) errors.push_back("replicas must be at least 1");
  if (box_side < 1 || box_side % 2 == 0)
    errors.push_back("box side K must be a positive odd integer");

  try {
    validate_options(solver);
  } catch (const Error& e) {
    errors.push_back(e.what());
  }

  if (kind == ExperimentKind::VarianceDiff || kind == ExperimentKind::Xi ||
      kind == ExperimentKind::Moments) {
    if (!(gamma_prime > 0.5 && gamma_prime < 1.0))
      errors.push_back("gamma_prime must lie in (1/2, 1)");
    if (!(gamma < gamma_prime)) errors.push_back("gamma must be below gamma_prime");
    if (!(gamma > 0.0)) errors.push_back("gamma must be positive");
  }
  if (kind == ExperimentKind::Xi) {
    if (gamma_grid.empty()) errors.push_back("gamma_grid must not be empty");
    for (double g : gamma_grid)
      if (!(g > 0.0 && g < 1.0)) errors.push_back("gamma_grid entries must lie in (0, 1)");
  }
  if (kind == ExperimentKind::Locality) {
    if (locality.max_insert < 1) errors.push_back("locality.max_insert must be >= 1");
    if (locality.max_points < 0) errors.push_back("locality.max_points must be >= 0");
    if (locality.max_points + locality.max_insert > solver.max_exact_points)
      errors.push_back(
          "locality.max_points + locality.max_insert must fit the exact solver cap");
    if (locality.radii.empty()) errors.push_back("locality.radii must not be empty");
    for (double r : locality.radii)
      if (!(r > 0.0)) errors.push_back("locality radii must be positive");
    if (locality.corridor_cells < 0)
      errors.push_back("locality.corridor_cells must be >= 0");
  }
  if (kind == ExperimentKind::AnimalTail) {
    const auto& a = animal;
    if (a.box_sides.empty()) errors.push_back("animal.box_sides must not be empty");
    for (int k : a.box_sides)
      if (k < 1 || k % 2 == 0)
        errors.push_back("animal.box_sides must be positive odd integers");
    if (a.sizes.empty()) errors.push_back("animal.sizes must not be empty");
    for (int n : a.sizes)
      if (n < 1 || n > 8) errors.push_back("animal.sizes must lie in [1, 8]");
    if (!(a.y_factor >= 0.0)) errors.push_back("animal.y_factor must be nonnegative");
    for (double e : a.epsilons)
      if (!(e >= 0.0 && e <= 1.0)) errors.push_back("animal.epsilons must lie in [0, 1]");
    if (a.bernoulli_size < 1 || a.bernoulli_size > kAnimalEnumCap)
      errors.push_back("animal.bernoulli_size must lie in [1, 10]");
    if (!(a.c_tilde > 0.0)) errors.push_back("animal.c_tilde must be positive");
    if (!(a.rho > 0.0)) errors.push_back("animal.rho must be positive");
  }
  return errors;
}

WindowPolicy point_to_line_window(double t, double c, double intensity, double box_side) {
  const double s = c * t;
  const double baseline = t / (2.0 * c);
  const double n_hat = intensity * 2.0 * (t + 2.0);
  const double h = std::sqrt(2.0 * s * (n_hat + baseline)) + box_side;
  WindowPolicy wp;
  wp.n_hat = n_hat;
  wp.half_height = h;
  wp.window = make_window(-h, t + h, -h, h);
  return wp;
}

// ---------------------------------------------------------------------------
// task plumbing
// ---------------------------------------------------------------------------

namespace {

void run_parallel(long total, const RunControl& ctrl,
                  const std::function<void(long)>& work, std::vector<char>& done_flags,
                  long& completed, bool& truncated) {
  done_flags.assign(static_cast<size_t>(total), 0);
  std::atomic<long> next{0};
  std::atomic<long> done{0};
  std::atomic<bool> halt{false};
  std::mutex progress_mu;

  auto worker = [&]() {
    while (true) {
      if (halt.load(std::memory_order_relaxed)) break;
      if (ctrl.stop != nullptr && ctrl.stop->load()) {
        halt.store(true);
        break;
      }
      const long i = next.fetch_add(1);
      if (i >= total) break;
      work(i);
      done_flags[static_cast<size_t>(i)] = 1;
      const long d = done.fetch_add(1) + 1;
      if (ctrl.progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        if (!ctrl.progress(d, total)) halt.store(true);
      }
    }
  };

  const int workers = std::max(1, ctrl.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  completed = done.load();
  truncated = completed < total;
}

PointConfig sample_environment(const Window& window, double intensity, uint64_t seed) {
  if (intensity > 0.0) return PointConfig::poisson(window, intensity, seed);
  // empty-environment control; sample_poisson itself rejects intensity <= 0
  return PointConfig::from_points(window, {}, SeedRecord{seed, 0.0, "poisson"});
}

// Uniform point in the given rect, at least 1e-12 away from existing points.
Point2 sample_point_avoiding(const PointConfig& cfg, Rng& rng, double xmin, double xmax,
                             double ymin, double ymax) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    const Point2 z{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
    bool clash = false;
    cfg.for_each_in_disk(z, kGeomTol, [&](int32_t, Point2) { clash = true; });
    if (!clash && cfg.window().contains(z)) return z;
  }
  throw Error("could not sample a fresh point in the requested region");
}

struct SolveOutcome {
  PathSolution sol;
  double wall_ms = 0.0;
};

SolveOutcome timed_solve(const GeodesicProblem& pb, bool record_timing) {
  SolveOutcome out;
  const double t0 = record_timing ? now_ms() : 0.0;
  out.sol = solve(pb);
  if (record_timing) out.wall_ms = now_ms() - t0;
  return out;
}

double path_deviation(const PathSolution& sol, const PointConfig& cfg) {
  std::vector<Point2> pts;
  pts.reserve(sol.path.interior.size() + 2);
  pts.push_back(sol.path.start);
  for (int32_t idx : sol.path.interior) pts.push_back(cfg.points()[idx]);
  pts.push_back(sol.path.terminal);
  return transversal_deviation(pts, Point2{1.0, 0.0});
}

}  // namespace

// ---------------------------------------------------------------------------
// drivers
// ---------------------------------------------------------------------------

namespace {

void run_solve_grid(const ExperimentSpec& spec, const RunControl& ctrl,
                    ExperimentReport& report) {
  const long nt = static_cast<long>(spec.t_grid.size());
  const long total = nt * spec.replicas;
  std::vector<SolveRecord> slots(static_cast<size_t>(total));

  auto work = [&](long index) {
    const long ti = index / spec.replicas;
    const long replica = index % spec.replicas;
    const double t = spec.t_grid[static_cast<size_t>(ti)];
    const uint64_t rec_seed = mix_seed(spec.master_seed, static_cast<uint64_t>(index));

    const WindowPolicy wp =
        point_to_line_window(t, spec.c, spec.intensity, spec.box_side);
    const PointConfig cfg =
        sample_environment(wp.window, spec.intensity, mix_seed(rec_seed, 1));
    SolverOptions opts = spec.solver;
    opts.heuristic_seed = mix_seed(rec_seed, 2);
    const GeodesicProblem pb = make_problem(
        cfg, {0.0, 0.0},
        make_segment_target({t, -wp.half_height}, {t, wp.half_height}),
        params_from_ct(spec.c, t), opts);
    const SolveOutcome out = timed_solve(pb, spec.record_timings);

    SolveRecord rec;
    rec.t = t;
    rec.replica = replica;
    rec.seed = rec_seed;
    rec.action = out.sol.action;
    rec.length = out.sol.length;
    rec.n_points = out.sol.n_points;
    rec.deviation = path_deviation(out.sol, cfg);
    rec.speed = out.sol.length / pb.params.s;
    rec.touched_unit = static_cast<long>(touched_boxes(out.sol, cfg, 1).size());
    rec.exact = out.sol.optimal;
    rec.wall_ms = out.wall_ms;
    slots[static_cast<size_t>(index)] = rec;
  };

  std::vector<char> flags;
  run_parallel(total, ctrl, work, flags, report.completed, report.truncated);
  report.total = total;
  for (long i = 0; i < total; ++i)
    if (flags[static_cast<size_t>(i)]) report.solve_records.push_back(slots[static_cast<size_t>(i)]);
}

void run_variance_diff_driver(const ExperimentSpec& spec, const RunControl& ctrl,
                              ExperimentReport& report) {
  const long nt = static_cast<long>(spec.t_grid.size());
  const long total = nt * spec.replicas;
  std::vector<PairRecord> slots(static_cast<size_t>(total));

  auto work = [&](long index) {
    const long ti = index / spec.replicas;
    const long replica = index % spec.replicas;
    const double t = spec.t_grid[static_cast<size_t>(ti)];
    const uint64_t rec_seed = mix_seed(spec.master_seed, static_cast<uint64_t>(index));

    WindowPolicy wp = point_to_line_window(t, spec.c, spec.intensity, spec.box_side);
    // both segments have to fit; the rotated one reaches ~2 t^gamma' sideways
    const double needed =
        2.0 * std::pow(t, spec.gamma_prime) + static_cast<double>(spec.box_side);
    if (wp.half_height < needed) {
      wp.half_height = needed;
      wp.window = make_window(-needed, t + needed, -needed, needed);
    }
    const PointConfig cfg =
        sample_environment(wp.window, spec.intensity, mix_seed(rec_seed, 1));
    const VarianceSegments vs = make_variance_segments(t, spec.gamma_prime);

    SolverOptions opts = spec.solver;
    opts.heuristic_seed = mix_seed(rec_seed, 2);
    const GeodesicProblem pb_s =
        make_problem(cfg, {0.0, 0.0}, make_segment_target(vs.s.a, vs.s.b),
                     params_from_ct(spec.c, t), opts);
    opts.heuristic_seed = mix_seed(rec_seed, 3);
    const GeodesicProblem pb_sp =
        make_problem(cfg, {0.0, 0.0}, make_segment_target(vs.s_prime.a, vs.s_prime.b),
                     params_from_ct(spec.c, t), opts);

    const SolveOutcome a = timed_solve(pb_s, spec.record_timings);
    const SolveOutcome b = timed_solve(pb_sp, spec.record_timings);

    PairRecord rec;
    rec.t = t;
    rec.replica = replica;
    rec.seed = rec_seed;
    rec.action_s = a.sol.action;
    rec.action_s_prime = b.sol.action;
    rec.length_s = a.sol.length;
    rec.length_s_prime = b.sol.length;
    rec.n_points_s = a.sol.n_points;
    rec.n_points_s_prime = b.sol.n_points;
    rec.exact = a.sol.optimal && b.sol.optimal;
    rec.wall_ms = a.wall_ms + b.wall_ms;
    slots[static_cast<size_t>(index)] = rec;
  };

  std::vector<char> flags;
  run_parallel(total, ctrl, work, flags, report.completed, report.truncated);
  report.total = total;
  for (long i = 0; i < total; ++i)
    if (flags[static_cast<size_t>(i)]) report.pair_records.push_back(slots[static_cast<size_t>(i)]);
}

void run_locality_driver(const ExperimentSpec& spec, const RunControl& ctrl,
                         ExperimentReport& report) {
  const long nt = static_cast<long>(spec.t_grid.size());
  const long total = nt * spec.replicas;
  std::vector<LocalityRecord> slots(static_cast<size_t>(total));

  auto work = [&](long index) {
    const long ti = index / spec.replicas;
    const long replica = index % spec.replicas;
    const double t = spec.t_grid[static_cast<size_t>(ti)];
    const uint64_t rec_seed = mix_seed(spec.master_seed, static_cast<uint64_t>(index));
    Rng rng(mix_seed(rec_seed, 4));

    const WindowPolicy wp =
        point_to_line_window(t, spec.c, spec.intensity, spec.box_side);
    PointConfig cfg = sample_environment(wp.window, spec.intensity, mix_seed(rec_seed, 1));
    // exact-solver regime: keep only the first max_points points
    if (cfg.size() > spec.locality.max_points) {
      std::vector<Point2> pts(cfg.points().begin(),
                              cfg.points().begin() + spec.locality.max_points);
      SeedRecord rec_meta = cfg.seed_record();
      rec_meta.source = "poisson-truncated";
      cfg = PointConfig::from_points(cfg.window(), std::move(pts), rec_meta);
    }

    SolverOptions opts = spec.solver;
    opts.force_mode = SolveMode::Exact;
    opts.heuristic_seed = mix_seed(rec_seed, 2);
    const GeodesicProblem pb = make_problem(
        cfg, {0.0, 0.0},
        make_segment_target({t, -wp.half_height}, {t, wp.half_height}),
        params_from_ct(spec.c, t), opts);

    const double t0 = spec.record_timings ? now_ms() : 0.0;
    const PathSolution before = solve(pb);

    // K-box within the corridor, fully inside the window
    const double K = static_cast<double>(spec.box_side);
    const int imax = static_cast<int>(std::floor(t / K));
    const int jspan = spec.locality.corridor_cells;
    const int bi = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(imax + 1)));
    const int bj = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(2 * jspan + 1))) - jspan;
    const int inserted = 1 + static_cast<int>(rng.uniform_int(
                                 static_cast<uint64_t>(spec.locality.max_insert)));

    PointConfig perturbed = cfg;
    for (int p = 0; p < inserted; ++p) {
      const Point2 z = sample_point_avoiding(perturbed, rng, K * bi - K / 2.0,
                                             K * bi + K / 2.0, K * bj - K / 2.0,
                                             K * bj + K / 2.0);
      const Point2 zz[1] = {z};
      perturbed = perturbed.inserted(zz);
    }
    const GeodesicProblem pb_after =
        make_problem(perturbed, {0.0, 0.0}, pb.target, pb.params, opts);
    const PathSolution after = solve(pb_after);

    LocalityRecord rec;
    rec.t = t;
    rec.replica = replica;
    rec.seed = rec_seed;
    rec.box_i = bi;
    rec.box_j = bj;
    rec.inserted = inserted;
    rec.action_before = before.action;
    rec.action_after = after.action;
    rec.g = before.action - after.action;
    rec.exact = before.optimal && after.optimal;

    // radius probe: one extra point near a collected point of the minimizer
    if (before.n_points > 0) {
      const double r =
          spec.locality.radii[static_cast<size_t>(replica) % spec.locality.radii.size()];
      const int32_t pick = before.path.interior[rng.uniform_int(
          static_cast<uint64_t>(before.path.interior.size()))];
      const Point2 center = cfg.points()[pick];
      Point2 z{};
      bool ok = false;
      for (int attempt = 0; attempt < 256 && !ok; ++attempt) {
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const double rad = r * std::sqrt(rng.uniform01());
        z = center + Point2{rad * std::cos(ang), rad * std::sin(ang)};
        if (!cfg.window().contains(z)) continue;
        bool clash = false;
        cfg.for_each_in_disk(z, kGeomTol, [&](int32_t, Point2) { clash = true; });
        ok = !clash;
      }
      if (ok) {
        const Point2 zz[1] = {z};
        const PointConfig probe_cfg = cfg.inserted(zz);
        const GeodesicProblem pb_probe =
            make_problem(probe_cfg, {0.0, 0.0}, pb.target, pb.params, opts);
        const PathSolution probe = solve(pb_probe);
        rec.probe_r = r;
        rec.probe_g = before.action - probe.action;
        rec.probe_hit = rec.probe_g >= 0.5 - kHardTol ? 1 : 0;
      }
    }
    if (spec.record_timings) rec.wall_ms = now_ms() - t0;
    slots[static_cast<size_t>(index)] = rec;
  };

  std::vector<char> flags;
  run_parallel(total, ctrl, work, flags, report.completed, report.truncated);
  report.total = total;
  for (long i = 0; i < total; ++i)
    if (flags[static_cast<size_t>(i)]) report.locality_records.push_back(slots[static_cast<size_t>(i)]);
}

void run_animal_tail_driver(const ExperimentSpec& spec, const RunControl& ctrl,
                            ExperimentReport& report) {
  struct Row {
    bool bernoulli = false;
    double param = 0.0;  // lambda or epsilon
    int n = 0;
    double y = 0.0;
  };
  std::vector<Row> rows;
  const double e3 = std::exp(3.0);
  for (int K : spec.animal.box_sides) {
    const double lambda = static_cast<double>(K) * K;
    for (int n : spec.animal.sizes)
      rows.push_back({false, lambda, n, spec.animal.y_factor * e3 * lambda});
  }
  // sanity row: P(N_1 > 0) = 1 - e^{-1} for the unit field
  rows.push_back({false, 1.0, 1, 0.0});
  for (double eps : spec.animal.epsilons)
    rows.push_back({true, eps, spec.animal.bernoulli_size, 0.0});

  const long total = static_cast<long>(rows.size());
  std::vector<TailRecord> slots(static_cast<size_t>(total));

  auto work = [&](long index) {
    const Row& row = rows[static_cast<size_t>(index)];
    const uint64_t rec_seed = mix_seed(spec.master_seed, static_cast<uint64_t>(index));
    TailEstimate est;
    TailRecord rec;
    if (row.bernoulli) {
      est = bernoulli_tail_estimate(row.n, row.param, spec.replicas, rec_seed,
                                    spec.animal.c_tilde);
      rec.field = "bernoulli";
      rec.y = est.threshold / row.n;
    } else {
      est = poisson_tail_estimate(row.n, row.y, row.param, spec.replicas, rec_seed,
                                  spec.animal.rho);
      rec.field = "poisson";
      rec.y = row.y;
    }
    rec.param = row.param;
    rec.n = row.n;
    rec.threshold = est.threshold;
    rec.reps = est.reps;
    rec.seed = rec_seed;
    rec.freq = est.empirical;
    rec.std_error = est.std_error;
    rec.bound = est.bound;
    rec.in_regime = est.in_regime;
    rec.mean_weight = est.mean_weight;
    rec.mean_weight_se = est.mean_weight_se;
    slots[static_cast<size_t>(index)] = rec;
  };

  std::vector<char> flags;
  run_parallel(total, ctrl, work, flags, report.completed, report.truncated);
  report.total = total;
  for (long i = 0; i < total; ++i)
    if (flags[static_cast<size_t>(i)]) report.tail_records.push_back(slots[static_cast<size_t>(i)]);
}

}  // namespace

// ---------------------------------------------------------------------------
// aggregation
// ---------------------------------------------------------------------------

void compute_aggregates(ExperimentReport& report) {
  const ExperimentSpec& spec = report.spec;
  report.per_t.clear();
  report.containment.clear();
  report.radius_curve.clear();
  report.violations.clear();
  report.xi_fit = {};
  report.upper_ratio_trend = {};
  report.speed_trend = {};
  report.animal_moment_fit = {};

  auto window_meta = [&](double t, TStats& st) {
    const WindowPolicy wp =
        point_to_line_window(t, spec.c, spec.intensity, spec.box_side);
    st.window_half_height = wp.half_height;
    st.n_hat = wp.n_hat;
  };

  if (spec.kind == ExperimentKind::Moments || spec.kind == ExperimentKind::Xi) {
    std::sort(report.solve_records.begin(), report.solve_records.end(),
              [](const SolveRecord& a, const SolveRecord& b) {
                return std::tie(a.t, a.replica) < std::tie(b.t, b.replica);
              });
    std::vector<double> ts, medians, mean_speeds;
    for (double t : spec.t_grid) {
      std::vector<double> actions, lengths, touched, speeds, devs;
      for (const SolveRecord& r : report.solve_records) {
        if (r.t != t) continue;
        actions.push_back(r.action);
        lengths.push_back(r.length);
        touched.push_back(static_cast<double>(r.touched_unit));
        speeds.push_back(r.speed);
        devs.push_back(r.deviation);
      }
      if (actions.empty()) continue;
      TStats st;
      st.t = t;
      st.n = static_cast<long>(actions.size());
      Welford wa, ws;
      for (double a : actions) wa.add(a);
      for (double v : speeds) ws.add(v);
      st.mean_action = wa.mean;
      st.se_action = wa.stderr_mean();
      for (int k = 1; k <= 4; ++k) {
        st.abs_action_moment[k] = abs_moment(actions, k);
        st.speed_moment[k] = abs_moment(speeds, k);
      }
      st.mean_speed_se = ws.stderr_mean();
      st.length_moment2 = abs_moment(lengths, 2);
      st.length_moment4 = abs_moment(lengths, 4);
      st.touched_moment2 = abs_moment(touched, 2);
      st.touched_moment4 = abs_moment(touched, 4);
      st.median_deviation = median(devs);
      st.q25_deviation = quantile(devs, 0.25);
      st.q75_deviation = quantile(devs, 0.75);
      st.mean_deviation = mean_of(devs);
      window_meta(t, st);
      report.per_t.push_back(st);
      ts.push_back(t);
      medians.push_back(st.median_deviation);
      mean_speeds.push_back(st.speed_moment[1]);
    }
    if (spec.kind == ExperimentKind::Xi) {
      report.xi_fit = loglog_fit(ts, medians);
      for (double g : spec.gamma_grid) {
        ContainmentRow row;
        row.gamma = g;
        for (double t : spec.t_grid) {
          long inside = 0, count = 0;
          const double cap = std::pow(t, g);
          for (const SolveRecord& r : report.solve_records) {
            if (r.t != t) continue;
            ++count;
            if (r.deviation <= cap) ++inside;
          }
          row.frequency.push_back(count > 0 ? static_cast<double>(inside) / count : 0.0);
        }
        report.containment.push_back(row);
      }
    }
    if (spec.kind == ExperimentKind::Moments)
      report.speed_trend = trend_vs_log(ts, mean_speeds);
  }

  if (spec.kind == ExperimentKind::VarianceDiff) {
    std::sort(report.pair_records.begin(), report.pair_records.end(),
              [](const PairRecord& a, const PairRecord& b) {
                return std::tie(a.t, a.replica) < std::tie(b.t, b.replica);
              });
    std::vector<double> ts, upper_ratios;
    for (double t : spec.t_grid) {
      std::vector<double> diffs;
      for (const PairRecord& r : report.pair_records)
        if (r.t == t) diffs.push_back(r.action_s - r.action_s_prime);
      if (diffs.empty()) continue;
      TStats st;
      st.t = t;
      st.n = static_cast<long>(diffs.size());
      Welford w;
      for (double d : diffs) w.add(d);
      st.mean_diff = w.mean;
      st.se_diff = w.stderr_mean();
      st.var_diff = w.variance_sample();
      st.var_diff_jackknife_se = jackknife_variance_se(diffs);
      st.var_over_upper = st.var_diff / std::pow(t, 2.0 * (2.0 * spec.gamma_prime - 1.0));
      st.var_over_lower = st.var_diff / std::pow(t, 1.0 - spec.gamma);
      window_meta(t, st);
      report.per_t.push_back(st);
      ts.push_back(t);
      upper_ratios.push_back(st.var_over_upper);
    }
    report.upper_ratio_trend = trend_vs_log(ts, upper_ratios);
  }

  if (spec.kind == ExperimentKind::Locality) {
    std::sort(report.locality_records.begin(), report.locality_records.end(),
              [](const LocalityRecord& a, const LocalityRecord& b) {
                return std::tie(a.t, a.replica) < std::tie(b.t, b.replica);
              });
    for (const LocalityRecord& r : report.locality_records) {
      if (r.g < -kHardTol || r.g > static_cast<double>(r.inserted) + kHardTol)
        report.violations.push_back(
            "locality bound violated at t=" + fmt17(r.t) + " replica=" +
            fmt_int(r.replica) + ": g=" + fmt17(r.g) + " with j=" + fmt_int(r.inserted));
    }
    for (double r : spec.locality.radii) {
      LocalityRadiusStat st;
      st.r = r;
      long hits = 0;
      for (const LocalityRecord& rec : report.locality_records) {
        if (rec.probe_hit < 0 || rec.probe_r != r) continue;
        ++st.trials;
        hits += rec.probe_hit;
      }
      st.hit_frequency = st.trials > 0 ? static_cast<double>(hits) / st.trials : 0.0;
      report.radius_curve.push_back(st);
    }
  }

  if (spec.kind == ExperimentKind::AnimalTail) {
    std::vector<double> ns, means;
    for (const TailRecord& r : report.tail_records) {
      if (r.in_regime && r.freq > r.bound + 3.0 * r.std_error)
        report.violations.push_back("tail bound exceeded for " + r.field + " field, n=" +
                                    fmt_int(r.n) + ": freq=" + fmt17(r.freq) +
                                    " bound=" + fmt17(r.bound));
      if (r.field == "poisson" && r.param == 1.0 && r.in_regime) {
        ns.push_back(static_cast<double>(r.n));
        means.push_back(r.mean_weight);
      }
    }
    if (ns.size() >= 2) report.animal_moment_fit = linear_fit(ns, means);
  }
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunControl& control) {
  const std::vector<std::string> errors = spec.validate();
  if (!errors.empty()) {
    std::string all = "invalid experiment spec:";
    for (const std::string& e : errors) all += "\n  - " + e;
    throw BadSpec(all);
  }

  ExperimentReport report;
  report.spec = spec;

  switch (spec.kind) {
    case ExperimentKind::Moments:
    case ExperimentKind::Xi:
      run_solve_grid(spec, control, report);
      report.notes.push_back(
          "target line at distance t truncated to the segment x = t, |y| <= h(t); "
          "h and the corridor estimate n_hat are recorded per t");
      report.notes.push_back(
          "deviation is measured over the discrete path vertices (start, collected "
          "points, terminal); sag of the polyline between vertices is not included");
      break;
    case ExperimentKind::VarianceDiff:
      run_variance_diff_driver(spec, control, report);
      report.notes.push_back(
          "paired design: both target segments are solved on the same sampled "
          "environment per replica");
      break;
    case ExperimentKind::Locality:
      run_locality_driver(spec, control, report);
      report.notes.push_back(
          "environment truncated to the first " + fmt_int(spec.locality.max_points) +
          " sampled points so both solves stay in the exact regime");
      break;
    case ExperimentKind::AnimalTail:
      run_animal_tail_driver(spec, control, report);
      report.notes.push_back(
          "rho and c_tilde are configuration constants, not measured values; they "
          "only set reporting thresholds");
      break;
  }
  report.notes.push_back(
      "finite t grids are user-chosen; asymptotic statements are reported as trends, "
      "never asserted at fixed t");
  if (report.truncated) report.notes.push_back("run truncated before completion");

  compute_aggregates(report);
  return report;
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

namespace {

std::string solver_mode_name(bool exact) { return exact ? "exact" : "heuristic"; }

void append_row(std::string& out, const std::vector<std::string>& cols) {
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(cols[i]);
  }
  out += '\n';
}

}  // namespace

std::string ExperimentReport::records_csv() const {
  std::string out;
  const std::string id = spec.effective_id();
  const std::string kind = kind_name(spec.kind);
  std::vector<std::string> header;

  switch (spec.kind) {
    case ExperimentKind::Moments:
      header = {"experiment_id", "kind", "c", "t", "replica", "derived_seed",
                "action", "length", "n_points", "touched_unit", "speed",
                "deviation", "solver_mode", "wall_ms"};
      break;
    case ExperimentKind::Xi:
      header = {"experiment_id", "kind", "c", "t", "replica", "derived_seed",
                "action", "length", "n_points", "deviation", "solver_mode", "wall_ms"};
      break;
    case ExperimentKind::VarianceDiff:
      header = {"experiment_id", "kind", "c", "t", "replica", "derived_seed",
                "action_s", "action_s_prime", "diff", "length_s", "length_s_prime",
                "n_points_s", "n_points_s_prime", "solver_mode", "wall_ms"};
      break;
    case ExperimentKind::Locality:
      header = {"experiment_id", "kind", "c", "t", "replica", "derived_seed",
                "box_i", "box_j", "inserted", "action_before", "action_after", "g",
                "probe_r", "probe_g", "probe_hit", "solver_mode", "wall_ms"};
      break;
    case ExperimentKind::AnimalTail:
      header = {"experiment_id", "kind", "field", "param", "n", "y", "threshold",
                "reps", "derived_seed", "freq", "std_error", "bound", "in_regime",
                "mean_weight", "mean_weight_se"};
      break;
  }
  append_row(out, header);

  switch (spec.kind) {
    case ExperimentKind::Moments:
      for (const SolveRecord& r : solve_records)
        append_row(out, {id, kind, fmt17(spec.c), fmt17(r.t), fmt_int(r.replica),
                         fmt_u64(r.seed), fmt17(r.action), fmt17(r.length),
                         fmt_int(r.n_points), fmt_int(r.touched_unit), fmt17(r.speed),
                         fmt17(r.deviation), solver_mode_name(r.exact), fmt17(r.wall_ms)});
      break;
    case ExperimentKind::Xi:
      for (const SolveRecord& r : solve_records)
        append_row(out, {id, kind, fmt17(spec.c), fmt17(r.t), fmt_int(r.replica),
                         fmt_u64(r.seed), fmt17(r.action), fmt17(r.length),
                         fmt_int(r.n_points), fmt17(r.deviation),
                         solver_mode_name(r.exact), fmt17(r.wall_ms)});
      break;
    case ExperimentKind::VarianceDiff:
      for (const PairRecord& r : pair_records)
        append_row(out, {id, kind, fmt17(spec.c), fmt17(r.t), fmt_int(r.replica),
                         fmt_u64(r.seed), fmt17(r.action_s), fmt17(r.action_s_prime),
                         fmt17(r.action_s - r.action_s_prime), fmt17(r.length_s),
                         fmt17(r.length_s_prime), fmt_int(r.n_points_s),
                         fmt_int(r.n_points_s_prime), solver_mode_name(r.exact),
                         fmt17(r.wall_ms)});
      break;
    case ExperimentKind::Locality:
      for (const LocalityRecord& r : locality_records)
        append_row(out, {id, kind, fmt17(spec.c), fmt17(r.t), fmt_int(r.replica),
                         fmt_u64(r.seed), fmt_int(r.box_i), fmt_int(r.box_j),
                         fmt_int(r.inserted), fmt17(r.action_before),
                         fmt17(r.action_after), fmt17(r.g), fmt17(r.probe_r),
                         fmt17(r.probe_g), fmt_int(r.probe_hit),
                         solver_mode_name(r.exact), fmt17(r.wall_ms)});
      break;
    case ExperimentKind::AnimalTail:
      for (const TailRecord& r : tail_records)
        append_row(out, {id, kind, r.field, fmt17(r.param), fmt_int(r.n), fmt17(r.y),
                         fmt17(r.threshold), fmt_int(r.reps), fmt_u64(r.seed),
                         fmt17(r.freq), fmt17(r.std_error), fmt17(r.bound),
                         r.in_regime ? "1" : "0", fmt17(r.mean_weight),
                         fmt17(r.mean_weight_se)});
      break;
  }

  if (truncated) {
    std::vector<std::string> marker(header.size());
    marker[0] = id;
    marker[1] = "truncated";
    append_row(out, marker);
  }
  return out;
}

namespace {

void write_fit(JsonWriter& w, const FitResult& fit) {
  w.begin_object();
  w.key("valid").value(fit.valid);
  w.key("exponent").value(fit.exponent);
  w.key("intercept").value(fit.intercept);
  w.key("std_error").value(fit.std_error);
  w.key("r_squared").value(fit.r_squared);
  w.key("n").value(static_cast<int64_t>(fit.n));
  w.end_object();
}

void write_trend(JsonWriter& w, const TrendCheck& trend) {
  w.begin_object();
  w.key("valid").value(trend.valid);
  w.key("slope").value(trend.slope);
  w.key("slope_se").value(trend.slope_se);
  w.key("upward_beyond_2sigma").value(trend.upward_beyond_2sigma);
  w.key("any_beyond_2sigma").value(trend.any_beyond_2sigma);
  w.end_object();
}

}  // namespace

std::string ExperimentReport::aggregates_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("experiment_id").value(spec.effective_id());
  w.key("kind").value(kind_name(spec.kind));
  w.key("spec").begin_object();
  w.key("c").value(spec.c);
  w.key("t_grid").begin_array();
  for (double t : spec.t_grid) w.value(t);
  w.end_array();
  w.key("gamma").value(spec.gamma);
  w.key("gamma_prime").value(spec.gamma_prime);
  w.key("replicas").value(static_cast<int64_t>(spec.replicas));
  w.key("master_seed").value(spec.master_seed);
  w.key("intensity").value(spec.intensity);
  w.key("box_side").value(static_cast<int64_t>(spec.box_side));
  w.key("solver").begin_object();
  w.key("max_exact_points").value(static_cast<int64_t>(spec.solver.max_exact_points));
  w.key("heuristic_restarts").value(static_cast<int64_t>(spec.solver.heuristic_restarts));
  w.key("action_tolerance").value(spec.solver.action_tolerance);
  w.key("force_mode").value(spec.solver.force_mode == SolveMode::Auto
                                ? "auto"
                                : (spec.solver.force_mode == SolveMode::Exact
                                       ? "exact"
                                       : "heuristic"));
  w.end_object();
  w.end_object();

  w.key("completed").value(static_cast<int64_t>(completed));
  w.key("total").value(static_cast<int64_t>(total));
  w.key("truncated").value(truncated);

  w.key("per_t").begin_array();
  for (const TStats& st : per_t) {
    w.begin_object();
    w.key("t").value(st.t);
    w.key("n").value(static_cast<int64_t>(st.n));
    w.key("window_half_height").value(st.window_half_height);
    w.key("n_hat").value(st.n_hat);
    if (spec.kind == ExperimentKind::Moments || spec.kind == ExperimentKind::Xi) {
      w.key("mean_action").value(st.mean_action);
      w.key("se_action").value(st.se_action);
      w.key("abs_action_moments").begin_array();
      for (int k = 1; k <= 4; ++k) w.value(st.abs_action_moment[k]);
      w.end_array();
      w.key("length_moment2").value(st.length_moment2);
      w.key("length_moment4").value(st.length_moment4);
      w.key("touched_moment2").value(st.touched_moment2);
      w.key("touched_moment4").value(st.touched_moment4);
      w.key("speed_moments").begin_array();
      for (int k = 1; k <= 4; ++k) w.value(st.speed_moment[k]);
      w.end_array();
      w.key("mean_speed_se").value(st.mean_speed_se);
      w.key("median_deviation").value(st.median_deviation);
      w.key("q25_deviation").value(st.q25_deviation);
      w.key("q75_deviation").value(st.q75_deviation);
      w.key("mean_deviation").value(st.mean_deviation);
      // shape ratios against the moment bounds
      w.key("abs_action_over_t_over_c").value(st.abs_action_moment[1] / (st.t / spec.c));
      w.key("length2_over_t2").value(st.length_moment2 / (st.t * st.t));
      w.key("touched2_over_t2").value(st.touched_moment2 / (st.t * st.t));
    }
    if (spec.kind == ExperimentKind::VarianceDiff) {
      w.key("mean_diff").value(st.mean_diff);
      w.key("se_diff").value(st.se_diff);
      w.key("var").value(st.var_diff);
      w.key("var_jackknife_se").value(st.var_diff_jackknife_se);
      w.key("var_over_upper").value(st.var_over_upper);
      w.key("var_over_lower").value(st.var_over_lower);
    }
    w.end_object();
  }
  w.end_array();

  if (spec.kind == ExperimentKind::Xi) {
    w.key("xi_fit");
    write_fit(w, xi_fit);
    w.key("containment").begin_array();
    for (const ContainmentRow& row : containment) {
      w.begin_object();
      w.key("gamma").value(row.gamma);
      w.key("frequency").begin_array();
      for (double f : row.frequency) w.value(f);
      w.end_array();
      w.end_object();
    }
    w.end_array();
  }
  if (spec.kind == ExperimentKind::Moments) {
    w.key("speed_trend");
    write_trend(w, speed_trend);
  }
  if (spec.kind == ExperimentKind::VarianceDiff) {
    w.key("upper_ratio_trend");
    write_trend(w, upper_ratio_trend);
  }
  if (spec.kind == ExperimentKind::Locality) {
    w.key("radius_curve").begin_array();
    for (const LocalityRadiusStat& st : radius_curve) {
      w.begin_object();
      w.key("r").value(st.r);
      w.key("trials").value(static_cast<int64_t>(st.trials));
      w.key("hit_frequency").value(st.hit_frequency);
      w.end_object();
    }
    w.end_array();
  }
  if (spec.kind == ExperimentKind::AnimalTail) {
    w.key("animal_moment_fit");
    write_fit(w, animal_moment_fit);
  }

  w.key("notes").begin_array();
  for (const std::string& n : notes) w.value(n);
  w.end_array();
  w.key("violations").begin_array();
  for (const std::string& v : violations) w.value(v);
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

}  // namespace fpp
