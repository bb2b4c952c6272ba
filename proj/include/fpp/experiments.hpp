#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fpp/animals.hpp"
#include "fpp/solver.hpp"
#include "fpp/stats.hpp"

namespace fpp {

enum class ExperimentKind { Moments, Xi, VarianceDiff, Locality, AnimalTail };

std::string kind_name(ExperimentKind kind);

struct LocalityParams {
  int max_insert = 4;      // points per box-insertion trial
  std::vector<double> radii = {0.05, 0.1, 0.2, 0.4};
  int max_points = 10;     // environment cap keeping the exact solver feasible
  int corridor_cells = 2;  // boxes drawn with |j| <= corridor_cells
};

struct AnimalTailParams {
  std::vector<int> box_sides = {1, 3, 5};  // coarse field side K, lambda = K^2
  std::vector<int> sizes = {1, 2, 3, 4};
  double y_factor = 1.0;  // y = y_factor * e^3 * lambda
  std::vector<double> epsilons = {0.05, 0.1, 0.2};
  int bernoulli_size = 8;
  double c_tilde = 8.0;
  double rho = 1.5;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Moments;
  std::string id;  // defaults to "<kind>-s<seed>"
  double c = 0.2;
  std::vector<double> t_grid;
  double gamma = 0.575;
  double gamma_prime = 0.6;
  long replicas = 1;
  uint64_t master_seed = 0;
  double intensity = 1.0;
  int box_side = 1;  // K, odd
  SolverOptions solver;
  LocalityParams locality;
  AnimalTailParams animal;
  std::vector<double> gamma_grid = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75};
  bool record_timings = false;  // off by default: keeps records byte-stable

  std::string effective_id() const;
  // All validation problems at once; empty means valid.
  std::vector<std::string> validate() const;
};

// Window policy for point-to-line experiments: [-m, t+m] x [-h, h] with
// h = m = sqrt(2s (N_hat + t/(2c))) + K, where N_hat = intensity * 2 (t + 2)
// estimates the points a unit-half-width corridor around the straight path
// offers. The truncation (window and N_hat) is recorded in reports.
struct WindowPolicy {
  Window window;
  double n_hat = 0.0;
  double half_height = 0.0;
};

WindowPolicy point_to_line_window(double t, double c, double intensity, double box_side);

struct SolveRecord {
  double t = 0.0;
  long replica = 0;
  uint64_t seed = 0;
  double action = 0.0;
  double length = 0.0;
  int n_points = 0;
  double deviation = 0.0;
  double speed = 0.0;
  long touched_unit = 0;
  bool exact = false;
  double wall_ms = 0.0;
};

struct PairRecord {
  double t = 0.0;
  long replica = 0;
  uint64_t seed = 0;
  double action_s = 0.0;
  double action_s_prime = 0.0;
  double length_s = 0.0;
  double length_s_prime = 0.0;
  int n_points_s = 0;
  int n_points_s_prime = 0;
  bool exact = false;
  double wall_ms = 0.0;
};

struct LocalityRecord {
  double t = 0.0;
  long replica = 0;
  uint64_t seed = 0;
  int box_i = 0;
  int box_j = 0;
  int inserted = 0;      // j, points dropped into the box
  double action_before = 0.0;
  double action_after = 0.0;
  double g = 0.0;        // action decrease from the insertion
  double probe_r = -1.0; // radius probe; -1 when skipped (pointless minimizer)
  double probe_g = 0.0;
  int probe_hit = -1;    // 1 if probe_g >= 1/2, 0 if not, -1 when skipped
  bool exact = true;
  double wall_ms = 0.0;
};

struct TailRecord {
  std::string field;  // "poisson" | "bernoulli"
  double param = 0.0; // lambda or epsilon
  int n = 0;
  double y = 0.0;     // threshold / n
  double threshold = 0.0;
  long reps = 0;
  uint64_t seed = 0;
  double freq = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool in_regime = false;
  double mean_weight = 0.0;
  double mean_weight_se = 0.0;
};

struct TStats {
  double t = 0.0;
  long n = 0;
  // Moments / Xi
  double mean_action = 0.0, se_action = 0.0;
  double abs_action_moment[5] = {0, 0, 0, 0, 0};  // k = 1..4 in slots 1..4
  double length_moment2 = 0.0, length_moment4 = 0.0;
  double touched_moment2 = 0.0, touched_moment4 = 0.0;
  double speed_moment[5] = {0, 0, 0, 0, 0};
  double mean_speed_se = 0.0;
  double median_deviation = 0.0, q25_deviation = 0.0, q75_deviation = 0.0;
  double mean_deviation = 0.0;
  // VarianceDiff
  double mean_diff = 0.0, se_diff = 0.0;
  double var_diff = 0.0, var_diff_jackknife_se = 0.0;
  double var_over_upper = 0.0;  // var / t^{2(2 gamma' - 1)}
  double var_over_lower = 0.0;  // var / t^{1 - gamma}
  // window metadata
  double window_half_height = 0.0;
  double n_hat = 0.0;
};

struct ContainmentRow {
  double gamma = 0.0;
  std::vector<double> frequency;  // aligned with t_grid
};

struct LocalityRadiusStat {
  double r = 0.0;
  long trials = 0;
  double hit_frequency = 0.0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<SolveRecord> solve_records;
  std::vector<PairRecord> pair_records;
  std::vector<LocalityRecord> locality_records;
  std::vector<TailRecord> tail_records;

  std::vector<TStats> per_t;
  FitResult xi_fit;                      // log median deviation vs log t
  std::vector<ContainmentRow> containment;
  TrendCheck upper_ratio_trend;          // VarianceDiff
  TrendCheck speed_trend;                // Moments
  std::vector<LocalityRadiusStat> radius_curve;
  FitResult animal_moment_fit;           // E N_n vs n for the lambda = 1 rows

  std::vector<std::string> notes;
  std::vector<std::string> violations;   // hard invariant failures
  bool truncated = false;
  long completed = 0;
  long total = 0;

  bool invariant_violation() const { return !violations.empty(); }
  std::string records_csv() const;
  std::string aggregates_json() const;
};

struct RunControl {
  int workers = 1;
  // Polled between tasks; set to request a clean stop (partial report).
  const std::atomic<bool>* stop = nullptr;
  // Called after each completed task with (done, total); return false to stop.
  std::function<bool(long, long)> progress;
};

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunControl& control = {});

// Recomputes all aggregate tables from the raw records (deterministic fold
// over records sorted by (t, replica)); run_experiment calls this itself.
void compute_aggregates(ExperimentReport& report);

}  // namespace fpp
