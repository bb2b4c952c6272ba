#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "fpp/action.hpp"
#include "fpp/environment.hpp"
#include "fpp/geometry.hpp"

namespace fpp {

enum class SolveMode { Auto, Exact, Heuristic };

struct SolverOptions {
  int max_exact_points = 18;  // memory guard caps this at 24
  int heuristic_restarts = 8;
  uint64_t heuristic_seed = 0;
  double action_tolerance = 1e-9;
  SolveMode force_mode = SolveMode::Auto;
};

void validate_options(const SolverOptions& options);

struct SolverLog {
  int64_t states_expanded = 0;
  int64_t prune_hits = 0;    // points excluded by the candidate bound
  int64_t moves_applied = 0; // accepted local-search moves
};

struct GeodesicProblem {
  const PointConfig* config = nullptr;
  Point2 start;
  TargetSet target;
  ActionParams params{1.0};
  SolverOptions options;
};

GeodesicProblem make_problem(const PointConfig& config, Point2 start, TargetSet target,
                             ActionParams params, SolverOptions options = {});

struct PathSolution {
  PathSeq path;
  double action = 0.0;
  double length = 0.0;
  int n_points = 0;
  bool optimal = false;  // true iff produced by exact search
  int candidates_used = 0;
  SolverLog log;
};

// Action of the straight pointless path: d^2/(2s) with d the distance from
// the start to the target. Upper bound for the optimum, used for pruning.
double baseline_action(const GeodesicProblem& problem);

// Safe pruning: point p is kept iff |start - p| + dist(p, target) <=
// sqrt(2s (N_cap + baseline)) with N_cap the config size. Any path through an
// excluded point has action above the baseline even if it collects every
// remaining point.
std::vector<int32_t> candidate_points(const GeodesicProblem& problem);

// Globally optimal solution by subset dynamic programming over the candidate
// set. The DP state is (subset, last point) minimizing path length; this is
// valid because for a fixed interior count N the action is strictly
// increasing in the length, so the shortest representative of every state
// dominates. Ties among equal-action optima go to the smaller N, then to the
// lexicographically smallest interior index sequence. Throws
// TooManyCandidates when the candidate set exceeds max_exact_points.
PathSolution solve_exact(const GeodesicProblem& problem);

// Exhaustive enumeration over all subsets and orders of at most 9 candidates.
// Oracle for solve_exact; kept deliberately independent of the DP.
PathSolution brute_force(const GeodesicProblem& problem);

// Deterministic local search: start from the straight path and repeat
// best-improvement moves (insert, remove, relocate, 2-opt) until no move
// improves the action by more than action_tolerance; best over
// heuristic_restarts restarts, where restart r > 0 perturbs the move scan
// order via a seed derived from heuristic_seed.
PathSolution solve_heuristic(const GeodesicProblem& problem);

// One local-search descent from the given feasible path. Exposed so callers
// can verify that solver output is a fixed point.
PathSolution local_search_from(const GeodesicProblem& problem, const PathSeq& initial,
                               uint64_t move_seed, bool best_improvement);

// Dispatch: Auto solves exactly when the candidates fit, else heuristically.
PathSolution solve(const GeodesicProblem& problem);

// K-cells (side K, centered at (Ki, Kj), odd K) holding at least one collected
// interior point; for K = 1 this is the lattice animal of touched unit squares.
std::set<Cell> touched_boxes(const PathSolution& solution, const PointConfig& config,
                             int K);

// Ordered K-cells the polyline passes through; consecutive entries differ by
// one lattice step, repetitions allowed. A segment crossing a cell corner
// exactly contributes the incident cells in x-before-y order.
std::vector<Cell> traced_lattice_path(const PathSolution& solution,
                                      const PointConfig& config, int K);
std::vector<Cell> traced_cells(const std::vector<Point2>& polyline, int K);

}  // namespace fpp
