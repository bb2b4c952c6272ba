#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fpp/errors.hpp"

namespace fpp {

using Cell = std::pair<int, int>;

// Sparse nonnegative field on Z^2; cells not stored have value 0.
struct AnimalGrid {
  std::map<Cell, double> values;

  double at(int i, int j) const {
    auto it = values.find({i, j});
    return it == values.end() ? 0.0 : it->second;
  }

  void set(int i, int j, double v) {
    if (!(v >= 0.0)) throw Error("AnimalGrid: cell values must be nonnegative");
    if (v == 0.0)
      values.erase({i, j});
    else
      values[{i, j}] = v;
  }

  double total() const {
    double s = 0.0;
    for (const auto& [c, v] : values) s += v;
    return s;
  }
};

// Connected origin-containing cell set with its field weight.
struct Animal {
  std::vector<Cell> cells;  // sorted
  double weight = 0.0;
};

inline constexpr int kAnimalEnumCap = 10;

// Number of connected origin-containing cell sets of the given size,
// enumerated by the same recursion greedy_animal_exact searches.
// (1, 4, 18, 76, 315 for sizes 1..5.)
uint64_t count_origin_animals(int n);

// Maximum-weight animal of size n by exhaustive enumeration. Ties go to the
// lexicographically smallest sorted cell list. Throws TooLarge above the cap.
Animal greedy_animal_exact(const AnimalGrid& grid, int n);

// Randomized best-first accretion with restarts; always a valid size-n
// animal, so its weight is a lower bound for the exact optimum.
Animal greedy_animal_heuristic(const AnimalGrid& grid, int n, uint64_t seed);

struct TailEstimate {
  double empirical = 0.0;  // fraction of replicas with N_n > threshold
  double threshold = 0.0;
  double bound = 0.0;       // analytic tail bound for the in-regime case
  double std_error = 0.0;   // binomial standard error of `empirical`
  bool in_regime = false;   // whether the analytic bound applies
  double mean_weight = 0.0; // empirical mean of N_n
  double mean_weight_se = 0.0;
  double max_weight = 0.0;
  double min_weight = 0.0;
  long reps = 0;
};

// Monte Carlo tail frequency P(N_n > y n) over i.i.d. Poisson(lambda) fields.
// The bound e^{-yn} applies in the regime y >= e^3 lambda (and y >= rho, a
// combinatorial constant not pinned numerically; rho only enters reporting).
TailEstimate poisson_tail_estimate(int n, double y, double lambda, long reps,
                                   uint64_t seed, double rho = 1.5);

// Monte Carlo tail frequency P(N_n > c_tilde n eps^{1/3}) over i.i.d.
// Bernoulli(eps) fields, reported against e^{-(log n)^2}. c_tilde is a
// configurable constant; the default is an engineering choice.
TailEstimate bernoulli_tail_estimate(int n, double epsilon, long reps,
                                     uint64_t seed, double c_tilde = 8.0);

// Grid import/export: JSON array of {i, j, value} triples.
std::string grid_to_json(const AnimalGrid& grid);
AnimalGrid grid_from_json(const std::string& text);

}  // namespace fpp
