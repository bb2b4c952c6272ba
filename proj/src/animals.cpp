#include "fpp/animals.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fpp/report_io.hpp"
#include "fpp/rng.hpp"
#include "json.hpp"

namespace fpp {

namespace {

// Dense board over [-n, n]^2 for the exact enumeration; a size-n animal
// containing the origin fits in the L1 ball of radius n-1, the extra ring
// absorbs neighbor lookups.
struct Board {
  int n;
  int width;
  std::vector<double> weight;
  std::vector<char> seen;

  explicit Board(const AnimalGrid& grid, int n_) : n(n_), width(2 * n_ + 1) {
    weight.assign(static_cast<size_t>(width) * width, 0.0);
    seen.assign(static_cast<size_t>(width) * width, 0);
    for (int i = -(n - 1); i <= n - 1; ++i)
      for (int j = -(n - 1); j <= n - 1; ++j)
        if (std::abs(i) + std::abs(j) <= n - 1) weight[index(i, j)] = grid.at(i, j);
  }

  size_t index(int i, int j) const {
    return static_cast<size_t>(i + n) * width + static_cast<size_t>(j + n);
  }
  Cell cell_of(size_t idx) const {
    return {static_cast<int>(idx / width) - n, static_cast<int>(idx % width) - n};
  }
  void neighbors(size_t idx, size_t out[4]) const {
    out[0] = idx - width;
    out[1] = idx + width;
    out[2] = idx - 1;
    out[3] = idx + 1;
  }
  bool in_reach(size_t idx) const {
    const Cell c = cell_of(idx);
    return std::abs(c.first) + std::abs(c.second) <= n - 1;
  }
};

// Redelmeier-style enumeration of connected origin-containing cell sets of
// size exactly n, each visited once: children extend by one untried frontier
// cell; a cell popped from the untried list stays blocked for its siblings
// and is released by the invocation that queued it.
template <class Visit>
struct Enumerator {
  Board& board;
  int n;
  Visit visit;
  std::vector<size_t> set_stack;

  void run() {
    std::vector<size_t> untried;
    const size_t origin = board.index(0, 0);
    board.seen[origin] = 1;
    untried.push_back(origin);
    set_stack.clear();
    rec(std::move(untried), 0, 0.0);
    board.seen[origin] = 0;
  }

  void rec(std::vector<size_t> untried, int size, double weight) {
    while (!untried.empty()) {
      const size_t c = untried.back();
      untried.pop_back();
      set_stack.push_back(c);
      const double w2 = weight + board.weight[c];
      if (size + 1 == n) {
        visit(set_stack, w2);
      } else {
        std::vector<size_t> next = untried;
        size_t nbs[4];
        size_t added[4];
        int n_added = 0;
        board.neighbors(c, nbs);
        for (size_t nb : nbs) {
          if (!board.seen[nb] && board.in_reach(nb)) {
            board.seen[nb] = 1;
            next.push_back(nb);
            added[n_added++] = nb;
          }
        }
        rec(std::move(next), size + 1, w2);
        for (int k = 0; k < n_added; ++k) board.seen[added[k]] = 0;
      }
      set_stack.pop_back();
      // c remains seen: blocked for the remaining siblings of this level
    }
  }
};

std::vector<Cell> sorted_cells(const Board& board, const std::vector<size_t>& idxs) {
  std::vector<Cell> cells;
  cells.reserve(idxs.size());
  for (size_t idx : idxs) cells.push_back(board.cell_of(idx));
  std::sort(cells.begin(), cells.end());
  return cells;
}

void check_animal_size(int n) {
  if (n < 1) throw Error("animal size must be at least 1");
}

uint64_t cell_key(int i, int j) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(i)) << 32) |
         static_cast<uint64_t>(static_cast<uint32_t>(j));
}

}  // namespace

uint64_t count_origin_animals(int n) {
  check_animal_size(n);
  if (n > kAnimalEnumCap) throw TooLarge("animal size exceeds the enumeration cap");
  AnimalGrid empty;
  Board board(empty, n);
  uint64_t count = 0;
  auto visit = [&](const std::vector<size_t>&, double) { ++count; };
  Enumerator<decltype(visit)> e{board, n, visit, {}};
  e.run();
  return count;
}

Animal greedy_animal_exact(const AnimalGrid& grid, int n) {
  check_animal_size(n);
  if (n > kAnimalEnumCap) throw TooLarge("animal size exceeds the enumeration cap");
  Board board(grid, n);

  bool have = false;
  double best_w = 0.0;
  std::vector<Cell> best_cells;

  auto visit = [&](const std::vector<size_t>& idxs, double w) {
    if (!have || w > best_w) {
      have = true;
      best_w = w;
      best_cells = sorted_cells(board, idxs);
      return;
    }
    if (w == best_w) {
      std::vector<Cell> cells = sorted_cells(board, idxs);
      if (cells < best_cells) best_cells = std::move(cells);
    }
  };
  Enumerator<decltype(visit)> e{board, n, visit, {}};
  e.run();

  return Animal{std::move(best_cells), best_w};
}

Animal greedy_animal_heuristic(const AnimalGrid& grid, int n, uint64_t seed) {
  check_animal_size(n);
  constexpr int kRestarts = 12;

  bool have = false;
  Animal best;

  for (int r = 0; r < kRestarts; ++r) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(r)));
    std::unordered_set<uint64_t> in_set;
    std::vector<Cell> cells{{0, 0}};
    in_set.insert(cell_key(0, 0));
    double weight = grid.at(0, 0);

    std::vector<Cell> frontier;
    std::unordered_set<uint64_t> queued;
    auto push_neighbors = [&](Cell c) {
      const Cell nbs[4] = {{c.first + 1, c.second}, {c.first - 1, c.second},
                           {c.first, c.second + 1}, {c.first, c.second - 1}};
      for (Cell nb : nbs) {
        const uint64_t k = cell_key(nb.first, nb.second);
        if (!in_set.count(k) && queued.insert(k).second) frontier.push_back(nb);
      }
    };
    push_neighbors({0, 0});

    while (static_cast<int>(cells.size()) < n) {
      // best-first accretion; restarts above 0 pick among the top few
      std::sort(frontier.begin(), frontier.end(), [&](Cell a, Cell b) {
        const double wa = grid.at(a.first, a.second);
        const double wb = grid.at(b.first, b.second);
        if (wa != wb) return wa > wb;
        return a < b;
      });
      size_t pick = 0;
      if (r > 0) {
        const size_t k = std::min<size_t>(3, frontier.size());
        pick = rng.uniform_int(k);
      }
      const Cell c = frontier[pick];
      frontier.erase(frontier.begin() + static_cast<long>(pick));
      queued.erase(cell_key(c.first, c.second));
      in_set.insert(cell_key(c.first, c.second));
      cells.push_back(c);
      weight += grid.at(c.first, c.second);
      push_neighbors(c);
    }

    std::sort(cells.begin(), cells.end());
    if (!have || weight > best.weight ||
        (weight == best.weight && cells < best.cells)) {
      have = true;
      best = Animal{std::move(cells), weight};
    }
  }
  return best;
}

namespace {

TailEstimate tail_over_fields(int n, double threshold, double bound, bool in_regime,
                              long reps, uint64_t seed,
                              const std::function<void(Rng&, AnimalGrid&)>& fill) {
  if (reps < 1) throw Error("tail estimate needs at least one replica");
  TailEstimate est;
  est.threshold = threshold;
  est.bound = bound;
  est.in_regime = in_regime;
  est.reps = reps;

  long exceed = 0;
  double sum_w = 0.0, sum_w2 = 0.0;
  double min_w = 0.0, max_w = 0.0;
  for (long rep = 0; rep < reps; ++rep) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(rep)));
    AnimalGrid grid;
    fill(rng, grid);
    const double w = greedy_animal_exact(grid, n).weight;
    if (w > threshold) ++exceed;
    sum_w += w;
    sum_w2 += w * w;
    if (rep == 0 || w < min_w) min_w = w;
    if (rep == 0 || w > max_w) max_w = w;
  }
  est.empirical = static_cast<double>(exceed) / static_cast<double>(reps);
  est.std_error =
      std::sqrt(std::max(0.0, est.empirical * (1.0 - est.empirical)) /
                static_cast<double>(reps));
  est.mean_weight = sum_w / static_cast<double>(reps);
  const double var =
      std::max(0.0, sum_w2 / static_cast<double>(reps) - est.mean_weight * est.mean_weight);
  est.mean_weight_se = std::sqrt(var / static_cast<double>(reps));
  est.min_weight = min_w;
  est.max_weight = max_w;
  return est;
}

}  // namespace

TailEstimate poisson_tail_estimate(int n, double y, double lambda, long reps,
                                   uint64_t seed, double rho) {
  check_animal_size(n);
  if (n > 8) throw TooLarge("poisson_tail_estimate supports n <= 8");
  if (!(lambda > 0.0)) throw BadIntensity("lambda must be positive");
  if (!(y >= 0.0)) throw Error("y must be nonnegative");

  const bool in_regime = y >= std::max(std::exp(3.0) * lambda, rho) - 1e-12;
  auto fill = [&](Rng& rng, AnimalGrid& grid) {
    for (int i = -(n - 1); i <= n - 1; ++i)
      for (int j = -(n - 1); j <= n - 1; ++j)
        if (std::abs(i) + std::abs(j) <= n - 1)
          grid.set(i, j, static_cast<double>(rng.poisson(lambda)));
  };
  return tail_over_fields(n, y * n, std::exp(-y * n), in_regime, reps, seed, fill);
}

TailEstimate bernoulli_tail_estimate(int n, double epsilon, long reps, uint64_t seed,
                                     double c_tilde) {
  check_animal_size(n);
  if (n > kAnimalEnumCap) throw TooLarge("animal size exceeds the enumeration cap");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in [0, 1]");

  const double threshold = c_tilde * n * std::cbrt(epsilon);
  const double bound = std::exp(-std::log(static_cast<double>(n)) *
                                std::log(static_cast<double>(n)));
  auto fill = [&](Rng& rng, AnimalGrid& grid) {
    for (int i = -(n - 1); i <= n - 1; ++i)
      for (int j = -(n - 1); j <= n - 1; ++j)
        if (std::abs(i) + std::abs(j) <= n - 1)
          grid.set(i, j, rng.uniform01() < epsilon ? 1.0 : 0.0);
  };
  return tail_over_fields(n, threshold, bound, true, reps, seed, fill);
}

std::string grid_to_json(const AnimalGrid& grid) {
  JsonWriter w;
  w.begin_array();
  for (const auto& [cell, v] : grid.values) {
    w.begin_object();
    w.key("i").value(static_cast<int64_t>(cell.first));
    w.key("j").value(static_cast<int64_t>(cell.second));
    w.key("value").value(v);
    w.end_object();
  }
  w.end_array();
  return w.str() + "\n";
}

AnimalGrid grid_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("grid document is not valid JSON: ") + e.what());
  }
  AnimalGrid grid;
  try {
    for (const auto& entry : doc) {
      grid.set(entry.at("i").get<int>(), entry.at("j").get<int>(),
               entry.at("value").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed grid document: ") + e.what());
  }
  return grid;
}

}  // namespace fpp
