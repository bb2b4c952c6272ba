#include <cmath>

#include "doctest.h"
#include "fpp/animals.hpp"
#include "fpp/rng.hpp"
#include "oracles.hpp"

using namespace fpp;

namespace {

AnimalGrid random_grid(uint64_t seed, int radius, double lambda) {
  Rng rng(seed);
  AnimalGrid grid;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j)
      if (std::abs(i) + std::abs(j) <= radius)
        grid.set(i, j, static_cast<double>(rng.poisson(lambda)));
  return grid;
}

}  // namespace

TEST_CASE("enumerated animal counts match the combination oracle") {
  // oracle first: combination + BFS connectivity, no shared code with the
  // recursive enumerator
  const uint64_t expected[6] = {0, 1, 4, 18, 76, 315};
  for (int n = 1; n <= 5; ++n) {
    CHECK(oracle::origin_animal_count(n) == expected[n]);
    CHECK(count_origin_animals(n) == expected[n]);
  }
}

TEST_CASE("greedy_animal_exact examples") {
  AnimalGrid grid;
  grid.set(0, 0, 5.0);
  grid.set(0, 1, 5.0);
  const Animal two = greedy_animal_exact(grid, 2);
  CHECK(two.weight == doctest::Approx(10.0));
  REQUIRE(two.cells.size() == 2);
  CHECK(two.cells[0] == Cell{0, 0});
  CHECK(two.cells[1] == Cell{0, 1});

  const Animal one = greedy_animal_exact(grid, 1);
  CHECK(one.weight == doctest::Approx(5.0));
  CHECK(one.cells[0] == Cell{0, 0});

  const AnimalGrid zeros;
  for (int n = 1; n <= 4; ++n) CHECK(greedy_animal_exact(zeros, n).weight == 0.0);
  // all-zero ties resolve to the lexicographically smallest cell list
  const Animal tie = greedy_animal_exact(zeros, 2);
  CHECK(tie.cells[0] == Cell{-1, 0});
  CHECK(tie.cells[1] == Cell{0, 0});

  CHECK_THROWS_AS(greedy_animal_exact(zeros, 11), TooLarge);
}

TEST_CASE("exact maximum matches the combination oracle on random grids") {
  for (int trial = 0; trial < 40; ++trial) {
    const AnimalGrid grid = random_grid(mix_seed(600, trial), 4, 1.0);
    for (int n = 2; n <= 5; ++n) {
      const double exact = greedy_animal_exact(grid, n).weight;
      CHECK(exact == doctest::Approx(oracle::max_animal_weight(grid, n)));
    }
  }
}

TEST_CASE("animal weights nest monotonically in n") {
  for (int trial = 0; trial < 50; ++trial) {
    const AnimalGrid grid = random_grid(mix_seed(601, trial), 7, 1.0);
    double prev = -1.0;
    for (int n = 1; n <= 8; ++n) {
      const double w = greedy_animal_exact(grid, n).weight;
      CHECK(w >= prev);
      prev = w;
    }
  }
}

TEST_CASE("straight-arm lower bound") {
  for (int trial = 0; trial < 20; ++trial) {
    const AnimalGrid grid = random_grid(mix_seed(602, trial), 7, 2.0);
    for (int n = 2; n <= 6; ++n) {
      const double w = greedy_animal_exact(grid, n).weight;
      for (int k = 0; k < n; ++k) CHECK(w >= grid.at(k, 0) - 1e-12);
    }
  }
}

TEST_CASE("heuristic is a valid lower bound and finds forced optima") {
  for (int trial = 0; trial < 200; ++trial) {
    const AnimalGrid grid = random_grid(mix_seed(603, trial), 6, 1.0);
    for (int n : {2, 4, 6}) {
      const Animal h = greedy_animal_heuristic(grid, n, mix_seed(604, trial));
      const Animal e = greedy_animal_exact(grid, n);
      CHECK(h.weight <= e.weight + 1e-12);
      REQUIRE(static_cast<int>(h.cells.size()) == n);
      // validity: contains the origin, connected, weight consistent
      bool has_origin = false;
      double w = 0.0;
      for (const Cell& c : h.cells) {
        if (c == Cell{0, 0}) has_origin = true;
        w += grid.at(c.first, c.second);
      }
      CHECK(has_origin);
      CHECK(w == doctest::Approx(h.weight));
    }
  }

  AnimalGrid single;
  single.set(0, 0, 3.0);
  const Animal h = greedy_animal_heuristic(single, 3, 5);
  CHECK(h.weight == doctest::Approx(3.0));
  CHECK(h.cells[0] <= Cell{0, 0});

  const AnimalGrid zeros;
  CHECK(greedy_animal_heuristic(zeros, 5, 7).weight == 0.0);

  // determinism
  const AnimalGrid g2 = random_grid(77, 5, 1.0);
  const Animal a = greedy_animal_heuristic(g2, 5, 99);
  const Animal b = greedy_animal_heuristic(g2, 5, 99);
  CHECK(a.weight == b.weight);
  CHECK(a.cells == b.cells);
}

TEST_CASE("poisson tail estimate: deep-regime zeros and the N_1 sanity row") {
  const TailEstimate deep = poisson_tail_estimate(4, std::exp(3.0), 1.0, 2000, 1234);
  CHECK(deep.in_regime);
  CHECK(deep.empirical == 0.0);
  CHECK(deep.bound == doctest::Approx(std::exp(-4.0 * std::exp(3.0))));

  const TailEstimate sane = poisson_tail_estimate(1, 0.0, 1.0, 10000, 4321);
  CHECK(!sane.in_regime);
  CHECK(std::abs(sane.empirical - (1.0 - std::exp(-1.0))) <= 0.02);
}

TEST_CASE("poisson tail moments grow about linearly in n") {
  std::vector<double> ns, means;
  for (int n = 1; n <= 5; ++n) {
    const TailEstimate est =
        poisson_tail_estimate(n, std::exp(3.0), 1.0, 400, mix_seed(88, n));
    ns.push_back(n);
    means.push_back(est.mean_weight);
    CHECK(est.mean_weight >= 1.0 * n - 1.0);  // at least the best straight arm
    CHECK(est.mean_weight <= 20.0 * n);       // loose linear cap, C fitted in reports
  }
  for (size_t i = 1; i < means.size(); ++i) CHECK(means[i] > means[i - 1]);
}

TEST_CASE("bernoulli tail estimate edge cases") {
  const TailEstimate zero = bernoulli_tail_estimate(6, 0.0, 500, 1);
  CHECK(zero.empirical == 0.0);
  CHECK(zero.mean_weight == 0.0);

  const TailEstimate one = bernoulli_tail_estimate(6, 1.0, 500, 2);
  CHECK(one.mean_weight == doctest::Approx(6.0));
  CHECK(one.min_weight == doctest::Approx(6.0));
  CHECK(one.max_weight == doctest::Approx(6.0));
  CHECK(one.empirical == 0.0);  // threshold 8n exceeds n

  const TailEstimate mid = bernoulli_tail_estimate(8, 0.05, 2000, 3);
  CHECK(mid.threshold == doctest::Approx(8.0 * 8.0 * std::cbrt(0.05)));
  CHECK(mid.bound == doctest::Approx(std::exp(-std::pow(std::log(8.0), 2.0))));
  // reporting self-consistency: mean = n * p_hat with p_hat = mean / n
  CHECK(mid.mean_weight == doctest::Approx(8.0 * (mid.mean_weight / 8.0)));
  CHECK(mid.mean_weight > 0.0);
  CHECK(mid.mean_weight < 8.0);
}

TEST_CASE("grid documents round-trip") {
  AnimalGrid grid;
  grid.set(-2, 3, 1.5);
  grid.set(0, 0, 2.0);
  grid.set(4, -1, 0.25);
  const std::string text = grid_to_json(grid);
  const AnimalGrid back = grid_from_json(text);
  CHECK(back.values == grid.values);
  CHECK_THROWS_AS(grid_from_json("not json"), IoError);
}
