#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fpp/rng.hpp"
#include "fpp/solver.hpp"
#include "oracles.hpp"

using namespace fpp;

namespace {

// Unit-intensity sample truncated to its first `cap` points: the standard
// small instance for exact-solver work.
PointConfig capped_poisson(const Window& win, uint64_t seed, int cap) {
  const PointConfig full = PointConfig::poisson(win, 1.0, seed);
  std::vector<Point2> pts(full.points().begin(),
                          full.points().begin() + std::min(full.size(), cap));
  SeedRecord rec = full.seed_record();
  rec.source = "poisson-truncated";
  return PointConfig::from_points(win, std::move(pts), rec);
}

GeodesicProblem line_problem(const PointConfig& cfg, double t, double c,
                             SolverOptions opts = {}) {
  return make_problem(cfg, {0.0, 0.0}, make_line_target({t, 0.0}, {0.0, 1.0}),
                      params_from_ct(c, t), opts);
}

}  // namespace

TEST_CASE("baseline_action examples") {
  const Window win = make_window(-1, 7, -4, 4);
  const PointConfig empty = PointConfig::from_points(win, {}, {0, 0.0, "points"});

  // line at distance t with s = ct gives t/(2c)
  CHECK(baseline_action(line_problem(empty, 6.0, 0.5)) == doctest::Approx(6.0));

  // start on the target
  const GeodesicProblem on_target = make_problem(
      empty, {0.0, 0.0}, make_line_target({0.0, 0.0}, {0.0, 1.0}), make_params(1.0));
  CHECK(baseline_action(on_target) == 0.0);

  const GeodesicProblem to_point = make_problem(
      empty, {0.0, 0.0}, make_point_target({3.0, 4.0}), make_params(25.0));
  CHECK(baseline_action(to_point) == doctest::Approx(0.5));
}

TEST_CASE("candidate_points keeps the reachable and drops the hopeless") {
  const Window win = make_window(-10, 16, -10, 10);
  const PointConfig empty = PointConfig::from_points(win, {}, {0, 0.0, "points"});
  CHECK(candidate_points(line_problem(empty, 6.0, 0.5)).empty());

  // a point on the straight segment is always kept; a far corner point whose
  // shortest start->p->target route exceeds the bound is excluded
  const PointConfig two = PointConfig::from_points(
      win, {{3.0, 0.0}, {-8.0, -9.0}}, {0, 0.0, "points"});
  const GeodesicProblem pb = line_problem(two, 6.0, 0.5);
  const double len_cap =
      std::sqrt(2.0 * pb.params.s * (2.0 + baseline_action(pb)));
  CHECK(dist({0, 0}, {-8.0, -9.0}) + (6.0 - (-8.0)) > len_cap);
  const std::vector<int32_t> keep = candidate_points(pb);
  REQUIRE(keep.size() == 1);
  CHECK(keep[0] == 0);
}

TEST_CASE("pruning never changes the optimum (exhaustive oracle)") {
  const Window win = make_window(-10, 16, -10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(mix_seed(7100, trial));
    std::vector<Point2> pts;
    for (int i = 0; i < 7; ++i)
      pts.push_back({rng.uniform(-10, 16), rng.uniform(-10, 10)});
    const PointConfig cfg = PointConfig::from_points(win, pts, {0, 0.0, "points"});
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
    const double pruned = brute_force(pb).action;
    const double full =
        oracle::exhaustive_action(cfg, pb.start, pb.target, pb.params.s);
    CHECK(pruned == doctest::Approx(full).epsilon(1e-12));
  }
}

TEST_CASE("solve_exact trivial instances") {
  const Window win = make_window(-1, 7, -4, 4);
  const PointConfig empty = PointConfig::from_points(win, {}, {0, 0.0, "points"});
  const PathSolution base = solve_exact(line_problem(empty, 6.0, 0.5));
  CHECK(base.action == doctest::Approx(6.0));
  CHECK(base.n_points == 0);
  CHECK(base.optimal);
  CHECK(base.length == doctest::Approx(6.0));
  CHECK(base.path.terminal.x == doctest::Approx(6.0));

  // one free point on the straight segment: collected, action drops by 1
  const PointConfig one =
      PointConfig::from_points(win, {{3.0, 0.0}}, {0, 0.0, "points"});
  const PathSolution sol = solve_exact(line_problem(one, 6.0, 0.5));
  CHECK(sol.action == doctest::Approx(5.0));
  CHECK(sol.n_points == 1);
  REQUIRE(sol.path.interior.size() == 1);
  CHECK(sol.path.interior[0] == 0);
}

TEST_CASE("solve_exact equals brute force on 200 random instances") {
  const Window win = make_window(0, 6, 0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const PointConfig cfg = capped_poisson(win, mix_seed(7200, trial), 8);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
    const PathSolution dp = solve_exact(pb);
    const PathSolution bf = brute_force(pb);
    CHECK(std::abs(dp.action - bf.action) <= 1e-9);
    CHECK(dp.optimal);
    CHECK(bf.optimal);
    CHECK(dp.action <= baseline_action(pb) + 1e-12);
  }
}

TEST_CASE("brute force dominates random admissible paths") {
  const Window win = make_window(0, 6, 0, 6);
  for (int trial = 0; trial < 3; ++trial) {
    const PointConfig cfg = capped_poisson(win, mix_seed(7300, trial), 6);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
    const double best = brute_force(pb).action;
    Rng rng(mix_seed(7301, trial));
    for (int path = 0; path < 10000; ++path) {
      std::vector<int32_t> order;
      for (int32_t i = 0; i < cfg.size(); ++i) order.push_back(i);
      for (int i = cfg.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(static_cast<uint64_t>(i + 1))]);
      order.resize(rng.uniform_int(static_cast<uint64_t>(cfg.size() + 1)));
      const double act =
          oracle::sequence_action(cfg, pb.start, pb.target, pb.params.s, order);
      CHECK(act >= best - 1e-9);
    }
  }
}

TEST_CASE("exact optimum is monotone under point insertion") {
  const Window win = make_window(0, 6, -3, 3);
  for (int trial = 0; trial < 60; ++trial) {
    Rng rng(mix_seed(7400, trial));
    const PointConfig cfg = capped_poisson(win, mix_seed(7401, trial), 10);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
    const double before = solve_exact(pb).action;

    Point2 z;
    bool clash = true;
    while (clash) {
      z = {rng.uniform(0, 6), rng.uniform(-3, 3)};
      clash = false;
      cfg.for_each_in_disk(z, 1e-9, [&](int32_t, Point2) { clash = true; });
    }
    const Point2 zz[1] = {z};
    const PointConfig grown = cfg.inserted(zz);
    const double after = solve_exact(line_problem(grown, 6.0, 0.5)).action;
    CHECK(after <= before + 1e-9);
    CHECK(after >= before - 1.0 - 1e-9);
  }
}

TEST_CASE("exact optimum is nonincreasing in s") {
  const Window win = make_window(0, 6, -3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const PointConfig cfg = capped_poisson(win, mix_seed(7500, trial), 10);
    double prev = 1e300;
    for (int k = 0; k < 10; ++k) {
      const double s = 1.0 + 0.8 * k;
      const GeodesicProblem pb =
          make_problem(cfg, {0.0, 0.0}, make_line_target({6.0, 0.0}, {0.0, 1.0}),
                       make_params(s));
      const double act = solve_exact(pb).action;
      CHECK(act <= prev + 1e-9);
      prev = act;
    }
  }
}

TEST_CASE("exact optimum is rotation equivariant") {
  const Window win = make_window(0, 6, 0, 6);
  for (int trial = 0; trial < 25; ++trial) {
    Rng rng(mix_seed(7600, trial));
    const PointConfig cfg = capped_poisson(win, mix_seed(7601, trial), 9);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
    const PathSolution sol = solve_exact(pb);

    const double theta = rng.uniform(0.0, 6.283185307179586);
    std::vector<Point2> rpts;
    for (const Point2& p : cfg.points()) rpts.push_back(rotate(p, theta));
    const Window big = make_window(-10, 10, -10, 10);
    const PointConfig rcfg = PointConfig::from_points(big, rpts, {0, 0.0, "points"});
    const auto& line = std::get<Line>(pb.target);
    const GeodesicProblem rpb = make_problem(
        rcfg, rotate(pb.start, theta),
        make_line_target(rotate(line.origin, theta), rotate(line.direction, theta)),
        pb.params);
    const PathSolution rsol = solve_exact(rpb);
    CHECK(std::abs(rsol.action - sol.action) <= 1e-9);
    CHECK(rsol.path.interior == sol.path.interior);
  }
}

TEST_CASE("terminal point of exact solutions is the optimal foot") {
  const Window win = make_window(0, 6, -3, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const PointConfig cfg = capped_poisson(win, mix_seed(7700, trial), 8);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
    const PathSolution sol = solve_exact(pb);
    const Point2 last = sol.path.interior.empty()
                            ? pb.start
                            : cfg.points()[sol.path.interior.back()];
    const Closest c = closest_point(pb.target, last);
    CHECK(dist(sol.path.terminal, c.q) <= 1e-12);
  }
}

TEST_CASE("tie between mirror-symmetric optima goes to the lower index") {
  const Window win = make_window(-1, 3, -2, 2);
  const PointConfig cfg =
      PointConfig::from_points(win, {{1.0, 1.0}, {1.0, -1.0}}, {0, 0.0, "points"});
  const GeodesicProblem pb = make_problem(
      cfg, {0.0, 0.0}, make_point_target({2.0, 0.0}), make_params(4.0));
  const PathSolution sol = solve_exact(pb);
  REQUIRE(sol.n_points == 1);
  CHECK(sol.path.interior[0] == 0);
  const PathSolution bf = brute_force(pb);
  REQUIRE(bf.n_points == 1);
  CHECK(bf.path.interior[0] == 0);
}

TEST_CASE("solve_exact refuses oversized instances") {
  const Window win = make_window(0, 6, 0, 6);
  const PointConfig cfg = capped_poisson(win, 31337, 30);
  SolverOptions opts;
  opts.max_exact_points = 8;
  CHECK_THROWS_AS(solve_exact(line_problem(cfg, 6.0, 0.5, opts)), TooManyCandidates);
  CHECK_THROWS_AS(brute_force(line_problem(cfg, 6.0, 0.5)), TooManyCandidates);
}

TEST_CASE("heuristic is feasible, deterministic, and a local fixed point") {
  const Window win = make_window(-1, 7, -4, 4);
  const PointConfig empty = PointConfig::from_points(win, {}, {0, 0.0, "points"});
  const PathSolution base = solve_heuristic(line_problem(empty, 6.0, 0.5));
  CHECK(base.action == doctest::Approx(6.0));
  CHECK(!base.optimal);

  const PointConfig cfg = capped_poisson(make_window(0, 6, 0, 6), 9001, 14);
  SolverOptions opts;
  opts.heuristic_seed = 5;
  const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5, opts);
  const PathSolution h1 = solve_heuristic(pb);
  const PathSolution h2 = solve_heuristic(pb);
  CHECK(h1.action == h2.action);
  CHECK(h1.path.interior == h2.path.interior);
  CHECK(h1.action <= baseline_action(pb) + 1e-9);

  // a descent started from the heuristic's own output changes nothing
  const PathSolution polished = local_search_from(pb, h1.path, 123, true);
  CHECK(polished.action == doctest::Approx(h1.action).epsilon(1e-12));
  CHECK(polished.path.interior == h1.path.interior);
}

TEST_CASE("heuristic nearly always matches the exact optimum") {
  const Window win = make_window(0, 6, 0, 6);
  int matches = 0;
  double excess_sum = 0.0;
  int excess_n = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const PointConfig cfg = capped_poisson(win, mix_seed(7800, trial), 12);
    SolverOptions opts;
    opts.heuristic_seed = mix_seed(7801, trial);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5, opts);
    const double exact = solve_exact(pb).action;
    const double heur = solve_heuristic(pb).action;
    CHECK(heur >= exact - 1e-9);
    if (std::abs(heur - exact) <= 1e-9) ++matches;
    if (std::abs(exact) > 1e-6) {
      excess_sum += (heur - exact) / std::abs(exact);
      ++excess_n;
    }
  }
  CHECK(matches >= 190);
  CHECK(excess_sum / excess_n <= 0.01);
}

TEST_CASE("solve dispatches by candidate count and honors force_mode") {
  const Window small_win = make_window(0, 6, 0, 6);
  const PointConfig small_cfg = capped_poisson(small_win, 60001, 5);
  const PathSolution exact = solve(line_problem(small_cfg, 6.0, 0.5));
  CHECK(exact.optimal);

  const Window big_win = make_window(-5, 30, -12, 12);
  const PointConfig big_cfg = PointConfig::poisson(big_win, 1.0, 60002);
  REQUIRE(big_cfg.size() > 400);
  const PathSolution heur = solve(line_problem(big_cfg, 25.0, 0.5));
  CHECK(!heur.optimal);
  CHECK(heur.action <= baseline_action(line_problem(big_cfg, 25.0, 0.5)) + 1e-9);

  SolverOptions force;
  force.force_mode = SolveMode::Heuristic;
  CHECK(!solve(line_problem(small_cfg, 6.0, 0.5, force)).optimal);
}

TEST_CASE("touched_boxes examples") {
  const Window win = make_window(-2, 6, -2, 2);
  const PointConfig empty = PointConfig::from_points(win, {}, {0, 0.0, "points"});
  const PathSolution straight = solve_exact(line_problem(empty, 5.0, 0.5));
  CHECK(touched_boxes(straight, empty, 1).empty());

  const PointConfig cfg = PointConfig::from_points(
      win, {{0.1, 0.1}, {1.2, 0.2}}, {0, 0.0, "points"});
  PathSolution sol;
  sol.path = PathSeq{{0.0, 0.0}, {0, 1}, {5.0, 0.0}};
  const std::set<Cell> one = touched_boxes(sol, cfg, 1);
  CHECK(one == std::set<Cell>{{0, 0}, {1, 0}});
  CHECK_THROWS_AS(touched_boxes(sol, cfg, 2), BadBoxSize);

  PathSolution only_first;
  only_first.path = PathSeq{{0.0, 0.0}, {0}, {5.0, 0.0}};
  CHECK(touched_boxes(only_first, cfg, 1) == std::set<Cell>{{0, 0}});
}

TEST_CASE("traced_cells follows the grid walk conventions") {
  // straight walk through three cells
  CHECK(traced_cells({{0.0, 0.0}, {2.4, 0.0}}, 1) ==
        std::vector<Cell>{{0, 0}, {1, 0}, {2, 0}});
  // a path inside one cell
  CHECK(traced_cells({{0.1, 0.1}, {0.2, -0.2}, {0.0, 0.3}}, 1) ==
        std::vector<Cell>{{0, 0}});
  // exact corner crossing: x step before y step
  CHECK(traced_cells({{0.0, 0.0}, {1.0, 1.0}}, 1) ==
        std::vector<Cell>{{0, 0}, {1, 0}, {1, 1}});
  // K = 3 cells
  CHECK(traced_cells({{0.0, 0.0}, {4.0, 0.0}}, 3) ==
        std::vector<Cell>{{0, 0}, {1, 0}});
  CHECK_THROWS_AS(traced_cells({{0.0, 0.0}, {1.0, 0.0}}, 4), BadBoxSize);
}

TEST_CASE("traced lattice paths are connected and cover the touched boxes") {
  const Window win = make_window(-2, 8, -5, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const PointConfig cfg = capped_poisson(win, mix_seed(8000, trial), 10);
    const GeodesicProblem pb = line_problem(cfg, 6.0, 0.4);
    const PathSolution sol = solve_exact(pb);
    for (int K : {1, 3}) {
      const std::vector<Cell> traced = traced_lattice_path(sol, cfg, K);
      REQUIRE(!traced.empty());
      for (size_t i = 1; i < traced.size(); ++i) {
        const int di = std::abs(traced[i].first - traced[i - 1].first);
        const int dj = std::abs(traced[i].second - traced[i - 1].second);
        CHECK(di + dj == 1);
      }
      const std::set<Cell> touched = touched_boxes(sol, cfg, K);
      const std::set<Cell> traced_set(traced.begin(), traced.end());
      for (const Cell& c : touched) CHECK(traced_set.count(c) == 1);
    }
  }
}

TEST_CASE("local search accepts an arbitrary feasible warm start") {
  const Window win = make_window(0, 6, 0, 6);
  const PointConfig cfg = capped_poisson(win, 424242, 9);
  const GeodesicProblem pb = line_problem(cfg, 6.0, 0.5);
  // a deliberately bad warm start: all points in index order
  PathSeq warm;
  warm.start = pb.start;
  for (int32_t i = 0; i < cfg.size(); ++i) warm.interior.push_back(i);
  warm.terminal = closest_point(pb.target, cfg.points()[warm.interior.back()]).q;
  const PathSolution polished = local_search_from(pb, warm, 77, true);
  CHECK(polished.action <= oracle::sequence_action(cfg, pb.start, pb.target,
                                                   pb.params.s, warm.interior) +
                               1e-9);
  const double exact = solve_exact(pb).action;
  CHECK(polished.action >= exact - 1e-9);
}
