#include <cmath>

#include "doctest.h"
#include "fpp/environment.hpp"
#include "fpp/rng.hpp"
#include "fpp/stats.hpp"

using namespace fpp;

TEST_CASE("poisson sampling has the right first two moments") {
  const Window unit = make_window(0, 1, 0, 1);
  Welford counts;
  for (int rep = 0; rep < 100000; ++rep) {
    const PointConfig cfg = PointConfig::poisson(unit, 1.0, mix_seed(2024, rep));
    counts.add(static_cast<double>(cfg.size()));
  }
  CHECK(std::abs(counts.mean - 1.0) <= 0.01);
  CHECK(std::abs(counts.variance_sample() - 1.0) <= 0.03);
}

TEST_CASE("sampling is deterministic and validates inputs") {
  const Window win = make_window(-2, 3, 0, 4);
  const PointConfig a = PointConfig::poisson(win, 1.5, 42);
  const PointConfig b = PointConfig::poisson(win, 1.5, 42);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.points()[i].x == b.points()[i].x);
    CHECK(a.points()[i].y == b.points()[i].y);
    CHECK(win.contains(a.points()[i]));
  }
  CHECK_THROWS_AS(PointConfig::poisson(win, 0.0, 1), BadIntensity);
  CHECK_THROWS_AS(PointConfig::poisson(win, -1.0, 1), BadIntensity);
  CHECK_THROWS_AS(make_window(1, 1, 0, 2), BadWindow);
}

TEST_CASE("grid lookup is consistent with the unit cells") {
  const Window win = make_window(-5, 5, -5, 5);
  const PointConfig cfg = PointConfig::poisson(win, 2.0, 7);
  for (int idx = 0; idx < cfg.size(); ++idx) {
    const Cell c = PointConfig::unit_cell(cfg.points()[idx]);
    bool found = false;
    for (int32_t k : cfg.cell(c.first, c.second))
      if (k == idx) found = true;
    CHECK(found);
  }
  int listed = 0;
  for (int i = cfg.cell_imin(); i < cfg.cell_imin() + cfg.cells_x(); ++i)
    for (int j = cfg.cell_jmin(); j < cfg.cell_jmin() + cfg.cells_y(); ++j)
      listed += static_cast<int>(cfg.cell(i, j).size());
  CHECK(listed == cfg.size());
}

TEST_CASE("count_in_box follows the half-open convention") {
  const Window win = make_window(-3, 3, -3, 3);
  const PointConfig empty = PointConfig::from_points(win, {}, {1, 0.0, "points"});
  CHECK(count_in_box(empty, make_box(0, 0, 1.0)) == 0);

  const PointConfig one =
      PointConfig::from_points(win, {{0.1, 0.1}}, {1, 0.0, "points"});
  CHECK(count_in_box(one, make_box(0, 0, 1.0)) == 1);

  // a point exactly on the upper boundary belongs to the adjacent box
  const PointConfig edge =
      PointConfig::from_points(win, {{0.5, 0.0}}, {1, 0.0, "points"});
  CHECK(count_in_box(edge, make_box(0, 0, 1.0)) == 0);
  CHECK(count_in_box(edge, make_box(1, 0, 1.0)) == 1);

  // K-boxes: side 3 centered at (0, 0) covers [-1.5, 1.5)
  const PointConfig spread = PointConfig::from_points(
      win, {{-1.5, 0.0}, {1.4, 1.4}, {1.5, 0.0}}, {1, 0.0, "points"});
  CHECK(count_in_box(spread, make_box(0, 0, 3.0)) == 2);
  CHECK_THROWS_AS(make_box(0, 0, 0.0), BadBoxSize);
}

TEST_CASE("counts in disjoint boxes look independent") {
  const Window win = make_window(0, 2, 0, 1);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    const PointConfig cfg = PointConfig::poisson(win, 1.0, mix_seed(5150, rep));
    const double a = count_in_box(cfg, make_box(0, 0, 1.0));
    const double b = count_in_box(cfg, make_box(1, 0, 1.0));
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const double n = reps;
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double va = sxx / n - (sx / n) * (sx / n);
  const double vb = syy / n - (sy / n) * (sy / n);
  const double rho = cov / std::sqrt(va * vb);
  CHECK(std::abs(rho) < 0.05);
}

TEST_CASE("insert_points appends fresh indices and rejects duplicates") {
  const Window win = make_window(0, 4, 0, 4);
  const PointConfig base =
      PointConfig::from_points(win, {{1, 1}, {2, 2}}, {9, 0.0, "points"});

  const Point2 extra[2] = {{3.0, 1.0}, {0.5, 3.5}};
  const PointConfig grown = base.inserted(extra);
  CHECK(base.size() == 2);
  REQUIRE(grown.size() == 4);
  CHECK(grown.points()[2].x == 3.0);
  CHECK(grown.points()[3].y == 3.5);
  CHECK(count_in_box(grown, make_box(3, 1, 1.0)) == 1);

  const Point2 dup[1] = {{1.0, 1.0}};
  CHECK_THROWS_AS(base.inserted(dup), DuplicatePoint);
  const Point2 outside[1] = {{9.0, 0.0}};
  CHECK_THROWS_AS(base.inserted(outside), BadWindow);

  // inserting into an empty configuration yields exactly those points
  const PointConfig empty = PointConfig::from_points(win, {}, {9, 0.0, "points"});
  const PointConfig filled = empty.inserted(extra);
  CHECK(filled.size() == 2);

  // batch associativity: A then B equals A + B in one batch
  const Point2 batch_a[1] = {{0.25, 0.25}};
  const Point2 batch_b[1] = {{1.25, 0.25}};
  const Point2 both[2] = {{0.25, 0.25}, {1.25, 0.25}};
  const PointConfig two_step = base.inserted(batch_a).inserted(batch_b);
  const PointConfig one_step = base.inserted(both);
  REQUIRE(two_step.size() == one_step.size());
  for (int i = 0; i < two_step.size(); ++i) {
    CHECK(two_step.points()[i].x == one_step.points()[i].x);
    CHECK(two_step.points()[i].y == one_step.points()[i].y);
  }
}

TEST_CASE("unit_square_counts conserves mass") {
  const Window win = make_window(-4, 4, -4, 4);
  const PointConfig empty = PointConfig::from_points(win, {}, {0, 0.0, "points"});
  CHECK(unit_square_counts(empty).values.empty());

  std::vector<Point2> one_per_cell;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      one_per_cell.push_back({static_cast<double>(i) + 0.1, static_cast<double>(j) - 0.1});
  const PointConfig grid_cfg =
      PointConfig::from_points(win, one_per_cell, {0, 0.0, "points"});
  const AnimalGrid field = unit_square_counts(grid_cfg);
  for (const auto& [cell, v] : field.values) CHECK(v == 1.0);
  CHECK(field.total() == doctest::Approx(25.0));

  const PointConfig random_cfg = PointConfig::poisson(win, 1.7, 321);
  CHECK(unit_square_counts(random_cfg).total() ==
        doctest::Approx(static_cast<double>(random_cfg.size())));
}

TEST_CASE("environment documents round-trip bit-exactly") {
  const Window win = make_window(-1.25, 7.5, -3.5, 2.25);
  const PointConfig cfg = PointConfig::poisson(win, 0.8, 777);
  const std::string text = environment_to_json(cfg);
  const PointConfig back = environment_from_json(text);
  REQUIRE(back.size() == cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    CHECK(back.points()[i].x == cfg.points()[i].x);
    CHECK(back.points()[i].y == cfg.points()[i].y);
  }
  CHECK(back.window().xmin == cfg.window().xmin);
  CHECK(back.seed_record().seed == cfg.seed_record().seed);
  CHECK(back.seed_record().intensity == cfg.seed_record().intensity);
  CHECK(environment_to_json(back) == text);
}
