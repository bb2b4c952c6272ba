#include <cmath>

#include "doctest.h"
#include "fpp/geometry.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("rotate matches the axis examples") {
  const Point2 a = rotate({1.0, 0.0}, kPi / 2.0);
  CHECK(std::abs(a.x) <= 1e-12);
  CHECK(a.y == doctest::Approx(1.0));

  const Point2 b = rotate({0.0, 0.0}, 1.234);
  CHECK(b.x == 0.0);
  CHECK(b.y == 0.0);

  const Point2 c = rotate({1.0, 1.0}, kPi);
  CHECK(c.x == doctest::Approx(-1.0));
  CHECK(c.y == doctest::Approx(-1.0));
}

TEST_CASE("rotate preserves norm and inverts cleanly") {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const Point2 p{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const double theta = rng.uniform(-8, 8);
    const Point2 q = rotate(p, theta);
    CHECK(std::abs(norm(q) - norm(p)) <= 1e-12 * (1.0 + norm(p)));
    const Point2 back = rotate(q, -theta);
    CHECK(std::abs(back.x - p.x) <= 1e-12 * (1.0 + std::abs(p.x)) + 1e-12);
    CHECK(std::abs(back.y - p.y) <= 1e-12 * (1.0 + std::abs(p.y)) + 1e-12);
  }
}

TEST_CASE("closest_point examples") {
  const TargetSet line = make_line_target({2.0, 0.0}, {0.0, 1.0});
  const Closest cl = closest_point(line, {0.0, 0.0});
  CHECK(cl.q.x == doctest::Approx(2.0));
  CHECK(cl.q.y == doctest::Approx(0.0));
  CHECK(cl.distance == doctest::Approx(2.0));

  const TargetSet seg = make_segment_target({2.0, -1.0}, {2.0, 0.0});
  const Closest cs = closest_point(seg, {1.0, 1.0});
  CHECK(cs.q.x == doctest::Approx(2.0));
  CHECK(cs.q.y == doctest::Approx(0.0));
  CHECK(cs.distance == doctest::Approx(std::sqrt(2.0)));

  const TargetSet pt = make_point_target({3.0, 4.0});
  const Closest cp = closest_point(pt, {0.0, 0.0});
  CHECK(cp.distance == doctest::Approx(5.0));
}

TEST_CASE("closest_point beats dense sampling of the target") {
  Rng rng(99);
  const TargetSet targets[3] = {
      make_point_target({1.5, -2.0}),
      make_segment_target({-1.0, 2.0}, {4.0, 5.0}),
      make_line_target({0.5, 0.5}, {3.0 / 5.0, 4.0 / 5.0}),
  };
  for (const TargetSet& target : targets) {
    for (int trial = 0; trial < 20; ++trial) {
      const Point2 p{rng.uniform(-10, 10), rng.uniform(-10, 10)};
      const Closest c = closest_point(target, p);
      for (int i = 0; i < 1000; ++i) {
        Point2 sample;
        if (const auto* sp = std::get_if<SinglePoint>(&target)) {
          sample = sp->p;
        } else if (const auto* seg = std::get_if<Segment>(&target)) {
          sample = seg->a + rng.uniform01() * (seg->b - seg->a);
        } else {
          const auto& line = std::get<Line>(target);
          sample = line.origin + rng.uniform(-30, 30) * line.direction;
        }
        CHECK(c.distance <= dist(p, sample) + 1e-12);
      }
    }
  }
}

TEST_CASE("transversal_deviation examples and translation invariance") {
  const Point2 e1{1.0, 0.0};
  const Point2 e2{0.0, 1.0};
  {
    const Point2 pts[] = {{0, 0}, {5, 0}};
    CHECK(transversal_deviation(pts, e1) == 0.0);
  }
  {
    const Point2 pts[] = {{1, 2}, {3, -7}};
    CHECK(transversal_deviation(pts, e1) == doctest::Approx(7.0));
  }
  {
    const Point2 pts[] = {{0, 0}, {1, 1}};
    CHECK(transversal_deviation(pts, e2) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(transversal_deviation({}, e1), EmptyPath);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double angle = rng.uniform(0, 2 * kPi);
    const Point2 dir{std::cos(angle), std::sin(angle)};
    std::vector<Point2> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    const double w = transversal_deviation(pts, dir);
    const double shift = rng.uniform(-20, 20);
    std::vector<Point2> moved = pts;
    for (Point2& p : moved) p = p + shift * dir;
    CHECK(transversal_deviation(moved, dir) == doctest::Approx(w).epsilon(1e-9));
  }
}

TEST_CASE("make_variance_segments matches the defining formulas") {
  const VarianceSegments vs = make_variance_segments(16.0, 0.6);
  CHECK(vs.theta == doctest::Approx(std::pow(16.0, -0.4)));
  CHECK(vs.theta == doctest::Approx(0.32987697769322355));
  CHECK(vs.s.a.x == doctest::Approx(16.0));
  CHECK(vs.s.a.y == doctest::Approx(-2.6390158215457884));
  CHECK(vs.s.b.y == doctest::Approx(7.917047464637365));

  // midpoint offsets are +t^g/2 for S and -t^g/2 for S' (in the rotated frame)
  const double g = std::pow(16.0, 0.6);
  const Point2 mid_s = 0.5 * (vs.s.a + vs.s.b);
  CHECK(mid_s.y == doctest::Approx(g / 2.0));
  const Point2 mid_sp = 0.5 * (vs.s_prime.a + vs.s_prime.b);
  const Point2 back = rotate(mid_sp, -vs.theta);
  CHECK(back.x == doctest::Approx(16.0));
  CHECK(back.y == doctest::Approx(-g / 2.0));

  const VarianceSegments vs100 = make_variance_segments(100.0, 0.6);
  CHECK(dist(vs100.s.a, vs100.s.b) == doctest::Approx(31.697863849222266));
  CHECK(dist(vs100.s_prime.a, vs100.s_prime.b) == doctest::Approx(31.697863849222266));

  CHECK_THROWS_AS(make_variance_segments(16.0, 0.5), BadExponent);
  CHECK_THROWS_AS(make_variance_segments(16.0, 1.0), BadExponent);
}

TEST_CASE("variance segments stay within the Hausdorff-type bound") {
  for (double t : {16.0, 64.0, 256.0}) {
    for (double gp : {0.55, 0.6, 0.7}) {
      const VarianceSegments vs = make_variance_segments(t, gp);
      const double bound = 4.0 * std::pow(t, 2.0 * gp - 1.0);
      const TargetSet seg_s = make_segment_target(vs.s.a, vs.s.b);
      const TargetSet seg_sp = make_segment_target(vs.s_prime.a, vs.s_prime.b);
      const int samples = 2000;
      for (int i = 0; i <= samples; ++i) {
        const double u = static_cast<double>(i) / samples;
        const Point2 on_s = vs.s.a + u * (vs.s.b - vs.s.a);
        CHECK(closest_point(seg_sp, on_s).distance <= bound);
        const Point2 on_sp = vs.s_prime.a + u * (vs.s_prime.b - vs.s_prime.a);
        CHECK(closest_point(seg_s, on_sp).distance <= bound);
      }
    }
  }
}

TEST_CASE("target constructors validate") {
  CHECK_THROWS_AS(make_segment_target({1, 1}, {1, 1}), BadTarget);
  CHECK_THROWS_AS(make_line_target({0, 0}, {1, 1}), BadTarget);
  CHECK_THROWS_AS(make_cylinder({1, 1}, 1.0), BadTarget);
  CHECK_THROWS_AS(make_cylinder({1, 0}, 0.0), BadTarget);
  CHECK_NOTHROW(make_cylinder({0, 1}, 2.5));
  // normalization helper accepts raw vectors
  const TargetSet l = line_through({0, 0}, {2, 0});
  CHECK(std::get<Line>(l).direction.x == doctest::Approx(1.0));
}
