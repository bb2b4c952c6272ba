#include "fpp/geometry.hpp"

#include <algorithm>

namespace fpp {

namespace {

void require_finite(Point2 p, const char* what) {
  if (!finite(p)) throw Error(std::string(what) + ": coordinates must be finite");
}

}  // namespace

TargetSet make_point_target(Point2 p) {
  require_finite(p, "make_point_target");
  return SinglePoint{p};
}

TargetSet make_segment_target(Point2 a, Point2 b) {
  require_finite(a, "make_segment_target");
  require_finite(b, "make_segment_target");
  if (dist(a, b) <= kGeomTol) throw BadTarget("segment endpoints must be distinct");
  return Segment{a, b};
}

TargetSet make_line_target(Point2 origin, Point2 direction) {
  require_finite(origin, "make_line_target");
  if (!is_unit(direction)) throw BadTarget("line direction must have unit norm");
  return Line{origin, direction};
}

TargetSet line_through(Point2 origin, Point2 raw_direction) {
  const double n = norm(raw_direction);
  if (!(n > 0.0) || !std::isfinite(n)) throw BadTarget("line direction must be nonzero");
  return make_line_target(origin, {raw_direction.x / n, raw_direction.y / n});
}

Cylinder make_cylinder(Point2 direction, double half_width) {
  if (!is_unit(direction)) throw BadTarget("cylinder direction must have unit norm");
  if (!(half_width > 0.0)) throw BadTarget("cylinder half-width must be positive");
  return Cylinder{direction, half_width};
}

Point2 rotate(Point2 p, double theta) {
  if (!std::isfinite(theta)) throw Error("rotate: angle must be finite");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {p.x * c - p.y * s, p.x * s + p.y * c};
}

Closest closest_point(const TargetSet& target, Point2 p) {
  require_finite(p, "closest_point");
  if (const auto* sp = std::get_if<SinglePoint>(&target)) {
    return {sp->p, dist(p, sp->p)};
  }
  if (const auto* seg = std::get_if<Segment>(&target)) {
    const Point2 ab = seg->b - seg->a;
    const double len2 = dot(ab, ab);
    double u = dot(p - seg->a, ab) / len2;
    u = std::clamp(u, 0.0, 1.0);
    const Point2 q = seg->a + u * ab;
    return {q, dist(p, q)};
  }
  const auto& line = std::get<Line>(target);
  const double u = dot(p - line.origin, line.direction);
  const Point2 q = line.origin + u * line.direction;
  return {q, dist(p, q)};
}

double transversal_deviation(std::span<const Point2> points, Point2 direction) {
  if (points.empty()) throw EmptyPath("transversal_deviation: no points");
  if (!is_unit(direction)) throw BadTarget("axis direction must have unit norm");
  const Point2 n = perp(direction);
  double w = 0.0;
  for (const Point2& p : points) w = std::max(w, std::abs(dot(p, n)));
  return w;
}

VarianceSegments make_variance_segments(double t, double gamma_prime) {
  if (!(gamma_prime > 0.5 && gamma_prime < 1.0))
    throw BadExponent("gamma_prime must lie in (1/2, 1)");
  if (!(t > 1.0)) throw Error("make_variance_segments: t must exceed 1");

  const double g = std::pow(t, gamma_prime);
  const double theta = std::pow(t, -(1.0 - gamma_prime));

  const Segment s{{t, -g / 2.0}, {t, 3.0 * g / 2.0}};
  const Segment s_prime{rotate({t, -3.0 * g / 2.0}, theta), rotate({t, g / 2.0}, theta)};
  return {s, s_prime, theta};
}

}  // namespace fpp
