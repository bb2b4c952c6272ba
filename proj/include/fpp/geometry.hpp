#pragma once

#include <cmath>
#include <span>
#include <variant>

#include "fpp/errors.hpp"

namespace fpp {

// Absolute tolerance used by all geometric predicates.
inline constexpr double kGeomTol = 1e-12;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
// Counterclockwise perpendicular.
inline Point2 perp(Point2 p) { return {-p.y, p.x}; }

inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }
inline bool is_unit(Point2 p) { return std::abs(norm(p) - 1.0) <= kGeomTol; }

// Target sets for point-to-set problems. Lines are parametric
// (origin + unit direction) so vertical lines need no special case.
struct SinglePoint {
  Point2 p;
};

struct Segment {
  Point2 a;
  Point2 b;
};

struct Line {
  Point2 origin;
  Point2 direction;  // unit
};

using TargetSet = std::variant<SinglePoint, Segment, Line>;

TargetSet make_point_target(Point2 p);
TargetSet make_segment_target(Point2 a, Point2 b);
TargetSet make_line_target(Point2 origin, Point2 direction);
// Normalizes a nonzero direction before building the line.
TargetSet line_through(Point2 origin, Point2 raw_direction);

// Axis-symmetric strip of the given half-width around the line through the
// origin in the given unit direction.
struct Cylinder {
  Point2 direction;
  double half_width = 0.0;
};

Cylinder make_cylinder(Point2 direction, double half_width);

Point2 rotate(Point2 p, double theta);

struct Closest {
  Point2 q;
  double distance = 0.0;
};

// Closest point of the target and its distance to p. For segments this is the
// clamped orthogonal projection.
Closest closest_point(const TargetSet& target, Point2 p);

// Smallest w such that every point lies in the cylinder around `direction`:
// max over points of |<p, direction_perp>|. Throws EmptyPath on an empty span.
double transversal_deviation(std::span<const Point2> points, Point2 direction);

// Congruent-by-rotation target segments at distance t, rotated apart by
// theta = t^{-(1-gamma')}. The transversal offsets are asymmetric on purpose:
// S covers [-t^g/2, 3t^g/2], S' covers [-3t^g/2, t^g/2] before rotation.
struct VarianceSegments {
  Segment s;
  Segment s_prime;
  double theta = 0.0;
};

VarianceSegments make_variance_segments(double t, double gamma_prime);

}  // namespace fpp
