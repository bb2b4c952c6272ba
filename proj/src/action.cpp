#include "fpp/action.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace fpp {

ActionParams make_params(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error("ActionParams: s must be positive");
  return ActionParams{s};
}

ActionParams params_from_ct(double c, double t) {
  if (!(c > 0.0) || !(t > 0.0)) throw Error("ActionParams: c and t must be positive");
  return make_params(c * t);
}

namespace {

void validate_interior(const PathSeq& path, const PointConfig& config) {
  std::unordered_set<int32_t> seen;
  for (int32_t idx : path.interior) {
    if (idx < 0 || idx >= config.size()) throw BadIndex("interior index out of range");
    if (!seen.insert(idx).second) throw BadIndex("interior indices must be distinct");
  }
  if (!finite(path.start) || !finite(path.terminal))
    throw Error("path endpoints must be finite");
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return dist(p, a);
  const double u = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + u * ab);
}

}  // namespace

std::vector<Point2> path_vertices(const PathSeq& path, const PointConfig& config) {
  validate_interior(path, config);
  std::vector<Point2> v;
  v.reserve(path.interior.size() + 2);
  v.push_back(path.start);
  for (int32_t idx : path.interior) v.push_back(config.points()[idx]);
  v.push_back(path.terminal);
  return v;
}

double path_length(const PathSeq& path, const PointConfig& config) {
  const std::vector<Point2> v = path_vertices(path, config);
  double len = 0.0;
  for (size_t i = 0; i + 1 < v.size(); ++i) len += dist(v[i], v[i + 1]);
  return len;
}

double path_action(const PathSeq& path, const PointConfig& config, ActionParams params) {
  const double len = path_length(path, config);
  return len * len / (2.0 * params.s) - static_cast<double>(path.interior.size());
}

TimedPath optimal_time_allocation(const PathSeq& path, const PointConfig& config,
                                  ActionParams params) {
  const std::vector<Point2> v = path_vertices(path, config);
  double len = 0.0;
  for (size_t i = 0; i + 1 < v.size(); ++i) len += dist(v[i], v[i + 1]);

  TimedPath out;
  out.vertices = v;
  out.times.resize(v.size());
  out.times.front() = 0.0;
  if (len <= 0.0) {
    // constant path: spread the (coincident) vertices evenly over [0, s]
    const size_t m = v.size() - 1;
    for (size_t i = 1; i <= m; ++i)
      out.times[i] = params.s * static_cast<double>(i) / static_cast<double>(m);
    return out;
  }
  double acc = 0.0;
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    acc += dist(v[i], v[i + 1]);
    out.times[i + 1] = params.s * acc / len;
  }
  out.times.back() = params.s;
  return out;
}

double kinetic_energy(const TimedPath& path) {
  if (path.vertices.size() != path.times.size() || path.vertices.empty())
    throw Error("TimedPath: vertex and time lists must match");
  double e = 0.0;
  for (size_t i = 0; i + 1 < path.vertices.size(); ++i) {
    const double dt = path.times[i + 1] - path.times[i];
    if (dt < 0.0) throw Error("TimedPath: times must be nondecreasing");
    const Point2 dx = path.vertices[i + 1] - path.vertices[i];
    const double d2 = dot(dx, dx);
    if (dt == 0.0) {
      if (d2 > 0.0) throw InfiniteEnergy("zero-duration segment of nonzero length");
      continue;
    }
    e += d2 / (2.0 * dt);
  }
  return e;
}

double continuous_action(const TimedPath& path, const PointConfig& config) {
  const double e = kinetic_energy(path);
  int touched = 0;
  for (const Point2& p : config.points()) {
    double d = dist(p, path.vertices.front());
    for (size_t i = 0; i + 1 < path.vertices.size() && d > kGeomTol; ++i)
      d = std::min(d, segment_distance(p, path.vertices[i], path.vertices[i + 1]));
    if (d <= kGeomTol) ++touched;
  }
  return e - static_cast<double>(touched);
}

}  // namespace fpp
