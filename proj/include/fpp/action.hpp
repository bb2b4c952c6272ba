#pragma once

#include <vector>

#include "fpp/environment.hpp"
#include "fpp/geometry.hpp"

namespace fpp {

// Time budget s; experiments use the space-time scaling s = c t.
struct ActionParams {
  double s = 1.0;
};

ActionParams make_params(double s);
ActionParams params_from_ct(double c, double t);

// Discrete geodesic candidate: start, ordered distinct interior configuration
// point indices, terminal point.
struct PathSeq {
  Point2 start;
  std::vector<int32_t> interior;
  Point2 terminal;
};

// Piecewise-linear path with explicit vertex times on [0, s].
struct TimedPath {
  std::vector<Point2> vertices;
  std::vector<double> times;
};

// Resolved vertex list: start, interior points, terminal.
std::vector<Point2> path_vertices(const PathSeq& path, const PointConfig& config);

// Total polyline length sum |x_{i+1} - x_i|. Throws BadIndex on invalid or
// repeated interior indices.
double path_length(const PathSeq& path, const PointConfig& config);

// L^2/(2s) - N with N the number of interior points.
double path_action(const PathSeq& path, const PointConfig& config, ActionParams params);

// Constant-speed schedule: segment durations proportional to segment lengths,
// which minimizes sum |dx_i|^2/(2 dt_i) under sum dt_i = s. A zero-length path
// becomes the constant path.
TimedPath optimal_time_allocation(const PathSeq& path, const PointConfig& config,
                                  ActionParams params);

// sum |dx_i|^2 / (2 dt_i); a zero-duration segment of nonzero length throws
// InfiniteEnergy.
double kinetic_energy(const TimedPath& path);

// Kinetic energy minus the number of distinct configuration points lying
// within 1e-12 of the polyline. Exists to validate the discrete form.
double continuous_action(const TimedPath& path, const PointConfig& config);

}  // namespace fpp
