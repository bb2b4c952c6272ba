#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpp/animals.hpp"
#include "fpp/geometry.hpp"

namespace fpp {

struct Window {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

  double area() const { return (xmax - xmin) * (ymax - ymin); }
  bool contains(Point2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

Window make_window(double xmin, double xmax, double ymin, double ymax);

struct SeedRecord {
  uint64_t seed = 0;
  double intensity = 0.0;
  std::string source;  // "poisson", "points", "insert", "import"
};

// K-box centered at (K i, K j), half-open: [Ki-K/2, Ki+K/2) x [Kj-K/2, Kj+K/2).
struct BoxSpec {
  int i = 0;
  int j = 0;
  double side = 1.0;
};

BoxSpec make_box(int i, int j, double side);

// Immutable finite point configuration in a rectangular window, indexed by the
// unit grid B_(i,j) = [i-1/2, i+1/2) x [j-1/2, j+1/2).
class PointConfig {
 public:
  PointConfig() = default;

  // Poisson(intensity * area) uniform points; identical output for identical
  // (window, intensity, seed). Throws BadIntensity for intensity <= 0.
  static PointConfig poisson(const Window& window, double intensity, uint64_t seed);

  // Explicit point list (imports, controls, small test instances).
  static PointConfig from_points(const Window& window, std::vector<Point2> points,
                                 SeedRecord record);

  const std::vector<Point2>& points() const { return points_; }
  const Window& window() const { return window_; }
  const SeedRecord& seed_record() const { return record_; }
  int size() const { return static_cast<int>(points_.size()); }
  Point2 point(int idx) const;

  static Cell unit_cell(Point2 p) {
    return {static_cast<int>(std::floor(p.x + 0.5)),
            static_cast<int>(std::floor(p.y + 0.5))};
  }

  // Indices of points in unit cell (i, j); empty span outside the grid range.
  std::span<const int32_t> cell(int i, int j) const;

  // Unit-grid index range covering the window.
  int cell_imin() const { return i0_; }
  int cell_jmin() const { return j0_; }
  int cells_x() const { return nx_; }
  int cells_y() const { return ny_; }

  template <class F>
  void for_each_in_disk(Point2 c, double r, F&& f) const {
    const int ilo = std::max(i0_, static_cast<int>(std::floor(c.x - r + 0.5)));
    const int ihi = std::min(i0_ + nx_ - 1, static_cast<int>(std::floor(c.x + r + 0.5)));
    const int jlo = std::max(j0_, static_cast<int>(std::floor(c.y - r + 0.5)));
    const int jhi = std::min(j0_ + ny_ - 1, static_cast<int>(std::floor(c.y + r + 0.5)));
    const double r2 = r * r;
    for (int j = jlo; j <= jhi; ++j)
      for (int i = ilo; i <= ihi; ++i)
        for (int32_t idx : cell(i, j)) {
          const Point2 d = points_[idx] - c;
          if (dot(d, d) <= r2) f(idx, points_[idx]);
        }
  }

  // New configuration with the points appended under fresh indices; the
  // original is unchanged. Throws DuplicatePoint / BadWindow on bad input.
  PointConfig inserted(std::span<const Point2> new_points) const;

 private:
  void build_grid();

  Window window_;
  std::vector<Point2> points_;
  SeedRecord record_;

  // CSR layout over the unit cells covering the window
  int i0_ = 0, j0_ = 0, nx_ = 0, ny_ = 0;
  std::vector<int32_t> cell_start_;
  std::vector<int32_t> cell_items_;
};

// Exact count of configuration points inside the half-open box.
int count_in_box(const PointConfig& config, const BoxSpec& box);

// Field X_(i,j) = number of points in unit cell (i,j); only nonzero cells are
// stored, so the total equals the point count.
AnimalGrid unit_square_counts(const PointConfig& config);

// Environment document: window, seed, intensity, points; numbers are written
// with 17 significant digits so reload is bit-exact.
std::string environment_to_json(const PointConfig& config);
PointConfig environment_from_json(const std::string& text);

}  // namespace fpp
