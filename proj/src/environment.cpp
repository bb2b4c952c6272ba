#include "fpp/environment.hpp"

#include <algorithm>
#include <cmath>

#include "fpp/report_io.hpp"
#include "fpp/rng.hpp"
#include "json.hpp"

namespace fpp {

Window make_window(double xmin, double xmax, double ymin, double ymax) {
  if (!(std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) &&
        std::isfinite(ymax)))
    throw BadWindow("window bounds must be finite");
  if (!(xmax > xmin && ymax > ymin)) throw BadWindow("window must have positive extent");
  return Window{xmin, xmax, ymin, ymax};
}

BoxSpec make_box(int i, int j, double side) {
  if (!(side > 0.0)) throw BadBoxSize("box side must be positive");
  return BoxSpec{i, j, side};
}

Point2 PointConfig::point(int idx) const {
  if (idx < 0 || idx >= size()) throw BadIndex("point index out of range");
  return points_[idx];
}

std::span<const int32_t> PointConfig::cell(int i, int j) const {
  if (i < i0_ || i >= i0_ + nx_ || j < j0_ || j >= j0_ + ny_) return {};
  const size_t c = static_cast<size_t>(j - j0_) * nx_ + static_cast<size_t>(i - i0_);
  return {cell_items_.data() + cell_start_[c],
          static_cast<size_t>(cell_start_[c + 1] - cell_start_[c])};
}

void PointConfig::build_grid() {
  i0_ = static_cast<int>(std::floor(window_.xmin + 0.5));
  j0_ = static_cast<int>(std::floor(window_.ymin + 0.5));
  const int i1 = static_cast<int>(std::floor(window_.xmax + 0.5));
  const int j1 = static_cast<int>(std::floor(window_.ymax + 0.5));
  nx_ = i1 - i0_ + 1;
  ny_ = j1 - j0_ + 1;

  const size_t ncells = static_cast<size_t>(nx_) * ny_;
  cell_start_.assign(ncells + 1, 0);
  cell_items_.assign(points_.size(), 0);

  auto flat = [&](Point2 p) {
    const Cell c = unit_cell(p);
    return static_cast<size_t>(c.second - j0_) * nx_ + static_cast<size_t>(c.first - i0_);
  };

  for (const Point2& p : points_) cell_start_[flat(p) + 1]++;
  for (size_t c = 0; c < ncells; ++c) cell_start_[c + 1] += cell_start_[c];
  std::vector<int32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (int32_t idx = 0; idx < static_cast<int32_t>(points_.size()); ++idx)
    cell_items_[cursor[flat(points_[idx])]++] = idx;

  // a.s.-distinct for Poisson samples; enforced for user-supplied points
  for (int32_t idx = 0; idx < static_cast<int32_t>(points_.size()); ++idx) {
    bool dup = false;
    for_each_in_disk(points_[idx], kGeomTol, [&](int32_t other, Point2) {
      if (other != idx) dup = true;
    });
    if (dup) throw DuplicatePoint("configuration points closer than 1e-12");
  }
}

PointConfig PointConfig::poisson(const Window& window, double intensity, uint64_t seed) {
  if (!(intensity > 0.0)) throw BadIntensity("intensity must be positive");
  make_window(window.xmin, window.xmax, window.ymin, window.ymax);

  Rng rng(seed);
  const int64_t n = rng.poisson(intensity * window.area());

  PointConfig cfg;
  cfg.window_ = window;
  cfg.record_ = SeedRecord{seed, intensity, "poisson"};
  cfg.points_.reserve(static_cast<size_t>(n));
  for (int64_t k = 0; k < n; ++k) {
    const double x = rng.uniform(window.xmin, window.xmax);
    const double y = rng.uniform(window.ymin, window.ymax);
    cfg.points_.push_back({x, y});
  }
  cfg.build_grid();
  return cfg;
}

PointConfig PointConfig::from_points(const Window& window, std::vector<Point2> points,
                                     SeedRecord record) {
  make_window(window.xmin, window.xmax, window.ymin, window.ymax);
  for (const Point2& p : points) {
    if (!finite(p)) throw Error("from_points: coordinates must be finite");
    if (!window.contains(p)) throw BadWindow("point lies outside the window");
  }
  PointConfig cfg;
  cfg.window_ = window;
  cfg.points_ = std::move(points);
  cfg.record_ = std::move(record);
  cfg.build_grid();
  return cfg;
}

PointConfig PointConfig::inserted(std::span<const Point2> new_points) const {
  std::vector<Point2> pts = points_;
  pts.reserve(pts.size() + new_points.size());
  for (const Point2& p : new_points) {
    if (!finite(p)) throw Error("inserted: coordinates must be finite");
    if (!window_.contains(p)) throw BadWindow("inserted point lies outside the window");
    pts.push_back(p);
  }
  SeedRecord rec = record_;
  rec.source = "insert";
  PointConfig out;
  out.window_ = window_;
  out.points_ = std::move(pts);
  out.record_ = std::move(rec);
  out.build_grid();  // throws DuplicatePoint if an inserted point collides
  return out;
}

int count_in_box(const PointConfig& config, const BoxSpec& box) {
  const double cx = box.side * box.i;
  const double cy = box.side * box.j;
  const double h = box.side / 2.0;
  int n = 0;
  // iterate unit cells overlapping the box; filter by the half-open bounds
  const int ilo = static_cast<int>(std::floor(cx - h + 0.5));
  const int ihi = static_cast<int>(std::floor(cx + h + 0.5));
  const int jlo = static_cast<int>(std::floor(cy - h + 0.5));
  const int jhi = static_cast<int>(std::floor(cy + h + 0.5));
  for (int j = jlo; j <= jhi; ++j)
    for (int i = ilo; i <= ihi; ++i)
      for (int32_t idx : config.cell(i, j)) {
        const Point2 p = config.points()[idx];
        if (p.x >= cx - h && p.x < cx + h && p.y >= cy - h && p.y < cy + h) ++n;
      }
  return n;
}

AnimalGrid unit_square_counts(const PointConfig& config) {
  AnimalGrid grid;
  for (const Point2& p : config.points()) {
    const Cell c = PointConfig::unit_cell(p);
    grid.values[c] += 1.0;
  }
  return grid;
}

std::string environment_to_json(const PointConfig& config) {
  JsonWriter w;
  w.begin_object();
  w.key("window").begin_object();
  w.key("xmin").value(config.window().xmin);
  w.key("xmax").value(config.window().xmax);
  w.key("ymin").value(config.window().ymin);
  w.key("ymax").value(config.window().ymax);
  w.end_object();
  w.key("seed").value(config.seed_record().seed);
  w.key("intensity").value(config.seed_record().intensity);
  w.key("points").begin_array();
  for (const Point2& p : config.points()) {
    w.begin_array().value(p.x).value(p.y).end_array();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

PointConfig environment_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("environment document is not valid JSON: ") + e.what());
  }
  try {
    const auto& jw = doc.at("window");
    const Window win = make_window(jw.at("xmin").get<double>(), jw.at("xmax").get<double>(),
                                   jw.at("ymin").get<double>(), jw.at("ymax").get<double>());
    SeedRecord rec;
    rec.seed = doc.at("seed").get<uint64_t>();
    rec.intensity = doc.at("intensity").get<double>();
    rec.source = "import";
    std::vector<Point2> pts;
    for (const auto& jp : doc.at("points")) {
      pts.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
    }
    return PointConfig::from_points(win, std::move(pts), std::move(rec));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed environment document: ") + e.what());
  }
}

}  // namespace fpp
