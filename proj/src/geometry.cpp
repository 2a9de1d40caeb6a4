#include "miskrige/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "miskrige/error.hpp"
#include "miskrige/parallel.hpp"
#include "miskrige/random.hpp"

namespace miskrige {

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  if (a.dim() == 1) return std::abs(dx);
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= width(i);
  return v;
}

bool Box::contains(const Point& p) const {
  if (p.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(p[i] >= lower[i] && p[i] <= upper[i])) return false;
  return true;
}

namespace {

void validate_box(const Box& box, const char* name) {
  if (box.dim() != 1 && box.dim() != 2)
    throw ValidationError(std::string(name) + ": dimension must be 1 or 2");
  if (box.upper.size() != box.lower.size())
    throw ValidationError(std::string(name) + ": lower/upper bound count mismatch");
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (!std::isfinite(box.lower[i]) || !std::isfinite(box.upper[i]))
      throw ValidationError(std::string(name) + ": bounds must be finite");
    if (!(box.lower[i] < box.upper[i]))
      throw ValidationError(std::string(name) + ": degenerate axis (lower >= upper)");
  }
}

}  // namespace

Region::Region(Box omega) : Region(omega, omega) {}

Region::Region(Box omega, Box ambient) : omega_(std::move(omega)), ambient_(std::move(ambient)) {
  validate_box(omega_, "region");
  validate_box(ambient_, "ambient domain");
  if (ambient_.dim() != omega_.dim())
    throw ValidationError("region and ambient domain differ in dimension");
  for (std::size_t i = 0; i < dim(); ++i)
    if (omega_.lower[i] < ambient_.lower[i] || omega_.upper[i] > ambient_.upper[i])
      throw ValidationError("region must lie inside the ambient domain");
}

Region Region::unit_interval() { return Region(Box{{0.0}, {1.0}}); }

Region Region::interval(double a, double b, double lo, double hi) {
  return Region(Box{{a}, {b}}, Box{{lo}, {hi}});
}

bool Region::compactly_contained() const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(omega_.lower[i] > ambient_.lower[i] && omega_.upper[i] < ambient_.upper[i])) return false;
  return true;
}

DesignKind parse_design_kind(std::string_view name) {
  if (name == "midpoint" || name == "midpoint-grid") return DesignKind::midpoint_grid;
  if (name == "jittered" || name == "jittered-grid") return DesignKind::jittered_grid;
  if (name == "iid" || name == "iid-uniform") return DesignKind::iid_uniform;
  throw ValidationError("unknown design kind '" + std::string(name) +
                        "' (expected midpoint-grid, jittered-grid or iid-uniform)");
}

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::midpoint_grid: return "midpoint-grid";
    case DesignKind::jittered_grid: return "jittered-grid";
    case DesignKind::iid_uniform: return "iid-uniform";
  }
  return "unknown";
}

std::size_t default_fill_resolution(std::size_t dim) { return dim == 1 ? 10000 : 300; }

double fill_distance(std::span<const Point> points, const Region& region, std::size_t resolution) {
  if (points.empty()) throw ValidationError("fill_distance: empty point list");
  if (resolution < 2) throw ValidationError("fill_distance: resolution must be at least 2");
  const Box& box = region.omega();
  const std::size_t m = resolution;

  if (region.dim() == 1) {
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(p[0]);
    std::sort(xs.begin(), xs.end());
    const double a = box.lower[0];
    const double w = box.width(0);
    double h = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double x = a + w * static_cast<double>(i) / static_cast<double>(m);
      auto it = std::lower_bound(xs.begin(), xs.end(), x);
      double d = std::numeric_limits<double>::infinity();
      if (it != xs.end()) d = *it - x;
      if (it != xs.begin()) d = std::min(d, x - *std::prev(it));
      h = std::max(h, d);
    }
    return h;
  }

  // d = 2: brute-force scan, one grid row per task.
  std::vector<double> row_max(m + 1, 0.0);
  parallel_for(m + 1, [&](std::size_t i) {
    const double x = box.lower[0] + box.width(0) * static_cast<double>(i) / static_cast<double>(m);
    double worst = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      const double y =
          box.lower[1] + box.width(1) * static_cast<double>(j) / static_cast<double>(m);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : points) {
        const double dx = p[0] - x, dy = p[1] - y;
        best = std::min(best, dx * dx + dy * dy);
      }
      worst = std::max(worst, best);
    }
    row_max[i] = std::sqrt(worst);
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

double separation_radius(std::span<const Point> points) {
  if (points.size() < 2) throw ValidationError("separation_radius: need at least two points");
  double best = std::numeric_limits<double>::infinity();
  if (points[0].dim() == 1) {
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(p[0]);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) best = std::min(best, xs[i] - xs[i - 1]);
  } else {
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j)
        best = std::min(best, distance(points[i], points[j]));
  }
  if (!(best > 0.0)) throw ValidationError("separation_radius: duplicate design points");
  return 0.5 * best;
}

DesignSet::DesignSet(Region region, std::vector<Point> points, std::size_t fill_resolution)
    : region_(std::move(region)), points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("design must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.dim() != region_.dim()) throw ValidationError("design point dimension mismatch");
    for (std::size_t a = 0; a < p.dim(); ++a)
      if (!std::isfinite(p[a])) throw ValidationError("design point has a non-finite coordinate");
    if (!region_.omega().contains(p)) {
      std::ostringstream msg;
      msg << "design point " << i << " lies outside the region";
      throw ValidationError(msg.str());
    }
  }
  const std::size_t m = fill_resolution ? fill_resolution : default_fill_resolution(dim());
  h_ = miskrige::fill_distance(points_, region_, m);
  if (points_.size() == 1) {
    q_ = std::numeric_limits<double>::infinity();
    rho_ = 1.0;
  } else {
    q_ = miskrige::separation_radius(points_);
    rho_ = h_ / q_;
  }
}

double mesh_ratio(const DesignSet& design) { return design.mesh_ratio(); }

namespace {

std::size_t grid_side(std::size_t n, std::size_t dim) {
  if (dim == 1) return n;
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n)
    throw ValidationError("grid designs in d=2 need n to be a perfect square");
  return side;
}

}  // namespace

DesignSet make_design(DesignKind kind, std::size_t n, const Region& region, std::uint64_t seed) {
  if (n == 0) throw ValidationError("make_design: n must be at least 1");
  const Box& box = region.omega();
  const std::size_t dim = region.dim();
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(n);

  if (kind == DesignKind::iid_uniform) {
    for (std::size_t i = 0; i < n; ++i) {
      Point p = dim == 1 ? Point(0.0) : Point(0.0, 0.0);
      for (std::size_t a = 0; a < dim; ++a) p[a] = rng.uniform(box.lower[a], box.upper[a]);
      pts.push_back(p);
    }
    return DesignSet(region, std::move(pts));
  }

  const std::size_t side = grid_side(n, dim);
  const double jitter = kind == DesignKind::jittered_grid ? 0.25 : 0.0;
  auto coord = [&](std::size_t axis, std::size_t i) {
    const double spacing = box.width(axis) / static_cast<double>(side);
    double c = box.lower[axis] + spacing * (static_cast<double>(i) + 0.5);
    if (jitter > 0.0) c += jitter * spacing * (2.0 * rng.uniform() - 1.0);
    return c;
  };
  if (dim == 1) {
    for (std::size_t i = 0; i < side; ++i) pts.emplace_back(coord(0, i));
  } else {
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j) {
        const double x = coord(0, i);
        const double y = coord(1, j);
        pts.emplace_back(x, y);
      }
  }
  return DesignSet(region, std::move(pts));
}

}  // namespace miskrige
