#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace miskrige {

/// A location in d = 1 or d = 2 dimensions.
class Point {
 public:
  Point() = default;
  explicit Point(double x) : coords_{x, 0.0}, dim_(1) {}
  Point(double x, double y) : coords_{x, y}, dim_(2) {}

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t axis) const { return coords_[axis]; }
  double& operator[](std::size_t axis) { return coords_[axis]; }

  bool operator==(const Point& other) const {
    return dim_ == other.dim_ && coords_[0] == other.coords_[0] &&
           (dim_ == 1 || coords_[1] == other.coords_[1]);
  }

 private:
  std::array<double, 2> coords_{0.0, 0.0};
  std::size_t dim_ = 1;
};

/// Euclidean distance. Symmetric bit-for-bit.
double distance(const Point& a, const Point& b);

/// An axis-aligned box.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  double width(std::size_t axis) const { return upper[axis] - lower[axis]; }
  double volume() const;
  bool contains(const Point& p) const;  // closed box
};

/// Experimental region Omega together with the ambient domain D it sits in.
class Region {
 public:
  /// Omega = D.
  explicit Region(Box omega);
  Region(Box omega, Box ambient);

  /// Unit interval (0,1) with D = Omega.
  static Region unit_interval();
  /// Interval (a,b) inside D = (lo,hi).
  static Region interval(double a, double b, double lo, double hi);
  static Region interval(double a, double b) { return interval(a, b, a, b); }

  std::size_t dim() const { return omega_.dim(); }
  const Box& omega() const { return omega_; }
  const Box& ambient() const { return ambient_; }

  /// True when Omega is strictly inside D on every axis.
  bool compactly_contained() const;

 private:
  Box omega_;
  Box ambient_;
};

enum class DesignKind { midpoint_grid, jittered_grid, iid_uniform };

DesignKind parse_design_kind(std::string_view name);
std::string to_string(DesignKind kind);

/// Default fill-distance resolution: 10^4 intervals per axis in d=1, 300 in d=2.
std::size_t default_fill_resolution(std::size_t dim);

/// Maximum over a uniform grid on Omega (resolution intervals per axis, endpoints
/// included) of the distance to the nearest point.
double fill_distance(std::span<const Point> points, const Region& region, std::size_t resolution);

/// Half the smallest pairwise distance. Throws on duplicates or fewer than two points.
double separation_radius(std::span<const Point> points);

/// Immutable point configuration with cached fill distance h, separation radius q and
/// mesh ratio rho = h/q.
class DesignSet {
 public:
  /// Validates the points (inside Omega, distinct, matching dimension) and computes
  /// the geometry. A single-point design has q = +inf and rho = 1 by convention.
  DesignSet(Region region, std::vector<Point> points, std::size_t fill_resolution = 0);

  const Region& region() const { return region_; }
  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return region_.dim(); }

  double fill_distance() const { return h_; }
  double separation_radius() const { return q_; }
  double mesh_ratio() const { return rho_; }

 private:
  Region region_;
  std::vector<Point> points_;
  double h_ = 0.0;
  double q_ = 0.0;
  double rho_ = 1.0;
};

/// rho = h / q of an existing design.
double mesh_ratio(const DesignSet& design);

/// Builds a design. In d=2 the grid kinds need n to be a perfect square.
/// Jittered grids perturb each midpoint uniformly within +-25% of the spacing.
DesignSet make_design(DesignKind kind, std::size_t n, const Region& region, std::uint64_t seed);

}  // namespace miskrige
