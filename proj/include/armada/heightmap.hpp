#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace armada {

/// Surface elevation model m(x, y) in world coordinates.
///
/// Three variants: flat offset, inclined plane, and a bilinear grid. The grid
/// throws on out-of-bounds queries through the public API; the planner uses
/// the clamped template path (edge extension, zero slope outside) so a solver
/// iterate that momentarily leaves the map never faults mid-iteration.
class HeightMap {
 public:
  static HeightMap flat(double height);
  /// z = height0 + gx*x + gy*y
  static HeightMap plane(double height0, double gx, double gy);
  /// Row-major heights, rows along y: value(i, j) = heights[i * nx + j] at
  /// (origin_x + j*cell, origin_y + i*cell).
  static HeightMap grid(const Eigen::Vector2d& origin, double cell, int nx, int ny,
                        std::vector<double> heights);

  /// Height at (x, y); throws std::out_of_range beyond a grid's bounds.
  double height_at(double x, double y) const;

  /// p_z - m(x, y) - delta, positive when the point clears the surface by more
  /// than the margin.
  double clearance(const Eigen::Vector3d& p, double delta) const;

  /// Differentiable query used inside the solver: grids clamp to their edge
  /// cell instead of throwing. S needs arithmetic and floor-compatible value().
  template <class S>
  S height(const S& x, const S& y) const {
    switch (kind_) {
      case Kind::Flat:
        return S(h0_);
      case Kind::Plane:
        return S(h0_) + S(gx_) * x + S(gy_) * y;
      case Kind::Grid:
      default:
        return bilinear(x, y);
    }
  }

  bool is_grid() const { return kind_ == Kind::Grid; }

 private:
  enum class Kind { Flat, Plane, Grid };
  Kind kind_ = Kind::Flat;
  double h0_ = 0.0, gx_ = 0.0, gy_ = 0.0;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<double> heights_;

  double corner(int i, int j) const { return heights_[i * nx_ + j]; }

  template <class S>
  S bilinear(const S& x, const S& y) const {
    using std::floor;
    const double fx = (value_of(x) - origin_.x()) / cell_;
    const double fy = (value_of(y) - origin_.y()) / cell_;
    const int j = std::clamp(static_cast<int>(floor(fx)), 0, nx_ - 2);
    const int i = std::clamp(static_cast<int>(floor(fy)), 0, ny_ - 2);
    S ax = (x - S(origin_.x() + j * cell_)) * S(1.0 / cell_);
    S ay = (y - S(origin_.y() + i * cell_)) * S(1.0 / cell_);
    ax = clamp01(ax);
    ay = clamp01(ay);
    const S one(1.0);
    return (one - ay) * ((one - ax) * S(corner(i, j)) + ax * S(corner(i, j + 1))) +
           ay * ((one - ax) * S(corner(i + 1, j)) + ax * S(corner(i + 1, j + 1)));
  }

  static double value_of(double s) { return s; }
  template <class S>
  static double value_of(const S& s) { return s.value(); }

  static double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }
  template <class S>
  static S clamp01(const S& s) {
    if (s.value() < 0.0) return S(0.0);
    if (s.value() > 1.0) return S(1.0);
    return s;
  }
};

}  // namespace armada
