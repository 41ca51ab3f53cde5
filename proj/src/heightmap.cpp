#include "armada/heightmap.hpp"

namespace armada {

HeightMap HeightMap::flat(double height) {
  HeightMap m;
  m.kind_ = Kind::Flat;
  m.h0_ = height;
  return m;
}

HeightMap HeightMap::plane(double height0, double gx, double gy) {
  HeightMap m;
  m.kind_ = Kind::Plane;
  m.h0_ = height0;
  m.gx_ = gx;
  m.gy_ = gy;
  return m;
}

HeightMap HeightMap::grid(const Eigen::Vector2d& origin, double cell, int nx, int ny,
                          std::vector<double> heights) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("HeightMap: grid needs at least 2x2 nodes");
  if (!(cell > 0.0)) throw std::invalid_argument("HeightMap: cell size must be positive");
  if (static_cast<int>(heights.size()) != nx * ny)
    throw std::invalid_argument("HeightMap: height count does not match grid");
  HeightMap m;
  m.kind_ = Kind::Grid;
  m.origin_ = origin;
  m.cell_ = cell;
  m.nx_ = nx;
  m.ny_ = ny;
  m.heights_ = std::move(heights);
  return m;
}

double HeightMap::height_at(double x, double y) const {
  if (kind_ == Kind::Grid) {
    const double fx = (x - origin_.x()) / cell_;
    const double fy = (y - origin_.y()) / cell_;
    if (fx < -1e-12 || fy < -1e-12 || fx > nx_ - 1 + 1e-12 || fy > ny_ - 1 + 1e-12)
      throw std::out_of_range("HeightMap: query outside grid bounds");
  }
  return height(x, y);
}

double HeightMap::clearance(const Eigen::Vector3d& p, double delta) const {
  return p.z() - height_at(p.x(), p.y()) - delta;
}

}  // namespace armada
