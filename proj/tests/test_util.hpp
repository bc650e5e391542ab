#pragma once

#include "conelab/currents.hpp"
#include "conelab/param_mesh.hpp"

#include <functional>
#include <memory>

namespace conelab::testing {

inline Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

inline Point unit(int dim, int axis) {
  Point p = Point::Zero(dim);
  p[axis] = 1.0;
  return p;
}

/// Embeds a parameter mesh with `map` and returns it as a 2-chain with
/// coefficient `coef` on every triangle.
inline Chain embed(const ParamMesh& m, int dim, const std::function<Point(const Eigen::Vector2d&)>& map,
                   long long coef = 1) {
  ChainBuilder b(dim, 2);
  std::vector<int> ids;
  for (const auto& p : m.points) ids.push_back(b.add_vertex(map(p)));
  for (const auto& t : m.triangles) b.add({ids[t[0]], ids[t[1]], ids[t[2]]}, coef);
  return b.build();
}

/// The coordinate plane spanned by e_0, e_1 in R^dim.
inline std::function<Point(const Eigen::Vector2d&)> flat(int dim) {
  return [dim](const Eigen::Vector2d& q) {
    Point p = Point::Zero(dim);
    p[0] = q.x();
    p[1] = q.y();
    return p;
  };
}

}  // namespace conelab::testing
