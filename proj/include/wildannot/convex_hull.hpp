#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "wildannot/kdtree.hpp"

namespace wildannot {

struct ConvexHull {
  // Fewer than four points, or all points coplanar: no 3-d hull exists.
  bool degenerate = false;
  // Triangles with outward counter-clockwise winding.
  std::vector<std::array<PointIndex, 3>> facets;
  // Ascending indices of hull vertices.
  std::vector<PointIndex> vertices;
  // Per input point: hull vertex, or within `coplanar_tolerance` of the plane
  // of a hull facet it lies beneath (exact duplicates of vertices included).
  std::vector<std::uint8_t> on_hull;
};

// Quickhull over exact orientation signs (see orient3d).
ConvexHull convex_hull(std::span<const Eigen::Vector3d> points, double coplanar_tolerance = 0.0);

}  // namespace wildannot
