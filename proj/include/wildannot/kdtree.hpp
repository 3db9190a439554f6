#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace wildannot {

using PointIndex = std::uint32_t;

// Static 3-d tree over a point array. Radius queries are exact: a point is
// reported iff (p - center).squaredNorm() <= radius^2, evaluated the same way
// a linear scan would evaluate it.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Eigen::Vector3d> points, int leaf_size = 16);

  std::size_t size() const { return order_.size(); }

  // Ascending indices of all points within `radius` (inclusive).
  std::vector<PointIndex> radius_search(const Eigen::Vector3d& center, double radius) const;

  // Calls fn(index, squared_distance) for every point within `radius`, in
  // tree order (not sorted).
  template <class Fn>
  void for_each_in_radius(const Eigen::Vector3d& center, double radius, Fn&& fn) const;

 private:
  struct Node {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
    std::uint32_t begin = 0;  // range into order_/points_
    std::uint32_t end = 0;
    std::int32_t left = -1;   // -1 marks a leaf
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int leaf_size);

  std::vector<Node> nodes_;
  std::vector<PointIndex> order_;        // tree slot -> original index
  std::vector<Eigen::Vector3d> points_;  // points in tree order
};

template <class Fn>
void KdTree::for_each_in_radius(const Eigen::Vector3d& center, double radius, Fn&& fn) const {
  if (nodes_.empty() || !(radius >= 0.0)) return;
  const double r2 = radius * radius;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    const Eigen::Vector3d near = center.cwiseMax(node.lo).cwiseMin(node.hi);
    if ((near - center).squaredNorm() > r2) continue;
    const Eigen::Vector3d far_corner =
        ((node.lo - center).cwiseAbs()).cwiseMax((node.hi - center).cwiseAbs());
    const bool contained = far_corner.squaredNorm() <= r2;
    if (node.left < 0 || contained) {
      for (std::uint32_t s = node.begin; s < node.end; ++s) {
        const double d2 = (points_[s] - center).squaredNorm();
        if (d2 <= r2) fn(order_[s], d2);
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
}

}  // namespace wildannot
