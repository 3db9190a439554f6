#include "wildannot/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "wildannot/error.hpp"

namespace wildannot {

KdTree::KdTree(std::span<const Eigen::Vector3d> points, int leaf_size) {
  if (points.size() >= std::numeric_limits<PointIndex>::max()) {
    throw InvalidArgument("too many points for a 32-bit index");
  }
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), PointIndex{0});
  points_.assign(points.begin(), points.end());
  if (points.empty()) return;
  nodes_.reserve(2 * points.size() / static_cast<std::size_t>(std::max(1, leaf_size)) + 1);
  build(0, static_cast<std::uint32_t>(points.size()), std::max(1, leaf_size));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int leaf_size) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::Vector3d lo = points_[begin];
  Eigen::Vector3d hi = lo;
  for (std::uint32_t s = begin + 1; s < end; ++s) {
    lo = lo.cwiseMin(points_[s]);
    hi = hi.cwiseMax(points_[s]);
  }
  {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.lo = lo;
    node.hi = hi;
    node.begin = begin;
    node.end = end;
  }
  if (end - begin <= static_cast<std::uint32_t>(leaf_size)) return id;

  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  const std::uint32_t mid = begin + (end - begin) / 2;
  // Sort a slot permutation so points_ and order_ move together.
  std::vector<std::uint32_t> slots(end - begin);
  std::iota(slots.begin(), slots.end(), begin);
  std::nth_element(slots.begin(), slots.begin() + (mid - begin), slots.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][dim];
                     const double pb = points_[b][dim];
                     return pa < pb || (pa == pb && order_[a] < order_[b]);
                   });
  std::vector<Eigen::Vector3d> pts(slots.size());
  std::vector<PointIndex> ord(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    pts[i] = points_[slots[i]];
    ord[i] = order_[slots[i]];
  }
  std::copy(pts.begin(), pts.end(), points_.begin() + begin);
  std::copy(ord.begin(), ord.end(), order_.begin() + begin);

  const std::int32_t left = build(begin, mid, leaf_size);
  const std::int32_t right = build(mid, end, leaf_size);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<PointIndex> KdTree::radius_search(const Eigen::Vector3d& center,
                                              double radius) const {
  std::vector<PointIndex> out;
  for_each_in_radius(center, radius, [&](PointIndex i, double) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wildannot
