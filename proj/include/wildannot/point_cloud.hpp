#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "wildannot/kdtree.hpp"

namespace wildannot {

// Accumulated world-frame map. Immutable after construction; the spatial
// index is built once and shared read-only.
class PointCloudMap {
 public:
  PointCloudMap() = default;
  // Throws InvalidArgument on non-finite coordinates or per-point arrays whose
  // length differs from the point count.
  explicit PointCloudMap(std::vector<Eigen::Vector3d> points,
                         std::optional<std::vector<double>> timestamps = std::nullopt,
                         std::optional<std::vector<Eigen::Vector3d>> observation_origins =
                             std::nullopt);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const Eigen::Vector3d& point(std::size_t i) const { return points_[i]; }

  bool has_timestamps() const { return timestamps_.has_value(); }
  const std::vector<double>& timestamps() const { return *timestamps_; }

  bool has_observation_origins() const { return origins_.has_value(); }
  const std::vector<Eigen::Vector3d>& observation_origins() const { return *origins_; }

  const KdTree& index() const { return *index_; }

 private:
  std::vector<Eigen::Vector3d> points_;
  std::optional<std::vector<double>> timestamps_;
  std::optional<std::vector<Eigen::Vector3d>> origins_;
  std::shared_ptr<const KdTree> index_ = std::make_shared<KdTree>();
};

}  // namespace wildannot
