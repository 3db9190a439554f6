#include "wildannot/point_cloud.hpp"

#include <cmath>

#include "wildannot/error.hpp"

namespace wildannot {

PointCloudMap::PointCloudMap(std::vector<Eigen::Vector3d> points,
                             std::optional<std::vector<double>> timestamps,
                             std::optional<std::vector<Eigen::Vector3d>> observation_origins)
    : points_(std::move(points)),
      timestamps_(std::move(timestamps)),
      origins_(std::move(observation_origins)) {
  for (const auto& p : points_) {
    if (!p.allFinite()) throw InvalidArgument("point cloud contains non-finite coordinates");
  }
  if (timestamps_ && timestamps_->size() != points_.size()) {
    throw InvalidArgument("point timestamps length differs from point count");
  }
  if (origins_) {
    if (origins_->size() != points_.size()) {
      throw InvalidArgument("observation origins length differs from point count");
    }
    for (const auto& o : *origins_) {
      if (!o.allFinite()) throw InvalidArgument("non-finite observation origin");
    }
  }
  index_ = std::make_shared<const KdTree>(points_);
}

}  // namespace wildannot
