#pragma once

#include <optional>
#include <vector>

#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"

namespace wildannot {

struct SubmapSpec {
  double radius = 30.0;
  // Total window width in seconds, centered on the query time (+/- window/2).
  // nullopt disables time filtering.
  std::optional<double> time_window = 1.0;
  double stride = 0.5;

  void validate() const;
};

struct Submap {
  Pose center_pose;
  std::vector<Eigen::Vector3d> points;
  std::vector<PointIndex> source_indices;  // ascending
};

// Points with |p - x| <= radius and, when time filtering is enabled,
// |t_p - t_pose| <= window/2. Throws MissingTimestamps when a window is
// requested on a map without timestamps.
Submap extract_submap(const PointCloudMap& map, const Pose& pose, const SubmapSpec& spec);

// Linear-scan reference with the same inclusion rule.
Submap extract_submap_linear(const PointCloudMap& map, const Pose& pose, const SubmapSpec& spec);

// Center times t_first, t_first + stride, ... <= t_last.
std::vector<double> submap_center_times(const Trajectory& trajectory, double stride);

// One submap per center time, extracted in parallel.
std::vector<Submap> extract_submap_sequence(const PointCloudMap& map, const Trajectory& trajectory,
                                            const SubmapSpec& spec);

}  // namespace wildannot
