#pragma once

#include <Eigen/Core>

#include "wildannot/pose.hpp"

namespace wildannot {

// Points at or closer than this (camera-frame z, meters) count as behind the camera.
inline constexpr double kMinDepth = 1e-3;

// Pinhole camera on rectified images. `extrinsic` maps sensor (lidar/SLAM
// body) coordinates into camera coordinates: p_cam = extrinsic.apply(p_sensor).
struct CameraRig {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Pose extrinsic;

  // Throws InvalidArgument unless fx, fy > 0, 0 < cx < width, 0 < cy < height.
  void validate() const;

  // Camera-to-world pose for a sensor-to-world pose.
  Pose camera_pose(const Pose& sensor_pose) const;
};

enum class ProjectionStatus { kInImage, kBehind, kOutOfBounds };

struct Projection {
  ProjectionStatus status = ProjectionStatus::kBehind;
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;

  bool in_image() const { return status == ProjectionStatus::kInImage; }
};

Projection project_point(const Eigen::Vector3d& p_cam, const CameraRig& rig);

// Inverse of projection for a continuous pixel coordinate and z-depth.
Eigen::Vector3d unproject(double u, double v, double depth, const CameraRig& rig);

}  // namespace wildannot
