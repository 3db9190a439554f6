#include "wildannot/camera.hpp"

#include "wildannot/error.hpp"

namespace wildannot {

void CameraRig::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw InvalidArgument("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidArgument("camera image size must be positive");
  if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height)) {
    throw InvalidArgument("camera principal point must lie inside the image");
  }
}

Pose CameraRig::camera_pose(const Pose& sensor_pose) const {
  return (sensor_pose * extrinsic.inverse()).with_timestamp(sensor_pose.timestamp());
}

Projection project_point(const Eigen::Vector3d& p_cam, const CameraRig& rig) {
  Projection out;
  out.depth = p_cam.z();
  if (!(p_cam.z() > kMinDepth)) {
    out.status = ProjectionStatus::kBehind;
    return out;
  }
  out.u = rig.fx * p_cam.x() / p_cam.z() + rig.cx;
  out.v = rig.fy * p_cam.y() / p_cam.z() + rig.cy;
  const bool inside = out.u >= 0.0 && out.u < rig.width && out.v >= 0.0 && out.v < rig.height;
  out.status = inside ? ProjectionStatus::kInImage : ProjectionStatus::kOutOfBounds;
  return out;
}

Eigen::Vector3d unproject(double u, double v, double depth, const CameraRig& rig) {
  return {(u - rig.cx) / rig.fx * depth, (v - rig.cy) / rig.fy * depth, depth};
}

}  // namespace wildannot
