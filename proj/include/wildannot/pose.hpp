#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace wildannot {

// Rigid transform from a local frame into its parent (world) frame:
//   p_parent = rotation * p_local + translation.
// The quaternion is renormalized on every construction.
class Pose {
 public:
  Pose();
  Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation,
       double timestamp = 0.0);

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  double timestamp() const { return timestamp_; }

  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }

  // local -> parent
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }
  // parent -> local, i.e. R^-1 (p - x)
  Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const {
    return rotation_.conjugate() * (p - translation_);
  }

  Pose inverse() const;
  // (a * b).apply(p) == a.apply(b.apply(p)); keeps this pose's timestamp.
  Pose operator*(const Pose& other) const;

  Pose with_timestamp(double t) const { return Pose(rotation_, translation_, t); }

 private:
  Eigen::Quaterniond rotation_;
  Eigen::Vector3d translation_;
  double timestamp_ = 0.0;
};

// Angle of the relative rotation between two unit quaternions, in [0, pi].
double quaternion_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

// Shortest-arc spherical linear interpolation. Falls back to normalized
// linear interpolation when the quaternions are within 1e-6 rad.
Eigen::Quaterniond slerp(const Eigen::Quaterniond& q1, const Eigen::Quaterniond& q2,
                         double u);

class Trajectory {
 public:
  Trajectory() = default;
  // Throws InvalidArgument unless timestamps are strictly increasing.
  explicit Trajectory(std::vector<Pose> poses, std::string frame_id = "world");

  const std::vector<Pose>& poses() const { return poses_; }
  const std::string& frame_id() const { return frame_id_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  double t_first() const;
  double t_last() const;

  // Pose whose timestamp is closest to t (earlier pose wins ties).
  const Pose& nearest(double t) const;

 private:
  std::vector<Pose> poses_;
  std::string frame_id_ = "world";
};

// Interpolates between the bracketing poses a (t1) and b (t2):
// translation (1-u) x1 + u x2, rotation slerp(q1, q2, u), u = (t - t1)/(t2 - t1).
// Throws DegenerateBracket if t2 == t1.
Pose interpolate_between(const Pose& a, const Pose& b, double t);

// Throws OutOfRange if t lies outside [t_first, t_last] (or the trajectory has
// fewer than two poses).
Pose interpolate_pose(const Trajectory& trajectory, double t);

// Maps world points into the pose frame: p' = R^-1 (p - x).
// Throws InvalidArgument on non-finite input.
std::vector<Eigen::Vector3d> transform_points(std::span<const Eigen::Vector3d> points,
                                              const Pose& pose);

}  // namespace wildannot
