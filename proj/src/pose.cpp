#include "wildannot/pose.hpp"

#include <algorithm>
#include <cmath>

#include "wildannot/error.hpp"

namespace wildannot {
namespace {

constexpr double kNlerpAngle = 1e-6;

Eigen::Quaterniond normalized_or_throw(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw InvalidArgument("quaternion must be finite and non-zero");
  }
  return Eigen::Quaterniond(q.coeffs() / n);
}

}  // namespace

Pose::Pose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Eigen::Vector3d::Zero()) {}

Pose::Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation,
           double timestamp)
    : rotation_(normalized_or_throw(rotation)),
      translation_(translation),
      timestamp_(timestamp) {
  if (!translation_.allFinite()) throw InvalidArgument("pose translation must be finite");
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return Pose(inv, -(inv * translation_), timestamp_);
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_,
              timestamp_);
}

double quaternion_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const Eigen::Quaterniond rel = a.conjugate() * b;
  const double vec = rel.vec().norm();
  return 2.0 * std::atan2(vec, std::abs(rel.w()));
}

Eigen::Quaterniond slerp(const Eigen::Quaterniond& q1, const Eigen::Quaterniond& q2,
                         double u) {
  Eigen::Vector4d a = q1.coeffs();
  Eigen::Vector4d b = q2.coeffs();
  double d = a.dot(b);
  if (d < 0.0) {
    b = -b;
    d = -d;
  }
  // Half-angle between the quaternions, computed without acos to stay accurate
  // near d = 1.
  const double sin_half = (b - d * a).norm();
  const double half = std::atan2(sin_half, d);
  Eigen::Vector4d out;
  if (2.0 * half < kNlerpAngle) {
    out = (1.0 - u) * a + u * b;
  } else {
    const double s = std::sin(half);
    out = (std::sin((1.0 - u) * half) / s) * a + (std::sin(u * half) / s) * b;
  }
  out.normalize();
  return Eigen::Quaterniond(out);  // coeffs order is (x, y, z, w)
}

Trajectory::Trajectory(std::vector<Pose> poses, std::string frame_id)
    : poses_(std::move(poses)), frame_id_(std::move(frame_id)) {
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (!(poses_[i].timestamp() > poses_[i - 1].timestamp())) {
      throw InvalidArgument("trajectory timestamps must be strictly increasing (pose " +
                            std::to_string(i) + ")");
    }
  }
}

double Trajectory::t_first() const {
  if (poses_.empty()) throw OutOfRange("empty trajectory");
  return poses_.front().timestamp();
}

double Trajectory::t_last() const {
  if (poses_.empty()) throw OutOfRange("empty trajectory");
  return poses_.back().timestamp();
}

const Pose& Trajectory::nearest(double t) const {
  if (poses_.empty()) throw OutOfRange("empty trajectory");
  auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                             [](const Pose& p, double v) { return p.timestamp() < v; });
  if (it == poses_.begin()) return *it;
  if (it == poses_.end()) return poses_.back();
  const auto prev = it - 1;
  return (t - prev->timestamp() <= it->timestamp() - t) ? *prev : *it;
}

Pose interpolate_between(const Pose& a, const Pose& b, double t) {
  const double t1 = a.timestamp();
  const double t2 = b.timestamp();
  if (t2 == t1) throw DegenerateBracket("interpolation bracket has zero duration");
  const double u = (t - t1) / (t2 - t1);
  if (u == 0.0) return a.with_timestamp(t);
  if (u == 1.0) return b.with_timestamp(t);
  const Eigen::Vector3d x = (1.0 - u) * a.translation() + u * b.translation();
  return Pose(slerp(a.rotation(), b.rotation(), u), x, t);
}

Pose interpolate_pose(const Trajectory& trajectory, double t) {
  const auto& poses = trajectory.poses();
  if (poses.size() < 2) throw OutOfRange("interpolation needs at least two poses");
  if (!(t >= poses.front().timestamp() && t <= poses.back().timestamp())) {
    throw OutOfRange("timestamp " + std::to_string(t) + " outside trajectory span");
  }
  // First pose with timestamp > t; the bracket is (it-1, it).
  auto it = std::upper_bound(poses.begin(), poses.end(), t,
                             [](double v, const Pose& p) { return v < p.timestamp(); });
  if (it == poses.end()) --it;  // t == t_last
  return interpolate_between(*(it - 1), *it, t);
}

std::vector<Eigen::Vector3d> transform_points(std::span<const Eigen::Vector3d> points,
                                              const Pose& pose) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidArgument("non-finite point in transform_points");
    out.push_back(pose.apply_inverse(p));
  }
  return out;
}

}  // namespace wildannot
