#include "wildannot/visibility.hpp"

#include <cmath>

#include "wildannot/convex_hull.hpp"
#include "wildannot/error.hpp"

namespace wildannot {

void GhprConfig::validate() const {
  if (!(gamma < 0.0)) throw InvalidGamma("gamma must be negative, got " + std::to_string(gamma));
  if (!(crop_radius > 0.0)) {
    throw InvalidArgument("crop_radius must be positive, got " + std::to_string(crop_radius));
  }
}

std::string_view drop_stage_name(DropStage stage) {
  switch (stage) {
    case DropStage::kNone: return "none";
    case DropStage::kCrop: return "crop";
    case DropStage::kFrustum: return "frustum";
    case DropStage::kBackface: return "backface";
    case DropStage::kGhpr: return "ghpr";
  }
  return "none";
}

Eigen::Vector3d spherical_reflect(const Eigen::Vector3d& p, double gamma) {
  if (!(gamma < 0.0)) throw InvalidGamma("gamma must be negative, got " + std::to_string(gamma));
  const double d = p.norm();
  if (d == 0.0) return Eigen::Vector3d::Zero();
  return p * (std::pow(d, gamma) / d);
}

std::vector<PointIndex> backface_cull(std::span<const Eigen::Vector3d> points,
                                      const NormalEstimate& normals,
                                      const Eigen::Vector3d& camera_position,
                                      std::span<const PointIndex> candidates) {
  if (normals.normals.size() != points.size() || normals.valid.size() != points.size()) {
    throw LengthMismatch("normals cover " + std::to_string(normals.normals.size()) +
                         " points, expected " + std::to_string(points.size()));
  }
  std::vector<PointIndex> kept;
  kept.reserve(candidates.size());
  for (PointIndex i : candidates) {
    if (i >= points.size()) throw OutOfRange("candidate index out of range");
    // Unoriented normals are flipped toward the camera, so they always pass.
    if (!normals.is_valid(i) || !normals.oriented ||
        normals.normals[i].dot(camera_position - points[i]) > 0.0) {
      kept.push_back(i);
    }
  }
  return kept;
}

std::vector<PointIndex> backface_cull(std::span<const Eigen::Vector3d> points,
                                      const NormalEstimate& normals,
                                      const Eigen::Vector3d& camera_position) {
  std::vector<PointIndex> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<PointIndex>(i);
  return backface_cull(points, normals, camera_position, all);
}

std::vector<PointIndex> ghpr_visible(std::span<const Eigen::Vector3d> points,
                                     const GhprConfig& config) {
  if (!(config.gamma < 0.0)) {
    throw InvalidGamma("gamma must be negative, got " + std::to_string(config.gamma));
  }
  const std::size_t n = points.size();
  std::vector<PointIndex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<PointIndex>(i);
  if (n < 4) return all;

  std::vector<Eigen::Vector3d> reflected;
  reflected.reserve(n + 1);
  double scale = 0.0;
  for (const Eigen::Vector3d& p : points) {
    reflected.push_back(spherical_reflect(p, config.gamma));
    scale = std::max(scale, reflected.back().cwiseAbs().maxCoeff());
  }
  reflected.push_back(Eigen::Vector3d::Zero());

  const ConvexHull hull = convex_hull(reflected, 1e-9 * scale);
  if (hull.degenerate) return all;

  std::vector<PointIndex> visible;
  for (std::size_t i = 0; i < n; ++i) {
    if (hull.on_hull[i]) visible.push_back(static_cast<PointIndex>(i));
  }
  return visible;
}

VisibleSet visible_points(const PointCloudMap& map, const NormalEstimate& normals,
                          const Pose& camera_pose, const CameraRig& rig,
                          const GhprConfig& config, std::vector<DropStage>* drop_stages) {
  config.validate();
  if (normals.size() != map.size() || normals.valid.size() != map.size()) {
    throw LengthMismatch("normals cover " + std::to_string(normals.size()) +
                         " points, map has " + std::to_string(map.size()));
  }
  if (drop_stages) drop_stages->assign(map.size(), DropStage::kCrop);

  VisibleSet out;
  const Eigen::Vector3d cam = camera_pose.translation();
  const std::vector<PointIndex> cropped = map.index().radius_search(cam, config.crop_radius);
  out.stage_counts.candidates = cropped.size();

  std::vector<PointIndex> in_frustum;
  in_frustum.reserve(cropped.size());
  for (PointIndex i : cropped) {
    if (project_point(camera_pose.apply_inverse(map.point(i)), rig).in_image()) {
      in_frustum.push_back(i);
    } else if (drop_stages) {
      (*drop_stages)[i] = DropStage::kFrustum;
    }
  }
  out.stage_counts.after_frustum = in_frustum.size();

  const std::vector<PointIndex> front = backface_cull(map.points(), normals, cam, in_frustum);
  out.stage_counts.after_backface = front.size();
  if (drop_stages) {
    for (PointIndex i : in_frustum) (*drop_stages)[i] = DropStage::kBackface;
  }

  std::vector<Eigen::Vector3d> relative;
  relative.reserve(front.size());
  for (PointIndex i : front) relative.push_back(map.point(i) - cam);
  const std::vector<PointIndex> keep = ghpr_visible(relative, config);

  out.indices.reserve(keep.size());
  for (PointIndex k : keep) out.indices.push_back(front[k]);
  out.stage_counts.after_ghpr = out.indices.size();
  if (drop_stages) {
    for (PointIndex i : front) (*drop_stages)[i] = DropStage::kGhpr;
    for (PointIndex i : out.indices) (*drop_stages)[i] = DropStage::kNone;
  }
  return out;
}

}  // namespace wildannot
