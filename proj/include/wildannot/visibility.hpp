#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wildannot/camera.hpp"
#include "wildannot/kdtree.hpp"
#include "wildannot/normals.hpp"
#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"

namespace wildannot {

struct GhprConfig {
  // Kernel exponent of the spherical reflection d -> d^gamma; must be < 0.
  double gamma = -2e-4;
  // Working-set radius around the camera, meters.
  double crop_radius = 60.0;

  void validate() const;
};

struct StageCounts {
  std::size_t candidates = 0;  // inside the crop radius
  std::size_t after_frustum = 0;
  std::size_t after_backface = 0;
  std::size_t after_ghpr = 0;
};

struct VisibleSet {
  std::vector<PointIndex> indices;  // ascending map indices
  StageCounts stage_counts;
};

enum class DropStage : std::uint8_t { kNone, kCrop, kFrustum, kBackface, kGhpr };

std::string_view drop_stage_name(DropStage stage);

// p * |p|^(gamma - 1); the origin maps to itself. Throws InvalidGamma unless
// gamma < 0.
Eigen::Vector3d spherical_reflect(const Eigen::Vector3d& p, double gamma);

// Indices i (ascending) with an invalid normal or normal_i . (camera - p_i) > 0.
// Throws LengthMismatch if the normals do not cover the points.
std::vector<PointIndex> backface_cull(std::span<const Eigen::Vector3d> points,
                                      const NormalEstimate& normals,
                                      const Eigen::Vector3d& camera_position);
// Same test restricted to `candidates`; returns the surviving subset in order.
std::vector<PointIndex> backface_cull(std::span<const Eigen::Vector3d> points,
                                      const NormalEstimate& normals,
                                      const Eigen::Vector3d& camera_position,
                                      std::span<const PointIndex> candidates);

// Hidden point removal for points given relative to the viewpoint. Returns
// ascending indices into `points`. Fewer than four points, or a degenerate
// hull, leaves every point visible.
std::vector<PointIndex> ghpr_visible(std::span<const Eigen::Vector3d> points,
                                     const GhprConfig& config);

// crop -> frustum -> backface -> GHPR for one camera. When `drop_stages` is
// non-null it receives the stage that removed each map point.
VisibleSet visible_points(const PointCloudMap& map, const NormalEstimate& normals,
                          const Pose& camera_pose, const CameraRig& rig,
                          const GhprConfig& config,
                          std::vector<DropStage>* drop_stages = nullptr);

}  // namespace wildannot
