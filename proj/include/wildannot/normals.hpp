#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"

namespace wildannot {

struct NormalOptions {
  double radius = 0.5;
  int min_neighbors = 5;  // excluding the point itself
  // lambda_min / lambda_mid above this marks the neighborhood isotropic.
  double isotropy_ratio = 0.9;
};

struct NormalEstimate {
  std::vector<Eigen::Vector3d> normals;  // world frame
  std::vector<std::uint8_t> valid;
  std::vector<std::uint32_t> neighbor_count;
  // False when no observation location was available; consumers orient the
  // normals toward the viewing camera instead.
  bool oriented = true;

  std::size_t size() const { return normals.size(); }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
};

// Returns `normal` if normal . (obs - p) >= 0, else -normal.
Eigen::Vector3d orient_normal(const Eigen::Vector3d& normal, const Eigen::Vector3d& p,
                              const Eigen::Vector3d& obs);

// Smallest-eigenvalue direction of the covariance of `neighborhood` about its
// mean. nullopt for degenerate (collinear or isotropic) neighborhoods.
std::optional<Eigen::Vector3d> pca_normal(std::span<const Eigen::Vector3d> neighborhood,
                                          double isotropy_ratio = 0.9);

// Observation location per point: the map's origins if present; otherwise the
// trajectory pose nearest to each point timestamp when both are available.
std::optional<std::vector<Eigen::Vector3d>> resolve_observation_origins(
    const PointCloudMap& map, const Trajectory* trajectory);

// Parallel over points.
NormalEstimate estimate_normals(const PointCloudMap& map, const NormalOptions& options = {},
                                const Trajectory* trajectory = nullptr);
// Single-threaded reference; produces identical output.
NormalEstimate estimate_normals_serial(const PointCloudMap& map, const NormalOptions& options = {},
                                       const Trajectory* trajectory = nullptr);

// Cache format: 'WNRM', u32 count, then per point float32 x3 normal + u8 valid.
std::vector<std::uint8_t> encode_normals_cache(const NormalEstimate& normals);
NormalEstimate decode_normals_cache(std::span<const std::uint8_t> bytes);

}  // namespace wildannot
