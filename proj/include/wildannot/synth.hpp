#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "wildannot/camera.hpp"
#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"

namespace wildannot {

// A generated point cloud with its analytic ground truth. Regenerating from
// the same spec and seed yields a bit-identical scene.
struct SyntheticScene {
  std::string kind;
  nlohmann::json generator;  // spec fields and seed
  PointCloudMap map;
  std::vector<Eigen::Vector3d> true_normals;
  // Wall scene: 1 marks points placed behind the wall. Forest: 1 marks trunks.
  std::vector<std::uint8_t> labels;
  double spacing = 0.0;  // nominal point spacing, the default surfel radius
};

struct PlaneSpec {
  double extent = 10.0;  // side length, centered on the origin
  double spacing = 0.1;
  double height = 0.0;
  double duration = 10.0;  // point timestamps span [0, duration]
};

struct SphereSpec {
  double radius = 5.0;
  std::size_t count = 10000;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double duration = 10.0;
};

// Wall facing a camera at the origin that looks down +z, with hidden points
// placed behind it along camera rays.
struct WallSpec {
  double distance = 5.0;
  double spacing = 0.05;
  double half_width = 5.5;
  double half_height = 4.25;
  double hidden_distance = 8.0;
  std::size_t hidden_count = 100;
  double duration = 10.0;
};

// Ground grid plus vertical point-sampled cylinders. The corridor |y| <=
// corridor_half_width is kept free of trunks for a camera path along +x.
struct ForestSpec {
  double half_extent = 25.0;
  double ground_spacing = 0.1;
  double ground_jitter = 0.25;  // fraction of the spacing
  std::size_t trunk_count = 50;
  double trunk_radius_min = 0.15;
  double trunk_radius_max = 0.4;
  double trunk_height = 8.0;
  double trunk_spacing = 0.05;
  double corridor_half_width = 2.0;
  double duration = 10.0;
  double observer_offset = 2.0;  // origin = p + offset * normal
};

SyntheticScene gen_plane(const PlaneSpec& spec, std::uint64_t seed = 0);
SyntheticScene gen_sphere(const SphereSpec& spec, std::uint64_t seed = 0);
SyntheticScene gen_wall_occluder(const WallSpec& spec, std::uint64_t seed = 0);
SyntheticScene gen_forest(const ForestSpec& spec, std::uint64_t seed = 0);

// Rig whose optical axis is the sensor +x axis (sensor y left, z up).
CameraRig forward_looking_rig(int width = 640, int height = 480, double focal = 320.0);

// Sensor poses from `start` to `end` at `rate_hz`, heading along the segment.
Trajectory straight_trajectory(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                               double t0, double t1, double rate_hz);

std::vector<double> frame_times(double t0, std::size_t count, double rate_hz);

// A point is visible iff it projects into the image and no other point's disk
// (radius `surfel_radius`, oriented by its true normal) crosses the ray from
// the camera to it at a range below dist - surfel_radius. The depth slack
// keeps neighbors on the same surface from occluding each other.
// Parallel and binned; identical to oracle_visibility_brute_force.
std::vector<std::uint8_t> oracle_visibility(const SyntheticScene& scene, const Pose& camera_pose,
                                            const CameraRig& rig, double surfel_radius);
std::vector<std::uint8_t> oracle_visibility_brute_force(const SyntheticScene& scene,
                                                        const Pose& camera_pose,
                                                        const CameraRig& rig,
                                                        double surfel_radius);

// Writes map.ply, trajectory.csv, rig.json, frames.txt and manifest.json into
// `dir`; returns the manifest path.
std::filesystem::path export_scene(const std::filesystem::path& dir, const std::string& label,
                                   const SyntheticScene& scene, const Trajectory& trajectory,
                                   const CameraRig& rig, const std::vector<double>& frames);

}  // namespace wildannot
