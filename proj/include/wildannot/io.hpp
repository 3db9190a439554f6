#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "wildannot/camera.hpp"
#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"

namespace wildannot {

namespace fs = std::filesystem;

// Integer nanoseconds used in output file names.
std::int64_t to_nanoseconds(double seconds);

// CSV with header `timestamp,x,y,z,qx,qy,qz,qw`.
Trajectory read_trajectory_csv(const fs::path& path);
void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory);

// JSON {fx, fy, cx, cy, width, height,
//       extrinsic: {translation: [x,y,z], quaternion_xyzw: [qx,qy,qz,qw]}}
CameraRig camera_rig_from_json(const nlohmann::json& j);
nlohmann::json camera_rig_to_json(const CameraRig& rig);
CameraRig read_camera_rig(const fs::path& path);
void write_camera_rig(const fs::path& path, const CameraRig& rig);

nlohmann::json pose_to_json(const Pose& pose);

// One timestamp (seconds) per line; blank lines, '#' comments, and a
// non-numeric first line are skipped.
std::vector<double> read_timestamps(const fs::path& path);
void write_timestamps(const fs::path& path, std::span<const double> timestamps);

// PLY vertex element with x, y, z and the optional properties `timestamp`
// and `ox, oy, oz` (observation origin). ASCII and binary_little_endian.
PointCloudMap read_ply_map(const fs::path& path);
// Binary little-endian: float64 x,y,z [+ float64 timestamp] [+ float32 ox,oy,oz].
void write_ply_map(const fs::path& path, const PointCloudMap& map);
// Binary little-endian, float32 x,y,z.
void write_ply_points_f32(const fs::path& path, std::span<const Eigen::Vector3d> points);

void write_text_file(const fs::path& path, const std::string& content);
std::string read_text_file(const fs::path& path);
void write_binary_file(const fs::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_binary_file(const fs::path& path);

}  // namespace wildannot
