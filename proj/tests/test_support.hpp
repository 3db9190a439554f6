#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace wildannot::testing {

Eigen::Quaterniond random_quaternion(std::mt19937_64& rng);
Eigen::Vector3d random_vector(std::mt19937_64& rng, double lo, double hi);

// Angle between unit vectors in degrees.
double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// Fresh empty directory under the system temp dir.
std::filesystem::path make_temp_dir(const std::string& tag);

// FNV-1a over the file bytes; enough to compare reruns.
std::uint64_t file_digest(const std::filesystem::path& path);

}  // namespace wildannot::testing
