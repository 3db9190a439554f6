#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wildannot/camera.hpp"
#include "wildannot/normals.hpp"
#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"
#include "wildannot/visibility.hpp"

namespace wildannot {

// Semi-dense depth image; depth is camera-frame z in meters, 0 where invalid.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<float> depth;          // row-major
  std::vector<std::uint8_t> valid;   // row-major
  double timestamp = 0.0;
  Pose pose;                         // camera to world

  DepthFrame() = default;
  DepthFrame(int w, int h);
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
  std::size_t valid_count() const;
};

// Unit normals in the camera frame; valid mask matches the paired DepthFrame.
struct NormalFrame {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3f> normal;
  std::vector<std::uint8_t> valid;

  NormalFrame() = default;
  NormalFrame(int w, int h);
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
};

struct RenderedFrame {
  DepthFrame depth;
  NormalFrame normal;
};

// Rasterizes the visible points at floor(u), floor(v) with a z-buffer (the
// nearest point wins; among equal depths the lower map index). Points with an
// invalid normal, and unoriented normals facing away, get a normal pointing
// back to the camera.
RenderedFrame render_frame(const PointCloudMap& map, const NormalEstimate& normals,
                           const Pose& camera_pose, const CameraRig& rig, const VisibleSet& vis);

// 16-bit grayscale PNG, value = round(depth * 256), 0 = invalid. Throws
// RangeError for a valid depth that does not quantize into [1, 65535].
std::vector<std::uint8_t> encode_depth(const DepthFrame& frame);
DepthFrame decode_depth(std::span<const std::uint8_t> png);

// 16-bit RGB PNG, channel = round((n + 1) / 2 * 65535); invalid pixels are 0.
std::vector<std::uint8_t> encode_normals(const NormalFrame& frame);
NormalFrame decode_normals(std::span<const std::uint8_t> png);

}  // namespace wildannot
