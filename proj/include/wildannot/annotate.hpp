#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wildannot/camera.hpp"
#include "wildannot/normals.hpp"
#include "wildannot/point_cloud.hpp"
#include "wildannot/pose.hpp"
#include "wildannot/visibility.hpp"

namespace wildannot {

struct AnnotateConfig {
  GhprConfig ghpr;
  // Also write <seq>/debug/<ns>.csv with the stage that dropped each point.
  bool debug_dump = false;
};

struct FrameRecord {
  double timestamp = 0.0;
  std::int64_t timestamp_ns = 0;
  std::string depth_path;   // relative to the sequence directory
  std::string normal_path;
  Pose camera_pose;
  StageCounts stage_counts;
  std::size_t valid_pixels = 0;
};

struct SkippedFrame {
  double timestamp = 0.0;
  std::string reason;
};

struct AnnotationIndex {
  std::string sequence;
  std::vector<FrameRecord> frames;     // in input order
  std::vector<SkippedFrame> skipped;
  StageCounts totals;

  nlohmann::json to_json() const;
};

// Renders and writes every frame to <out_dir>/<sequence>/{depth,normal}/<ns>.png
// plus <out_dir>/<sequence>/frames.json. Frames outside the trajectory or with
// unencodable depths are skipped with a warning; IO errors propagate.
// Frames run in parallel; output is independent of the worker count.
AnnotationIndex annotate_sequence(const PointCloudMap& map, const NormalEstimate& normals,
                                  const Trajectory& trajectory, const CameraRig& rig,
                                  std::span<const double> frame_timestamps,
                                  const std::string& sequence, const std::filesystem::path& out_dir,
                                  const AnnotateConfig& config = {});

}  // namespace wildannot
