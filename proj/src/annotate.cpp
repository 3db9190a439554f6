#include "wildannot/annotate.hpp"

#include <optional>
#include <sstream>

#include "wildannot/error.hpp"
#include "wildannot/io.hpp"
#include "wildannot/logging.hpp"
#include "wildannot/parallel.hpp"
#include "wildannot/render.hpp"

namespace wildannot {
namespace {

nlohmann::json counts_json(const StageCounts& c) {
  return {{"candidates", c.candidates},
          {"after_frustum", c.after_frustum},
          {"after_backface", c.after_backface},
          {"after_ghpr", c.after_ghpr}};
}

void accumulate(StageCounts& total, const StageCounts& c) {
  total.candidates += c.candidates;
  total.after_frustum += c.after_frustum;
  total.after_backface += c.after_backface;
  total.after_ghpr += c.after_ghpr;
}

struct FrameResult {
  std::optional<FrameRecord> record;
  std::string skip_reason;
};

}  // namespace

nlohmann::json AnnotationIndex::to_json() const {
  nlohmann::json j;
  j["sequence"] = sequence;
  j["frames"] = nlohmann::json::array();
  for (const FrameRecord& f : frames) {
    j["frames"].push_back({{"timestamp", f.timestamp},
                           {"timestamp_ns", f.timestamp_ns},
                           {"depth", f.depth_path},
                           {"normal", f.normal_path},
                           {"pose", pose_to_json(f.camera_pose)},
                           {"stage_counts", counts_json(f.stage_counts)},
                           {"valid_pixels", f.valid_pixels}});
  }
  j["skipped"] = nlohmann::json::array();
  for (const SkippedFrame& s : skipped) {
    j["skipped"].push_back({{"timestamp", s.timestamp}, {"reason", s.reason}});
  }
  j["totals"] = counts_json(totals);
  return j;
}

AnnotationIndex annotate_sequence(const PointCloudMap& map, const NormalEstimate& normals,
                                  const Trajectory& trajectory, const CameraRig& rig,
                                  std::span<const double> frame_timestamps,
                                  const std::string& sequence, const std::filesystem::path& out_dir,
                                  const AnnotateConfig& config) {
  rig.validate();
  config.ghpr.validate();
  if (normals.size() != map.size()) {
    throw LengthMismatch("normals cover " + std::to_string(normals.size()) + " points, map has " +
                         std::to_string(map.size()));
  }
  const std::filesystem::path seq_dir = out_dir / sequence;
  try {
    std::filesystem::create_directories(seq_dir);
    if (!frame_timestamps.empty()) {
      std::filesystem::create_directories(seq_dir / "depth");
      std::filesystem::create_directories(seq_dir / "normal");
      if (config.debug_dump) std::filesystem::create_directories(seq_dir / "debug");
    }
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(e.what());
  }

  std::vector<FrameResult> results(frame_timestamps.size());
  ExceptionSink sink;
  const auto n = static_cast<std::int64_t>(frame_timestamps.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t f = 0; f < n; ++f) {
    sink.run([&] {
      const double t = frame_timestamps[static_cast<std::size_t>(f)];
      FrameResult& result = results[static_cast<std::size_t>(f)];
      Pose camera_pose;
      try {
        camera_pose = rig.camera_pose(interpolate_pose(trajectory, t));
      } catch (const OutOfRange& e) {
        result.skip_reason = std::string("out of trajectory range: ") + e.what();
        return;
      } catch (const DegenerateBracket& e) {
        result.skip_reason = std::string("degenerate bracket: ") + e.what();
        return;
      }
      std::vector<DropStage> stages;
      const VisibleSet vis = visible_points(map, normals, camera_pose, rig, config.ghpr,
                                            config.debug_dump ? &stages : nullptr);
      const RenderedFrame frame = render_frame(map, normals, camera_pose, rig, vis);
      std::vector<std::uint8_t> depth_png;
      try {
        depth_png = encode_depth(frame.depth);
      } catch (const RangeError& e) {
        result.skip_reason = std::string("depth out of range: ") + e.what();
        return;
      }
      const std::vector<std::uint8_t> normal_png = encode_normals(frame.normal);

      FrameRecord rec;
      rec.timestamp = t;
      rec.timestamp_ns = to_nanoseconds(t);
      rec.depth_path = "depth/" + std::to_string(rec.timestamp_ns) + ".png";
      rec.normal_path = "normal/" + std::to_string(rec.timestamp_ns) + ".png";
      rec.camera_pose = camera_pose;
      rec.stage_counts = vis.stage_counts;
      rec.valid_pixels = frame.depth.valid_count();
      write_binary_file(seq_dir / rec.depth_path, depth_png);
      write_binary_file(seq_dir / rec.normal_path, normal_png);
      if (config.debug_dump) {
        std::ostringstream csv;
        csv << "index,stage_dropped\n";
        for (std::size_t i = 0; i < stages.size(); ++i) {
          csv << i << ',' << drop_stage_name(stages[i]) << '\n';
        }
        write_text_file(seq_dir / "debug" / (std::to_string(rec.timestamp_ns) + ".csv"), csv.str());
      }
      result.record = std::move(rec);
    });
  }
  sink.rethrow();

  AnnotationIndex index;
  index.sequence = sequence;
  for (std::size_t f = 0; f < results.size(); ++f) {
    if (results[f].record) {
      accumulate(index.totals, results[f].record->stage_counts);
      index.frames.push_back(std::move(*results[f].record));
    } else {
      log_warning(sequence + ": skipping frame at t=" + std::to_string(frame_timestamps[f]) +
                  " (" + results[f].skip_reason + ")");
      index.skipped.push_back({frame_timestamps[f], results[f].skip_reason});
    }
  }
  write_text_file(seq_dir / "frames.json", index.to_json().dump(2) + "\n");
  return index;
}

}  // namespace wildannot
