#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace wildannot {

struct DeclaredStats {
  std::optional<double> distance_km;
  std::optional<std::size_t> image_count;
  std::optional<std::size_t> submap_count;
};

// Per-sequence inputs. Relative paths in the JSON file resolve against the
// directory containing it.
struct SequenceManifest {
  std::string sequence_label;
  std::filesystem::path trajectory_path;
  std::filesystem::path point_cloud_path;
  std::filesystem::path camera_rig_path;
  std::filesystem::path frame_timestamps_path;
  std::optional<std::filesystem::path> normals_cache_path;
  std::optional<DeclaredStats> declared_stats;
  // Optional overrides of built-in defaults (e.g. "gamma", "submap_radius").
  nlohmann::json config = nlohmann::json::object();
};

// Throws ParseError on schema violations.
SequenceManifest manifest_from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
nlohmann::json manifest_to_json(const SequenceManifest& manifest);

// Parses the file and checks that every referenced input exists. Throws
// ParseError on malformed content and InvalidArgument naming the first
// missing path.
SequenceManifest read_manifest(const std::filesystem::path& path);

}  // namespace wildannot
