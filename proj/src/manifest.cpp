#include "wildannot/manifest.hpp"

#include "wildannot/error.hpp"
#include "wildannot/io.hpp"

namespace wildannot {
namespace {

std::filesystem::path required_path(const nlohmann::json& j, const char* key,
                                    const std::filesystem::path& base) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ParseError(std::string("manifest field '") + key + "' missing or not a string");
  }
  const std::filesystem::path p = j[key].get<std::string>();
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

SequenceManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError("manifest must be a JSON object");
  SequenceManifest m;
  try {
    if (!j.contains("sequence_label") || !j["sequence_label"].is_string()) {
      throw ParseError("manifest field 'sequence_label' missing or not a string");
    }
    m.sequence_label = j["sequence_label"].get<std::string>();
    m.trajectory_path = required_path(j, "trajectory_path", base_dir);
    m.point_cloud_path = required_path(j, "point_cloud_path", base_dir);
    m.camera_rig_path = required_path(j, "camera_rig_path", base_dir);
    m.frame_timestamps_path = required_path(j, "frame_timestamps_path", base_dir);
    if (j.contains("normals_cache_path")) {
      m.normals_cache_path = required_path(j, "normals_cache_path", base_dir);
    }
    if (j.contains("declared_stats") && !j["declared_stats"].is_null()) {
      const auto& s = j["declared_stats"];
      DeclaredStats stats;
      if (s.contains("distance_km")) stats.distance_km = s["distance_km"].get<double>();
      if (s.contains("image_count")) stats.image_count = s["image_count"].get<std::size_t>();
      if (s.contains("submap_count")) stats.submap_count = s["submap_count"].get<std::size_t>();
      m.declared_stats = stats;
    }
    if (j.contains("config")) {
      if (!j["config"].is_object()) throw ParseError("manifest field 'config' must be an object");
      m.config = j["config"];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

nlohmann::json manifest_to_json(const SequenceManifest& m) {
  nlohmann::json j;
  j["sequence_label"] = m.sequence_label;
  j["trajectory_path"] = m.trajectory_path.string();
  j["point_cloud_path"] = m.point_cloud_path.string();
  j["camera_rig_path"] = m.camera_rig_path.string();
  j["frame_timestamps_path"] = m.frame_timestamps_path.string();
  if (m.normals_cache_path) j["normals_cache_path"] = m.normals_cache_path->string();
  if (m.declared_stats) {
    nlohmann::json s = nlohmann::json::object();
    if (m.declared_stats->distance_km) s["distance_km"] = *m.declared_stats->distance_km;
    if (m.declared_stats->image_count) s["image_count"] = *m.declared_stats->image_count;
    if (m.declared_stats->submap_count) s["submap_count"] = *m.declared_stats->submap_count;
    j["declared_stats"] = s;
  }
  if (!m.config.empty()) j["config"] = m.config;
  return j;
}

SequenceManifest read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw InvalidArgument("manifest not found: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  SequenceManifest m = manifest_from_json(j, path.parent_path());
  for (const auto* p : {&m.trajectory_path, &m.point_cloud_path, &m.camera_rig_path,
                        &m.frame_timestamps_path}) {
    if (!std::filesystem::exists(*p)) {
      throw InvalidArgument("manifest " + path.string() + " references missing file " +
                            p->string());
    }
  }
  return m;
}

}  // namespace wildannot
