#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wildannot/error.hpp"
#include "wildannot/io.hpp"
#include "wildannot/manifest.hpp"

namespace wildannot {
namespace {

nlohmann::json minimal() {
  return {{"sequence_label", "V-01"},
          {"trajectory_path", "traj.csv"},
          {"point_cloud_path", "map.ply"},
          {"camera_rig_path", "rig.json"},
          {"frame_timestamps_path", "frames.txt"}};
}

TEST(Manifest, RelativePathsResolveAgainstBase) {
  const SequenceManifest m = manifest_from_json(minimal(), "/data/seq");
  EXPECT_EQ(m.sequence_label, "V-01");
  EXPECT_EQ(m.trajectory_path, "/data/seq/traj.csv");
  EXPECT_FALSE(m.declared_stats.has_value());
  EXPECT_FALSE(m.normals_cache_path.has_value());
  nlohmann::json j = minimal();
  j["point_cloud_path"] = "/abs/map.ply";
  EXPECT_EQ(manifest_from_json(j, "/data/seq").point_cloud_path, "/abs/map.ply");
}

TEST(Manifest, RoundTrip) {
  nlohmann::json j = minimal();
  j["declared_stats"] = {{"distance_km", 3.2}, {"image_count", 35300}, {"submap_count", 12}};
  j["config"] = {{"gamma", -0.001}};
  j["normals_cache_path"] = "normals.bin";
  const SequenceManifest m = manifest_from_json(j);
  EXPECT_EQ(*m.declared_stats->image_count, 35300u);
  EXPECT_DOUBLE_EQ(*m.declared_stats->distance_km, 3.2);
  EXPECT_EQ(m.config["gamma"], -0.001);
  EXPECT_EQ(manifest_to_json(m), j);
}

TEST(Manifest, SchemaErrors) {
  for (const char* key : {"sequence_label", "trajectory_path", "point_cloud_path", "camera_rig_path",
                          "frame_timestamps_path"}) {
    nlohmann::json j = minimal();
    j.erase(key);
    try {
      manifest_from_json(j);
      FAIL() << key;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
    }
  }
  nlohmann::json j = minimal();
  j["config"] = 3;
  EXPECT_THROW(manifest_from_json(j), ParseError);
  j = minimal();
  j["declared_stats"] = {{"image_count", "many"}};
  EXPECT_THROW(manifest_from_json(j), ParseError);
  EXPECT_THROW(manifest_from_json(nlohmann::json::array()), ParseError);
}

TEST(Manifest, ReadChecksReferencedFiles) {
  const auto dir = testing::make_temp_dir("manifest");
  write_text_file(dir / "manifest.json", minimal().dump());
  for (const char* f : {"traj.csv", "map.ply", "rig.json"}) write_text_file(dir / f, "");
  try {
    read_manifest(dir / "manifest.json");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find((dir / "frames.txt").string()), std::string::npos);
  }
  write_text_file(dir / "frames.txt", "");
  EXPECT_EQ(read_manifest(dir / "manifest.json").frame_timestamps_path, dir / "frames.txt");
  write_text_file(dir / "broken.json", "{");
  EXPECT_THROW(read_manifest(dir / "broken.json"), ParseError);
  EXPECT_THROW(read_manifest(dir / "absent.json"), InvalidArgument);
}

}  // namespace
}  // namespace wildannot
