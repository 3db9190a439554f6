#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wildannot/error.hpp"
#include "wildannot/normals.hpp"
#include "wildannot/synth.hpp"
#include "wildannot/visibility.hpp"

namespace wildannot {
namespace {

CameraRig SmallRig() {
  CameraRig rig;
  rig.fx = rig.fy = 100.0;
  rig.cx = rig.cy = 50.0;
  rig.width = rig.height = 100;
  return rig;
}

NormalEstimate FromNormals(const std::vector<Eigen::Vector3d>& n) {
  NormalEstimate est;
  est.normals = n;
  est.valid.assign(n.size(), 1);
  est.neighbor_count.assign(n.size(), 10);
  return est;
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision() const { return tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn); }
};

TEST(SphericalReflect, Examples) {
  const Eigen::Vector3d u = Eigen::Vector3d(1, 2, -2).normalized();
  EXPECT_LT((spherical_reflect(u, -0.3) - u).norm(), 1e-15);
  EXPECT_LT((spherical_reflect({2, 0, 0}, -1.0) - Eigen::Vector3d(0.5, 0, 0)).norm(), 1e-15);
  EXPECT_EQ(spherical_reflect(Eigen::Vector3d::Zero(), -0.01), Eigen::Vector3d::Zero());
  EXPECT_THROW(spherical_reflect(u, 0.0), InvalidGamma);
  EXPECT_THROW(spherical_reflect(u, 0.5), InvalidGamma);
}

// Properties: direction preserved, distance d^gamma, involution at gamma = -1.
TEST(SphericalReflect, Properties) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> gamma(-1.0, -1e-4);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p = testing::random_vector(rng, -60, 60);
    const double g = gamma(rng);
    const Eigen::Vector3d f = spherical_reflect(p, g);
    EXPECT_LT(p.normalized().cross(f.normalized()).norm(), 1e-9);
    EXPECT_GT(p.dot(f), 0.0);
    EXPECT_NEAR(f.norm(), std::pow(p.norm(), g), 1e-12);
    EXPECT_NEAR(spherical_reflect(spherical_reflect(p, -1.0), -1.0).norm(), p.norm(), 1e-9);
  }
}

TEST(GhprConfig, Validation) {
  EXPECT_NO_THROW(GhprConfig{}.validate());
  EXPECT_THROW((GhprConfig{0.0, 60.0}.validate()), InvalidGamma);
  EXPECT_THROW((GhprConfig{-0.01, 0.0}.validate()), InvalidArgument);
}

TEST(Backface, PlaneExamples) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(i, -i, 0);
  const NormalEstimate est = FromNormals(std::vector<Eigen::Vector3d>(pts.size(), {0, 0, 1}));
  EXPECT_EQ(backface_cull(pts, est, {0, 0, 5}).size(), pts.size());
  EXPECT_TRUE(backface_cull(pts, est, {0, 0, -5}).empty());
  NormalEstimate partial = est;
  partial.valid[3] = 0;
  EXPECT_EQ(backface_cull(pts, partial, {0, 0, -5}), (std::vector<PointIndex>{3}));
  NormalEstimate short_est = est;
  short_est.normals.pop_back();
  short_est.valid.pop_back();
  EXPECT_THROW(backface_cull(pts, short_est, {0, 0, 5}), LengthMismatch);
}

TEST(Backface, SphereMatchesLinearScan) {
  SphereSpec spec;
  spec.count = 3000;
  const SyntheticScene scene = gen_sphere(spec, 2);
  NormalEstimate est = FromNormals(scene.true_normals);
  std::mt19937_64 rng(62);
  for (std::size_t i = 0; i < est.size(); i += 7) {
    est.normals[i] = testing::random_vector(rng, -1, 1).normalized();
  }
  for (std::size_t i = 0; i < est.size(); i += 13) est.valid[i] = 0;
  const Eigen::Vector3d cam(12, -3, 4);
  std::vector<PointIndex> expected;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (!est.valid[i] || est.normals[i].dot(cam - scene.map.point(i)) > 0) {
      expected.push_back(static_cast<PointIndex>(i));
    }
  }
  EXPECT_EQ(backface_cull(scene.map.points(), est, cam), expected);
  std::vector<PointIndex> odd;
  for (PointIndex i = 1; i < est.size(); i += 2) odd.push_back(i);
  std::vector<PointIndex> expected_odd;
  for (PointIndex i : expected) {
    if (i % 2 == 1) expected_odd.push_back(i);
  }
  EXPECT_EQ(backface_cull(scene.map.points(), est, cam, odd), expected_odd);
}

TEST(Ghpr, DegenerateInputsAreVisible) {
  const GhprConfig cfg;
  EXPECT_EQ(ghpr_visible(std::vector<Eigen::Vector3d>{{0, 0, 5}}, cfg),
            (std::vector<PointIndex>{0}));
  EXPECT_TRUE(ghpr_visible(std::vector<Eigen::Vector3d>{}, cfg).empty());
  // Every point coplanar with the viewpoint.
  std::vector<Eigen::Vector3d> flat;
  for (int i = 0; i < 50; ++i) flat.emplace_back(1 + i, 0.5 * i - 3, 0.0);
  EXPECT_EQ(ghpr_visible(flat, cfg).size(), flat.size());
}

TEST(Ghpr, WallHidesPointsBehindIt) {
  const SyntheticScene scene = gen_wall_occluder({}, 7);
  const auto vis = ghpr_visible(scene.map.points(), GhprConfig{});
  std::vector<std::uint8_t> visible(scene.map.size(), 0);
  for (PointIndex i : vis) visible[i] = 1;
  std::size_t wall = 0, wall_kept = 0, hidden = 0, hidden_removed = 0;
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (scene.labels[i]) {
      ++hidden;
      hidden_removed += visible[i] ? 0 : 1;
    } else {
      ++wall;
      wall_kept += visible[i];
    }
  }
  ASSERT_EQ(hidden, 100u);
  EXPECT_GE(hidden_removed, 99u);
  EXPECT_GE(static_cast<double>(wall_kept), 0.99 * static_cast<double>(wall));
}

TEST(Ghpr, SphereMatchesTangencyCriterion) {
  const SyntheticScene scene = gen_sphere({}, 11);
  const Eigen::Vector3d cam(25, 0, 0), center = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> rel;
  for (const auto& p : scene.map.points()) rel.push_back(p - cam);
  std::vector<std::uint8_t> visible(rel.size(), 0);
  for (PointIndex i : ghpr_visible(rel, GhprConfig{})) visible[i] = 1;
  Confusion c;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    const Eigen::Vector3d& p = scene.map.point(i);
    const bool truth = (p - cam).dot(p - center) < 0;
    if (visible[i] && truth) ++c.tp;
    if (visible[i] && !truth) ++c.fp;
    if (!visible[i] && truth) ++c.fn;
  }
  EXPECT_GE(c.precision(), 0.95);
  EXPECT_GE(c.recall(), 0.95);
}

// Property: of two points on one camera ray, only the nearer can be the
// single visible one.
TEST(Ghpr, MonotoneOcclusion) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> range(1.0, 40.0), frac(0.2, 0.9);
  int decided = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 150; ++i) pts.push_back(testing::random_vector(rng, -30, 30));
    const Eigen::Vector3d dir = testing::random_vector(rng, -1, 1).normalized();
    const double far = range(rng);
    pts.push_back(dir * far * frac(rng));  // near
    pts.push_back(dir * far);              // far
    const auto vis = ghpr_visible(pts, GhprConfig{});
    const bool near_vis = std::binary_search(vis.begin(), vis.end(), PointIndex(150));
    const bool far_vis = std::binary_search(vis.begin(), vis.end(), PointIndex(151));
    if (near_vis != far_vis) {
      ++decided;
      EXPECT_TRUE(near_vis) << "trial " << trial;
    }
  }
  EXPECT_GT(decided, 0);
}

TEST(VisiblePoints, EmptyMap) {
  const VisibleSet v = visible_points(PointCloudMap(), NormalEstimate{}, Pose(), SmallRig(), {});
  EXPECT_TRUE(v.indices.empty());
  EXPECT_EQ(v.stage_counts.candidates, 0u);
  EXPECT_EQ(v.stage_counts.after_ghpr, 0u);
}

TEST(VisiblePoints, SingleOnAxisPoint) {
  const PointCloudMap map({{0, 0, 5}});
  const VisibleSet v = visible_points(map, FromNormals({{0, 0, -1}}), Pose(), SmallRig(), {});
  EXPECT_EQ(v.indices, (std::vector<PointIndex>{0}));
  EXPECT_EQ(v.stage_counts.candidates, 1u);
  EXPECT_EQ(v.stage_counts.after_frustum, 1u);
  EXPECT_EQ(v.stage_counts.after_backface, 1u);
  EXPECT_EQ(v.stage_counts.after_ghpr, 1u);
}

TEST(VisiblePoints, StagesAreMonotoneAndDropStagesConsistent) {
  ForestSpec spec;
  spec.half_extent = 12.0;
  spec.trunk_count = 12;
  const SyntheticScene scene = gen_forest(spec, 9);
  const NormalEstimate normals = estimate_normals(scene.map);
  const CameraRig rig = forward_looking_rig(160, 120, 80);
  const Trajectory traj = straight_trajectory({-4, 0, 1.5}, {4, 0, 1.5}, 0, 4, 10);
  GhprConfig cfg;
  cfg.crop_radius = 10.0;
  for (double t : {0.0, 1.3, 3.9}) {
    const Pose cam = rig.camera_pose(interpolate_pose(traj, t));
    std::vector<DropStage> stages;
    const VisibleSet v = visible_points(scene.map, normals, cam, rig, cfg, &stages);
    const StageCounts& s = v.stage_counts;
    EXPECT_LE(s.candidates, scene.map.size());
    EXPECT_GE(s.candidates, s.after_frustum);
    EXPECT_GE(s.after_frustum, s.after_backface);
    EXPECT_GE(s.after_backface, s.after_ghpr);
    EXPECT_EQ(s.after_ghpr, v.indices.size());
    EXPECT_TRUE(std::is_sorted(v.indices.begin(), v.indices.end()));
    EXPECT_TRUE(std::adjacent_find(v.indices.begin(), v.indices.end()) == v.indices.end());
    std::size_t counts[5] = {};
    for (DropStage d : stages) ++counts[static_cast<int>(d)];
    EXPECT_EQ(counts[0], s.after_ghpr);
    EXPECT_EQ(counts[1], scene.map.size() - s.candidates);
    EXPECT_EQ(counts[2], s.candidates - s.after_frustum);
    EXPECT_EQ(counts[3], s.after_frustum - s.after_backface);
    EXPECT_EQ(counts[4], s.after_backface - s.after_ghpr);
    for (PointIndex i : v.indices) EXPECT_EQ(stages[i], DropStage::kNone);
    // Rerun determinism.
    const VisibleSet again = visible_points(scene.map, normals, cam, rig, cfg);
    EXPECT_EQ(again.indices, v.indices);
  }
  EXPECT_EQ(drop_stage_name(DropStage::kBackface), "backface");
  EXPECT_EQ(drop_stage_name(DropStage::kNone), "none");
}

TEST(VisiblePoints, CropRadiusIsInclusive) {
  const PointCloudMap map({{0, 0, 5}, {0, 0, 5.5}, {0.1, 0.1, 6}});
  GhprConfig cfg;
  cfg.crop_radius = 5.5;
  const VisibleSet v = visible_points(map, FromNormals({{0, 0, -1}, {0, 0, -1}, {0, 0, -1}}),
                                      Pose(), SmallRig(), cfg);
  EXPECT_EQ(v.stage_counts.candidates, 2u);
}

}  // namespace
}  // namespace wildannot
