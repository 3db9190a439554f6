#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wildannot/error.hpp"
#include "wildannot/normals.hpp"
#include "wildannot/synth.hpp"

namespace wildannot {
namespace {

using testing::angle_deg;

TEST(OrientNormal, Examples) {
  const Eigen::Vector3d n(0, 0, 1), p = Eigen::Vector3d::Zero();
  EXPECT_EQ(orient_normal(n, p, {0, 0, 5}), n);
  EXPECT_EQ(orient_normal(n, p, {0, 0, -5}), -n);
  EXPECT_EQ(orient_normal(n, p, {3, 0, 0}), n);  // dot = 0 keeps the input
}

TEST(PcaNormal, AnisotropicGaussianMinorAxis) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Matrix3d r = testing::random_quaternion(rng).toRotationMatrix();
    std::vector<Eigen::Vector3d> pts(1000);
    for (auto& p : pts) p = r * Eigen::Vector3d(3.0 * g(rng), 2.0 * g(rng), 0.5 * g(rng));
    const auto n = pca_normal(pts);
    ASSERT_TRUE(n.has_value());
    EXPECT_NEAR(n->norm(), 1.0, 1e-12);
    const double err = std::min(angle_deg(*n, r.col(2)), angle_deg(-*n, r.col(2)));
    EXPECT_LT(err, 2.0);
  }
}

TEST(PcaNormal, DegenerateNeighborhoods) {
  std::vector<Eigen::Vector3d> line;
  for (int i = 0; i < 10; ++i) line.emplace_back(i, 2 * i, 0);
  EXPECT_FALSE(pca_normal(line).has_value());
  std::vector<Eigen::Vector3d> same(10, Eigen::Vector3d(1, 1, 1));
  EXPECT_FALSE(pca_normal(same).has_value());
  // Corners of a cube are isotropic.
  std::vector<Eigen::Vector3d> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  EXPECT_FALSE(pca_normal(cube).has_value());
}

TEST(Normals, RandomPlaneFacesObserver) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> xy(-2.5, 2.5);
  std::vector<Eigen::Vector3d> pts(500);
  for (auto& p : pts) p = {xy(rng), xy(rng), 0.0};
  const std::vector<Eigen::Vector3d> origins(pts.size(), Eigen::Vector3d(0, 0, 5));
  const NormalEstimate est = estimate_normals(PointCloudMap(pts, std::nullopt, origins));
  std::size_t valid = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (!est.is_valid(i)) continue;
    ++valid;
    EXPECT_LT(angle_deg(est.normals[i], {0, 0, 1}), 1.0);
  }
  EXPECT_GT(valid, 450u);
}

TEST(Normals, IsolatedPointIsInvalid) {
  std::vector<Eigen::Vector3d> pts = {{100, 100, 100}};
  for (int i = 0; i < 50; ++i) pts.emplace_back(0.02 * i, 0.01 * (i % 7), 0);
  const NormalEstimate est = estimate_normals(PointCloudMap(pts));
  EXPECT_FALSE(est.is_valid(0));
  EXPECT_EQ(est.neighbor_count[0], 0u);
  EXPECT_FALSE(est.oriented);
}

TEST(Normals, MinNeighborsExcludesSelf) {
  // The center has exactly 5 neighbors; each outer point sees fewer than 5.
  const std::vector<Eigen::Vector3d> pts = {
      {0, 0, 0}, {0.3, 0, 0}, {-0.3, 0, 0}, {0, 0.3, 0}, {0, -0.3, 0}, {0.2, 0.2, 0.01}};
  NormalOptions opt;
  opt.radius = 0.35;
  const NormalEstimate est = estimate_normals(PointCloudMap(pts), opt);
  EXPECT_EQ(est.neighbor_count[0], 5u);
  EXPECT_TRUE(est.is_valid(0));
  opt.min_neighbors = 6;
  EXPECT_FALSE(estimate_normals(PointCloudMap(pts), opt).is_valid(0));
}

TEST(Normals, SphereMatchesAnalyticNormals) {
  SphereSpec spec;
  spec.radius = 10.0;
  spec.count = 20000;
  const SyntheticScene scene = gen_sphere(spec, 3);
  const NormalEstimate est = estimate_normals(scene.map, {.radius = 0.5});
  double sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (!est.is_valid(i)) continue;
    ++valid;
    sum += angle_deg(est.normals[i], scene.true_normals[i]);
  }
  ASSERT_GT(valid, est.size() * 9 / 10);
  EXPECT_LT(sum / static_cast<double>(valid), 5.0);
}

TEST(Normals, TrajectoryFallbackOrientsTowardNearestPose) {
  // Two planes observed from opposite sides at different times.
  std::vector<Eigen::Vector3d> pts;
  std::vector<double> ts;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      pts.emplace_back(0.1 * i, 0.1 * j, 0.0);
      ts.push_back(0.0);
      pts.emplace_back(0.1 * i + 10, 0.1 * j, 0.0);
      ts.push_back(1.0);
    }
  }
  const Trajectory traj({Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d(1, 1, 3), 0.0),
                         Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d(11, 1, -3), 1.0)});
  const PointCloudMap map(pts, ts);
  const NormalEstimate est = estimate_normals(map, {}, &traj);
  EXPECT_TRUE(est.oriented);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!est.is_valid(i)) continue;
    EXPECT_NEAR(est.normals[i].z(), ts[i] == 0.0 ? 1.0 : -1.0, 1e-9);
  }
}

// Property: rotating cloud and origins rotates the normals.
TEST(Normals, RotationEquivariance) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> xy(-3.0, 3.0);
  std::vector<Eigen::Vector3d> pts(3000), origins(3000);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = xy(rng), y = xy(rng);
    pts[i] = {x, y, 0.1 * x * x - 0.05 * y * y + 0.2 * std::sin(x)};
    origins[i] = pts[i] + Eigen::Vector3d(0.3, -0.2, 4.0);
  }
  const Eigen::Matrix3d r = testing::random_quaternion(rng).toRotationMatrix();
  std::vector<Eigen::Vector3d> rp(pts.size()), ro(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rp[i] = r * pts[i];
    ro[i] = r * origins[i];
  }
  const NormalEstimate a = estimate_normals(PointCloudMap(pts, std::nullopt, origins));
  const NormalEstimate b = estimate_normals(PointCloudMap(rp, std::nullopt, ro));
  std::size_t both = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!a.is_valid(i) || !b.is_valid(i)) continue;
    ++both;
    EXPECT_LT((r * a.normals[i] - b.normals[i]).norm(), 1e-5);
  }
  EXPECT_GT(both, pts.size() * 9 / 10);
}

TEST(Normals, InvariantsOnForest) {
  ForestSpec spec;
  spec.half_extent = 8.0;
  spec.trunk_count = 8;
  const SyntheticScene scene = gen_forest(spec, 5);
  const NormalEstimate est = estimate_normals(scene.map);
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (!est.is_valid(i)) continue;
    EXPECT_NEAR(est.normals[i].norm(), 1.0, 1e-6);
    EXPECT_GE(est.normals[i].dot(scene.map.observation_origins()[i] - scene.map.point(i)), 0.0);
  }
}

TEST(Normals, ParallelMatchesSerial) {
  ForestSpec spec;
  spec.half_extent = 6.0;
  spec.trunk_count = 5;
  const SyntheticScene scene = gen_forest(spec, 6);
  const NormalEstimate a = estimate_normals(scene.map);
  const NormalEstimate b = estimate_normals_serial(scene.map);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.neighbor_count, b.neighbor_count);
  EXPECT_EQ(a.normals, b.normals);
}

TEST(Normals, CacheRoundTrip) {
  SphereSpec spec;
  spec.count = 2000;
  const SyntheticScene scene = gen_sphere(spec, 1);
  const NormalEstimate est = estimate_normals(scene.map, {.radius = 1.0});
  const NormalEstimate back = decode_normals_cache(encode_normals_cache(est));
  ASSERT_EQ(back.size(), est.size());
  EXPECT_EQ(back.valid, est.valid);
  for (std::size_t i = 0; i < est.size(); ++i) {
    EXPECT_LT((back.normals[i] - est.normals[i]).norm(), 1e-6);
  }
  std::vector<std::uint8_t> bad = encode_normals_cache(est);
  bad.pop_back();
  EXPECT_THROW(decode_normals_cache(bad), ParseError);
  bad[0] = 'X';
  EXPECT_THROW(decode_normals_cache(bad), ParseError);
}

}  // namespace
}  // namespace wildannot
