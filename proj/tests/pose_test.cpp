#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wildannot/error.hpp"
#include "wildannot/pose.hpp"

namespace wildannot {
namespace {

using testing::random_quaternion;
using testing::random_vector;

Pose RandomPose(std::mt19937_64& rng, double t = 0.0) {
  return Pose(random_quaternion(rng), random_vector(rng, -50.0, 50.0), t);
}

TEST(Pose, RenormalizesQuaternion) {
  const Pose p(Eigen::Quaterniond(2.0, 0.0, 0.0, 0.0), Eigen::Vector3d::Zero());
  EXPECT_NEAR(p.rotation().norm(), 1.0, 1e-15);
  EXPECT_NEAR(p.rotation().w(), 1.0, 1e-15);
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Pose p = RandomPose(rng);
    const Pose id = p * p.inverse();
    EXPECT_LT(id.translation().norm(), 1e-9);
    EXPECT_LT(quaternion_angle(id.rotation(), Eigen::Quaterniond::Identity()), 1e-9);
    const Eigen::Vector3d x = random_vector(rng, -10, 10);
    EXPECT_LT(((p * p.inverse()).apply(x) - x).norm(), 1e-9);
  }
}

TEST(Pose, CompositionOrder) {
  std::mt19937_64 rng(4);
  const Pose a = RandomPose(rng), b = RandomPose(rng);
  const Eigen::Vector3d x(1.0, -2.0, 0.5);
  EXPECT_LT(((a * b).apply(x) - a.apply(b.apply(x))).norm(), 1e-9);
}

TEST(Trajectory, RejectsNonIncreasingTimestamps) {
  const Pose p;
  EXPECT_THROW(Trajectory({p.with_timestamp(1.0), p.with_timestamp(1.0)}), InvalidArgument);
  EXPECT_THROW(Trajectory({p.with_timestamp(2.0), p.with_timestamp(1.0)}), InvalidArgument);
  EXPECT_NO_THROW(Trajectory({p.with_timestamp(1.0), p.with_timestamp(2.0)}));
}

TEST(Trajectory, NearestPrefersEarlierOnTies) {
  const Pose p;
  const Trajectory traj({p.with_timestamp(0.0), p.with_timestamp(1.0), p.with_timestamp(2.0)});
  EXPECT_EQ(traj.nearest(0.5).timestamp(), 0.0);
  EXPECT_EQ(traj.nearest(0.6).timestamp(), 1.0);
  EXPECT_EQ(traj.nearest(-3.0).timestamp(), 0.0);
  EXPECT_EQ(traj.nearest(9.0).timestamp(), 2.0);
}

TEST(Interpolate, EndpointsAreExact) {
  std::mt19937_64 rng(5);
  const Pose a = RandomPose(rng, 1.0), b = RandomPose(rng, 2.5);
  const Trajectory traj({a, b});
  const Pose p1 = interpolate_pose(traj, 1.0);
  const Pose p2 = interpolate_pose(traj, 2.5);
  EXPECT_EQ(p1.translation(), a.translation());
  EXPECT_LT(quaternion_angle(p1.rotation(), a.rotation()), 1e-9);
  EXPECT_LT((p2.translation() - b.translation()).norm(), 1e-12);
  EXPECT_LT(quaternion_angle(p2.rotation(), b.rotation()), 1e-9);
  EXPECT_EQ(p1.timestamp(), 1.0);
}

TEST(Interpolate, LinearMidpoint) {
  const Trajectory traj({Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d::Zero(), 0.0),
                         Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d(2, 0, 0), 1.0)});
  const Pose mid = interpolate_pose(traj, 0.5);
  EXPECT_LT((mid.translation() - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT(quaternion_angle(mid.rotation(), Eigen::Quaterniond::Identity()), 1e-12);
}

TEST(Interpolate, HalfOfQuarterTurnAboutZ) {
  const Eigen::Quaterniond q2(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()));
  const Trajectory traj({Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d::Zero(), 0.0),
                         Pose(q2, Eigen::Vector3d::Zero(), 2.0)});
  const Pose mid = interpolate_pose(traj, 1.0);
  // Axis-angle oracle: same axis, half the angle.
  const Eigen::AngleAxisd aa(q2);
  const Eigen::Matrix3d expected = Eigen::AngleAxisd(aa.angle() / 2, aa.axis()).toRotationMatrix();
  EXPECT_LT((mid.rotation_matrix() - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Interpolate, Errors) {
  const Pose p;
  const Trajectory traj({p.with_timestamp(0.0), p.with_timestamp(1.0)});
  EXPECT_THROW(interpolate_pose(traj, -0.1), OutOfRange);
  EXPECT_THROW(interpolate_pose(traj, 1.1), OutOfRange);
  EXPECT_THROW(interpolate_pose(Trajectory({p}), 0.0), OutOfRange);
  EXPECT_THROW(interpolate_between(p.with_timestamp(1.0), p.with_timestamp(1.0), 1.0),
               DegenerateBracket);
}

TEST(Interpolate, PicksTheBracketingPair) {
  std::vector<Pose> poses;
  for (int i = 0; i < 5; ++i) {
    poses.emplace_back(Eigen::Quaterniond::Identity(), Eigen::Vector3d(i * i, 0, 0), i);
  }
  const Trajectory traj(poses);
  EXPECT_NEAR(interpolate_pose(traj, 2.5).translation().x(), 6.5, 1e-12);
  EXPECT_NEAR(interpolate_pose(traj, 3.0).translation().x(), 9.0, 1e-12);
}

// Property: slerp moves along the geodesic at constant angular rate.
TEST(Slerp, GeodesicLinearityAndUnitNorm) {
  std::mt19937_64 rng(6);
  int pairs = 0;
  while (pairs < 100) {
    const Eigen::Quaterniond q1 = random_quaternion(rng), q2 = random_quaternion(rng);
    const double total = quaternion_angle(q1, q2);
    if (total >= 170.0 * M_PI / 180.0) continue;
    ++pairs;
    for (int k = 1; k <= 9; ++k) {
      const double u = k / 10.0;
      const Eigen::Quaterniond q = slerp(q1, q2, u);
      EXPECT_NEAR(q.norm(), 1.0, 1e-9);
      EXPECT_NEAR(quaternion_angle(q, q1), u * total, 1e-7);
    }
  }
}

TEST(Slerp, TakesTheShortArc) {
  const Eigen::Quaterniond q1 = Eigen::Quaterniond::Identity();
  Eigen::Quaterniond q2(Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitX()));
  q2.coeffs() *= -1.0;  // same rotation, opposite hemisphere
  const Eigen::Quaterniond q = slerp(q1, q2, 0.5);
  EXPECT_NEAR(quaternion_angle(q, q1), 0.2, 1e-12);
}

TEST(Slerp, NearlyParallelFallsBackToLerp) {
  const Eigen::Quaterniond q1 = Eigen::Quaterniond::Identity();
  const Eigen::Quaterniond q2(Eigen::AngleAxisd(1e-8, Eigen::Vector3d::UnitY()));
  const Eigen::Quaterniond q = slerp(q1, q2, 0.5);
  EXPECT_NEAR(q.norm(), 1.0, 1e-12);
  EXPECT_NEAR(quaternion_angle(q, q1), 0.5e-8, 1e-12);
}

// Property: translation interpolation is exactly linear.
TEST(Interpolate, TranslationIsLinear) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = RandomPose(rng, 10.0), b = RandomPose(rng, 10.0 + 0.1 + unit(rng));
    const double t = a.timestamp() + unit(rng) * (b.timestamp() - a.timestamp());
    const double u = (t - a.timestamp()) / (b.timestamp() - a.timestamp());
    const Pose p = interpolate_between(a, b, t);
    const Eigen::Vector3d expected = (1 - u) * a.translation() + u * b.translation();
    EXPECT_LT((p.translation() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TransformPoints, IdentityAndTranslation) {
  const std::vector<Eigen::Vector3d> pts = {{1, 0, 0}, {0.5, -2, 3}};
  const auto same = transform_points(pts, Pose());
  EXPECT_EQ(same[1], pts[1]);
  const auto moved =
      transform_points(pts, Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d(1, 0, 0)));
  EXPECT_EQ(moved[0], Eigen::Vector3d::Zero());
}

TEST(TransformPoints, RoundTrip) {
  std::mt19937_64 rng(8);
  const Pose pose = RandomPose(rng);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(random_vector(rng, -100, 100));
  const auto local = transform_points(pts, pose);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LT((pose.apply(local[i]) - pts[i]).norm(), 1e-7);
  }
}

TEST(TransformPoints, RejectsNonFinite) {
  const std::vector<Eigen::Vector3d> pts = {{1, NAN, 0}};
  EXPECT_THROW(transform_points(pts, Pose()), InvalidArgument);
}

}  // namespace
}  // namespace wildannot
