#pragma once

#include <Eigen/Core>

namespace wildannot {

// Sign of ((b - a) x (c - a)) . (d - a): +1 when d lies on the side the
// counter-clockwise normal of triangle abc points to, -1 on the other side,
// 0 when the four points are exactly coplanar. The sign is exact for the
// double inputs: a Shewchuk-style error bound filters the floating-point
// result and ambiguous cases are re-evaluated in rational arithmetic.
int orient3d(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
             const Eigen::Vector3d& d);

// Rational-arithmetic evaluation only (test oracle for the filter).
int orient3d_exact(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                   const Eigen::Vector3d& d);

}  // namespace wildannot
