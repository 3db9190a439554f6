#include "wildannot/predicates.hpp"

#include <cmath>
#include <limits>

#include <gmpxx.h>

namespace wildannot {
namespace {

// Error bound for the translated 3x3 determinant (Shewchuk, o3derrboundA).
constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;
constexpr double kErrBound = (7.0 + 56.0 * kEps) * kEps;

}  // namespace

int orient3d_exact(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                   const Eigen::Vector3d& d) {
  const mpq_class adx = mpq_class(a.x()) - d.x(), ady = mpq_class(a.y()) - d.y(),
                  adz = mpq_class(a.z()) - d.z();
  const mpq_class bdx = mpq_class(b.x()) - d.x(), bdy = mpq_class(b.y()) - d.y(),
                  bdz = mpq_class(b.z()) - d.z();
  const mpq_class cdx = mpq_class(c.x()) - d.x(), cdy = mpq_class(c.y()) - d.y(),
                  cdz = mpq_class(c.z()) - d.z();
  const mpq_class det = adz * (bdx * cdy - cdx * bdy) + bdz * (cdx * ady - adx * cdy) +
                        cdz * (adx * bdy - bdx * ady);
  // det > 0 means d is below abc in this formulation; flip to "above".
  return -sgn(det);
}

int orient3d(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
             const Eigen::Vector3d& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y(), adz = a.z() - d.z();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y(), bdz = b.z() - d.z();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y(), cdz = c.z() - d.z();

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;

  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = kErrBound * permanent;
  if (det > bound) return -1;
  if (-det > bound) return 1;
  return orient3d_exact(a, b, c, d);
}

}  // namespace wildannot
