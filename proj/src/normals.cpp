#include "wildannot/normals.hpp"

#include <algorithm>
#include <cstring>

#include <Eigen/Eigenvalues>

#include "wildannot/error.hpp"

namespace wildannot {
namespace {

constexpr char kCacheMagic[4] = {'W', 'N', 'R', 'M'};

std::optional<Eigen::Vector3d> normal_from_covariance(const Eigen::Matrix3d& cov,
                                                      double isotropy_ratio) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const Eigen::Vector3d lambda = solver.eigenvalues();  // ascending
  if (!(lambda(2) > 0.0)) return std::nullopt;
  if (lambda(1) <= 1e-12 * lambda(2)) return std::nullopt;  // collinear
  if (lambda(0) / lambda(1) > isotropy_ratio) return std::nullopt;
  return solver.eigenvectors().col(0).normalized();
}

void estimate_one(const PointCloudMap& map, const NormalOptions& options,
                  const std::vector<Eigen::Vector3d>* origins, std::size_t i,
                  NormalEstimate& out) {
  const Eigen::Vector3d& p = map.point(i);
  // Moments about the query point; offsets are bounded by the radius, so the
  // one-pass covariance stays well conditioned.
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  std::uint32_t count = 0;
  map.index().for_each_in_radius(p, options.radius, [&](PointIndex j, double) {
    const Eigen::Vector3d d = map.point(j) - p;
    sum += d;
    outer.noalias() += d * d.transpose();
    ++count;
  });
  // The query point is always found by its own radius search.
  const std::uint32_t neighbors = count - 1;
  out.neighbor_count[i] = neighbors;
  out.valid[i] = 0;
  out.normals[i] = Eigen::Vector3d::Zero();
  if (neighbors < static_cast<std::uint32_t>(options.min_neighbors) || count < 3) return;
  const Eigen::Vector3d mean = sum / count;
  const Eigen::Matrix3d cov = outer / count - mean * mean.transpose();
  const auto n = normal_from_covariance(cov, options.isotropy_ratio);
  if (!n) return;
  out.normals[i] = origins ? orient_normal(*n, p, (*origins)[i]) : *n;
  out.valid[i] = 1;
}

NormalEstimate allocate(std::size_t n, bool oriented) {
  NormalEstimate out;
  out.normals.assign(n, Eigen::Vector3d::Zero());
  out.valid.assign(n, 0);
  out.neighbor_count.assign(n, 0);
  out.oriented = oriented;
  return out;
}

}  // namespace

Eigen::Vector3d orient_normal(const Eigen::Vector3d& normal, const Eigen::Vector3d& p,
                              const Eigen::Vector3d& obs) {
  return normal.dot(obs - p) >= 0.0 ? normal : Eigen::Vector3d(-normal);
}

std::optional<Eigen::Vector3d> pca_normal(std::span<const Eigen::Vector3d> neighborhood,
                                          double isotropy_ratio) {
  if (neighborhood.size() < 3) return std::nullopt;
  // Center on the first sample before averaging to limit cancellation.
  const Eigen::Vector3d ref = neighborhood.front();
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& q : neighborhood) mean += q - ref;
  mean /= static_cast<double>(neighborhood.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& q : neighborhood) {
    const Eigen::Vector3d d = (q - ref) - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(neighborhood.size());

  return normal_from_covariance(cov, isotropy_ratio);
}

std::optional<std::vector<Eigen::Vector3d>> resolve_observation_origins(
    const PointCloudMap& map, const Trajectory* trajectory) {
  if (map.has_observation_origins()) return map.observation_origins();
  if (map.has_timestamps() && trajectory != nullptr && !trajectory->empty()) {
    std::vector<Eigen::Vector3d> out(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
      out[i] = trajectory->nearest(map.timestamps()[i]).translation();
    }
    return out;
  }
  return std::nullopt;
}

NormalEstimate estimate_normals(const PointCloudMap& map, const NormalOptions& options,
                                const Trajectory* trajectory) {
  const auto origins = resolve_observation_origins(map, trajectory);
  NormalEstimate out = allocate(map.size(), origins.has_value());
  const auto* origin_ptr = origins ? &*origins : nullptr;
  const auto n = static_cast<long long>(map.size());
#pragma omp parallel for schedule(dynamic, 1024)
  for (long long i = 0; i < n; ++i) {
    estimate_one(map, options, origin_ptr, static_cast<std::size_t>(i), out);
  }
  return out;
}

NormalEstimate estimate_normals_serial(const PointCloudMap& map, const NormalOptions& options,
                                       const Trajectory* trajectory) {
  const auto origins = resolve_observation_origins(map, trajectory);
  NormalEstimate out = allocate(map.size(), origins.has_value());
  for (std::size_t i = 0; i < map.size(); ++i) {
    estimate_one(map, options, origins ? &*origins : nullptr, i, out);
  }
  return out;
}

std::vector<std::uint8_t> encode_normals_cache(const NormalEstimate& normals) {
  const auto count = static_cast<std::uint32_t>(normals.size());
  std::vector<std::uint8_t> out(8 + static_cast<std::size_t>(count) * 13);
  std::memcpy(out.data(), kCacheMagic, 4);
  std::memcpy(out.data() + 4, &count, 4);
  std::uint8_t* p = out.data() + 8;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const float v[3] = {static_cast<float>(normals.normals[i].x()),
                        static_cast<float>(normals.normals[i].y()),
                        static_cast<float>(normals.normals[i].z())};
    std::memcpy(p, v, 12);
    p[12] = normals.valid[i] ? 1 : 0;
    p += 13;
  }
  return out;
}

NormalEstimate decode_normals_cache(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCacheMagic, 4) != 0) {
    throw ParseError("normals cache: bad magic");
  }
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 4, 4);
  if (bytes.size() != 8 + static_cast<std::size_t>(count) * 13) {
    throw ParseError("normals cache: size does not match count");
  }
  NormalEstimate out = allocate(count, true);
  const std::uint8_t* p = bytes.data() + 8;
  for (std::size_t i = 0; i < count; ++i) {
    float v[3];
    std::memcpy(v, p, 12);
    out.normals[i] = Eigen::Vector3d(v[0], v[1], v[2]);
    out.valid[i] = p[12] ? 1 : 0;
    p += 13;
  }
  return out;
}

}  // namespace wildannot
