#include "wildannot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "wildannot/error.hpp"
#include "wildannot/io.hpp"
#include "wildannot/manifest.hpp"
#include "wildannot/parallel.hpp"

namespace wildannot {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw InvalidArgument(std::string(name) + " must be positive");
}

std::size_t grid_count(double extent, double spacing) {
  return static_cast<std::size_t>(std::llround(extent / spacing)) + 1;
}

struct SceneBuilder {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::vector<Eigen::Vector3d> origins;
  std::vector<double> times;
  std::vector<std::uint8_t> labels;

  void add(const Eigen::Vector3d& p, const Eigen::Vector3d& n, const Eigen::Vector3d& origin,
           double t, std::uint8_t label = 0) {
    points.push_back(p);
    normals.push_back(n);
    origins.push_back(origin);
    times.push_back(t);
    labels.push_back(label);
  }

  // Timestamps in generation order, spread over [0, duration].
  void linear_times(double duration) {
    const std::size_t n = times.size();
    for (std::size_t i = 0; i < n; ++i) {
      times[i] = n > 1 ? duration * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    }
  }

  SyntheticScene finish(std::string kind, nlohmann::json generator, double spacing) {
    SyntheticScene s;
    s.kind = std::move(kind);
    s.generator = std::move(generator);
    s.true_normals = normals;
    s.labels = std::move(labels);
    s.spacing = spacing;
    s.map = PointCloudMap(std::move(points), std::move(times), std::move(origins));
    return s;
  }
};

bool ray_hits_surfel(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double max_range,
                     const Eigen::Vector3d& q, const Eigen::Vector3d& n, double r2) {
  const double denom = n.dot(dir);
  if (denom == 0.0) return false;
  const double t = n.dot(q - origin) / denom;
  if (!(t > 0.0 && t < max_range)) return false;
  return (origin + t * dir - q).squaredNorm() <= r2;
}

bool occluded(const SyntheticScene& scene, std::size_t i, const Eigen::Vector3d& cam,
              double radius, const std::vector<PointIndex>* candidates) {
  const Eigen::Vector3d& p = scene.map.point(i);
  const double dist = (p - cam).norm();
  const Eigen::Vector3d dir = (p - cam) / dist;
  const double max_range = dist - radius;
  const double r2 = radius * radius;
  auto test = [&](std::size_t j) {
    return j != i && ray_hits_surfel(cam, dir, max_range, scene.map.point(j),
                                     scene.true_normals[j], r2);
  };
  if (candidates) {
    for (PointIndex j : *candidates) {
      if (test(j)) return true;
    }
    return false;
  }
  for (std::size_t j = 0; j < scene.map.size(); ++j) {
    if (test(j)) return true;
  }
  return false;
}

}  // namespace

SyntheticScene gen_plane(const PlaneSpec& spec, std::uint64_t seed) {
  require_positive(spec.extent, "extent");
  require_positive(spec.spacing, "spacing");
  const std::size_t n = grid_count(spec.extent, spec.spacing);
  SceneBuilder b;
  const Eigen::Vector3d up(0, 0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::Vector3d p(-spec.extent / 2 + static_cast<double>(i) * spec.spacing,
                              -spec.extent / 2 + static_cast<double>(j) * spec.spacing,
                              spec.height);
      b.add(p, up, p + 5.0 * up, 0.0);
    }
  }
  b.linear_times(spec.duration);
  return b.finish("plane",
                  {{"extent", spec.extent}, {"spacing", spec.spacing}, {"height", spec.height},
                   {"duration", spec.duration}, {"seed", seed}},
                  spec.spacing);
}

SyntheticScene gen_sphere(const SphereSpec& spec, std::uint64_t seed) {
  require_positive(spec.radius, "radius");
  // Fibonacci lattice (near-uniform, no sampling holes) under a seeded
  // random rotation.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond rot(g(rng), g(rng), g(rng), g(rng));
  rot.normalize();
  const Eigen::Matrix3d R = rot.toRotationMatrix();
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  const auto n = static_cast<double>(spec.count);
  SceneBuilder b;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    const Eigen::Vector3d u = (R * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z)).normalized();
    const Eigen::Vector3d p = spec.center + spec.radius * u;
    b.add(p, u, p + u, 0.0);
  }
  b.linear_times(spec.duration);
  const double area = 4.0 * M_PI * spec.radius * spec.radius;
  return b.finish("sphere",
                  {{"radius", spec.radius},
                   {"count", spec.count},
                   {"center", {spec.center.x(), spec.center.y(), spec.center.z()}},
                   {"duration", spec.duration},
                   {"seed", seed}},
                  std::sqrt(area / std::max(n, 1.0)));
}

SyntheticScene gen_wall_occluder(const WallSpec& spec, std::uint64_t seed) {
  require_positive(spec.distance, "distance");
  require_positive(spec.spacing, "spacing");
  require_positive(spec.half_width, "half_width");
  require_positive(spec.half_height, "half_height");
  if (!(spec.hidden_distance > spec.distance)) {
    throw InvalidArgument("hidden_distance must exceed the wall distance");
  }
  SceneBuilder b;
  const Eigen::Vector3d toward(0, 0, -1);
  const Eigen::Vector3d cam = Eigen::Vector3d::Zero();
  const std::size_t nx = grid_count(2 * spec.half_width, spec.spacing);
  const std::size_t ny = grid_count(2 * spec.half_height, spec.spacing);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const Eigen::Vector3d p(-spec.half_width + static_cast<double>(i) * spec.spacing,
                              -spec.half_height + static_cast<double>(j) * spec.spacing,
                              spec.distance);
      b.add(p, toward, cam, 0.0, 0);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.9 * spec.half_width / spec.distance,
                                            0.9 * spec.half_width / spec.distance);
  std::uniform_real_distribution<double> uy(-0.9 * spec.half_height / spec.distance,
                                            0.9 * spec.half_height / spec.distance);
  for (std::size_t k = 0; k < spec.hidden_count; ++k) {
    const double a = ux(rng);
    const double c = uy(rng);
    const Eigen::Vector3d p = Eigen::Vector3d(a, c, 1.0) * spec.hidden_distance;
    b.add(p, toward, cam, 0.0, 1);
  }
  b.linear_times(spec.duration);
  return b.finish("wall_occluder",
                  {{"distance", spec.distance},
                   {"spacing", spec.spacing},
                   {"half_width", spec.half_width},
                   {"half_height", spec.half_height},
                   {"hidden_distance", spec.hidden_distance},
                   {"hidden_count", spec.hidden_count},
                   {"duration", spec.duration},
                   {"seed", seed}},
                  spec.spacing);
}

SyntheticScene gen_forest(const ForestSpec& spec, std::uint64_t seed) {
  require_positive(spec.half_extent, "half_extent");
  require_positive(spec.ground_spacing, "ground_spacing");
  require_positive(spec.trunk_spacing, "trunk_spacing");
  require_positive(spec.trunk_radius_min, "trunk_radius_min");
  require_positive(spec.trunk_height, "trunk_height");
  if (spec.trunk_radius_max < spec.trunk_radius_min) {
    throw InvalidArgument("trunk_radius_max below trunk_radius_min");
  }
  std::mt19937_64 rng(seed);

  struct Trunk {
    Eigen::Vector2d c;
    double r;
  };
  std::vector<Trunk> trunks;
  std::uniform_real_distribution<double> upos(-spec.half_extent + 1.0, spec.half_extent - 1.0);
  std::uniform_real_distribution<double> urad(spec.trunk_radius_min, spec.trunk_radius_max);
  for (std::size_t attempt = 0; trunks.size() < spec.trunk_count && attempt < 100000; ++attempt) {
    const Trunk t{{upos(rng), upos(rng)}, urad(rng)};
    if (std::abs(t.c.y()) < spec.corridor_half_width + t.r) continue;
    bool clear = true;
    for (const Trunk& o : trunks) {
      if ((o.c - t.c).norm() < o.r + t.r + 0.5) {
        clear = false;
        break;
      }
    }
    if (clear) trunks.push_back(t);
  }
  if (trunks.size() < spec.trunk_count) {
    throw InvalidArgument("forest area too small for the requested trunk count");
  }

  SceneBuilder b;
  const auto time_of = [&](double x) {
    return std::clamp(spec.duration * (x + spec.half_extent) / (2 * spec.half_extent), 0.0,
                      spec.duration);
  };
  const Eigen::Vector3d up(0, 0, 1);
  std::uniform_real_distribution<double> ujit(-spec.ground_jitter * spec.ground_spacing,
                                              spec.ground_jitter * spec.ground_spacing);
  const std::size_t n = grid_count(2 * spec.half_extent, spec.ground_spacing);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double jx = ujit(rng), jy = ujit(rng);
      const Eigen::Vector3d p(-spec.half_extent + static_cast<double>(i) * spec.ground_spacing + jx,
                              -spec.half_extent + static_cast<double>(j) * spec.ground_spacing + jy,
                              0.0);
      bool inside = false;
      for (const Trunk& t : trunks) {
        if ((p.head<2>() - t.c).squaredNorm() < t.r * t.r) {
          inside = true;
          break;
        }
      }
      if (!inside) b.add(p, up, p + spec.observer_offset * up, time_of(p.x()), 0);
    }
  }
  for (const Trunk& t : trunks) {
    const int around = std::max(8, static_cast<int>(std::ceil(2 * M_PI * t.r / spec.trunk_spacing)));
    const int rings = static_cast<int>(std::floor(spec.trunk_height / spec.trunk_spacing));
    for (int k = 1; k <= rings; ++k) {
      const double z = k * spec.trunk_spacing;
      const double phase = (k % 2) * M_PI / around;
      for (int a = 0; a < around; ++a) {
        const double theta = 2 * M_PI * a / around + phase;
        const Eigen::Vector3d nrm(std::cos(theta), std::sin(theta), 0.0);
        const Eigen::Vector3d p(t.c.x() + t.r * nrm.x(), t.c.y() + t.r * nrm.y(), z);
        b.add(p, nrm, p + spec.observer_offset * nrm, time_of(p.x()), 1);
      }
    }
  }

  nlohmann::json trunk_json = nlohmann::json::array();
  for (const Trunk& t : trunks) trunk_json.push_back({t.c.x(), t.c.y(), t.r});
  return b.finish("forest",
                  {{"half_extent", spec.half_extent},
                   {"ground_spacing", spec.ground_spacing},
                   {"ground_jitter", spec.ground_jitter},
                   {"trunk_count", spec.trunk_count},
                   {"trunk_radius_min", spec.trunk_radius_min},
                   {"trunk_radius_max", spec.trunk_radius_max},
                   {"trunk_height", spec.trunk_height},
                   {"trunk_spacing", spec.trunk_spacing},
                   {"corridor_half_width", spec.corridor_half_width},
                   {"duration", spec.duration},
                   {"observer_offset", spec.observer_offset},
                   {"seed", seed},
                   {"trunks", trunk_json}},
                  std::max(spec.ground_spacing, spec.trunk_spacing));
}

CameraRig forward_looking_rig(int width, int height, double focal) {
  CameraRig rig;
  rig.fx = focal;
  rig.fy = focal;
  rig.cx = width / 2.0;
  rig.cy = height / 2.0;
  rig.width = width;
  rig.height = height;
  Eigen::Matrix3d r;
  r << 0, -1, 0,  //
      0, 0, -1,   //
      1, 0, 0;
  rig.extrinsic = Pose(Eigen::Quaterniond(r), Eigen::Vector3d::Zero());
  return rig;
}

Trajectory straight_trajectory(const Eigen::Vector3d& start, const Eigen::Vector3d& end, double t0,
                               double t1, double rate_hz) {
  require_positive(rate_hz, "rate_hz");
  if (!(t1 > t0)) throw InvalidArgument("trajectory end time must follow start time");
  const Eigen::Vector3d d = end - start;
  const Eigen::Quaterniond q(Eigen::AngleAxisd(std::atan2(d.y(), d.x()), Eigen::Vector3d::UnitZ()));
  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::floor((t1 - t0) * rate_hz + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) times.push_back(t0 + static_cast<double>(k) / rate_hz);
  if (times.back() < t1 - 1e-9) times.push_back(t1);
  std::vector<Pose> poses;
  for (double t : times) poses.emplace_back(q, start + d * ((t - t0) / (t1 - t0)), t);
  return Trajectory(std::move(poses));
}

std::vector<double> frame_times(double t0, std::size_t count, double rate_hz) {
  require_positive(rate_hz, "rate_hz");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = t0 + static_cast<double>(k) / rate_hz;
  return out;
}

std::vector<std::uint8_t> oracle_visibility_brute_force(const SyntheticScene& scene,
                                                        const Pose& camera_pose,
                                                        const CameraRig& rig,
                                                        double surfel_radius) {
  require_positive(surfel_radius, "surfel_radius");
  const Eigen::Vector3d cam = camera_pose.translation();
  std::vector<std::uint8_t> visible(scene.map.size(), 0);
  for (std::size_t i = 0; i < scene.map.size(); ++i) {
    if (!project_point(camera_pose.apply_inverse(scene.map.point(i)), rig).in_image()) continue;
    visible[i] = occluded(scene, i, cam, surfel_radius, nullptr) ? 0 : 1;
  }
  return visible;
}

std::vector<std::uint8_t> oracle_visibility(const SyntheticScene& scene, const Pose& camera_pose,
                                            const CameraRig& rig, double surfel_radius) {
  require_positive(surfel_radius, "surfel_radius");
  const std::size_t n = scene.map.size();
  const Eigen::Vector3d cam = camera_pose.translation();
  constexpr int kCell = 8;
  const int gw = (rig.width + kCell - 1) / kCell;
  const int gh = (rig.height + kCell - 1) / kCell;

  // Bin every surfel by a conservative image-space box of its bounding
  // sphere; spheres reaching the near plane can cover any pixel.
  std::vector<std::vector<PointIndex>> cells(static_cast<std::size_t>(gw * gh));
  std::vector<PointIndex> everywhere;
  std::vector<Projection> proj(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Vector3d q = camera_pose.apply_inverse(scene.map.point(j));
    proj[j] = project_point(q, rig);
    if (q.z() + surfel_radius <= 0.0) continue;
    if (q.z() - surfel_radius <= kMinDepth) {
      everywhere.push_back(static_cast<PointIndex>(j));
      continue;
    }
    double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
    for (int c = 0; c < 8; ++c) {
      const Eigen::Vector3d k(q.x() + ((c & 1) ? surfel_radius : -surfel_radius),
                              q.y() + ((c & 2) ? surfel_radius : -surfel_radius),
                              q.z() + ((c & 4) ? surfel_radius : -surfel_radius));
      const double u = rig.fx * k.x() / k.z() + rig.cx;
      const double v = rig.fy * k.y() / k.z() + rig.cy;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    umin -= 1.0, vmin -= 1.0, umax += 1.0, vmax += 1.0;
    if (umax < 0.0 || vmax < 0.0 || umin >= rig.width || vmin >= rig.height) continue;
    const int c0 = std::max(0, static_cast<int>(std::floor(umin / kCell)));
    const int c1 = std::min(gw - 1, static_cast<int>(std::floor(umax / kCell)));
    const int r0 = std::max(0, static_cast<int>(std::floor(vmin / kCell)));
    const int r1 = std::min(gh - 1, static_cast<int>(std::floor(vmax / kCell)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        cells[static_cast<std::size_t>(r * gw + c)].push_back(static_cast<PointIndex>(j));
      }
    }
  }

  std::vector<std::uint8_t> visible(n, 0);
  ExceptionSink sink;
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    sink.run([&] {
      const auto i = static_cast<std::size_t>(ii);
      if (!proj[i].in_image()) return;
      const int c = std::min(gw - 1, static_cast<int>(proj[i].u) / kCell);
      const int r = std::min(gh - 1, static_cast<int>(proj[i].v) / kCell);
      const bool hidden =
          occluded(scene, i, cam, surfel_radius, &cells[static_cast<std::size_t>(r * gw + c)]) ||
          occluded(scene, i, cam, surfel_radius, &everywhere);
      visible[i] = hidden ? 0 : 1;
    });
  }
  sink.rethrow();
  return visible;
}

std::filesystem::path export_scene(const std::filesystem::path& dir, const std::string& label,
                                   const SyntheticScene& scene, const Trajectory& trajectory,
                                   const CameraRig& rig, const std::vector<double>& frames) {
  std::filesystem::create_directories(dir);
  write_ply_map(dir / "map.ply", scene.map);
  write_trajectory_csv(dir / "trajectory.csv", trajectory);
  write_camera_rig(dir / "rig.json", rig);
  write_timestamps(dir / "frames.txt", frames);
  SequenceManifest m;
  m.sequence_label = label;
  m.trajectory_path = "trajectory.csv";
  m.point_cloud_path = "map.ply";
  m.camera_rig_path = "rig.json";
  m.frame_timestamps_path = "frames.txt";
  DeclaredStats stats;
  stats.image_count = frames.size();
  m.declared_stats = stats;
  const auto path = dir / "manifest.json";
  nlohmann::json j = manifest_to_json(m);
  j["generator"] = scene.generator;
  j["generator"]["kind"] = scene.kind;
  write_text_file(path, j.dump(2) + "\n");
  return path;
}

}  // namespace wildannot
