#include "wildannot/submap.hpp"

#include <cmath>

#include "wildannot/error.hpp"
#include "wildannot/parallel.hpp"

namespace wildannot {
namespace {

void check_inputs(const PointCloudMap& map, const SubmapSpec& spec) {
  spec.validate();
  if (map.empty()) throw InvalidArgument("submap extraction on an empty map");
  if (spec.time_window && !map.has_timestamps()) {
    throw MissingTimestamps("time window requested but the map has no per-point timestamps");
  }
}

bool within_window(const PointCloudMap& map, PointIndex i, double t, const SubmapSpec& spec) {
  if (!spec.time_window) return true;
  return std::abs(map.timestamps()[i] - t) <= *spec.time_window / 2.0;
}

Submap gather(const PointCloudMap& map, const Pose& pose, std::vector<PointIndex> indices) {
  Submap out;
  out.center_pose = pose;
  out.source_indices = std::move(indices);
  out.points.reserve(out.source_indices.size());
  for (PointIndex i : out.source_indices) out.points.push_back(map.point(i));
  return out;
}

}  // namespace

void SubmapSpec::validate() const {
  if (!(radius > 0.0)) throw InvalidArgument("submap radius must be positive");
  if (time_window && !(*time_window >= 0.0)) throw InvalidArgument("time window must be >= 0");
  if (!(stride > 0.0)) throw InvalidArgument("submap stride must be positive");
}

Submap extract_submap(const PointCloudMap& map, const Pose& pose, const SubmapSpec& spec) {
  check_inputs(map, spec);
  std::vector<PointIndex> hits = map.index().radius_search(pose.translation(), spec.radius);
  if (spec.time_window) {
    std::erase_if(hits, [&](PointIndex i) { return !within_window(map, i, pose.timestamp(), spec); });
  }
  return gather(map, pose, std::move(hits));
}

Submap extract_submap_linear(const PointCloudMap& map, const Pose& pose, const SubmapSpec& spec) {
  check_inputs(map, spec);
  const double r2 = spec.radius * spec.radius;
  std::vector<PointIndex> hits;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto idx = static_cast<PointIndex>(i);
    if ((map.point(i) - pose.translation()).squaredNorm() <= r2 &&
        within_window(map, idx, pose.timestamp(), spec)) {
      hits.push_back(idx);
    }
  }
  return gather(map, pose, std::move(hits));
}

std::vector<double> submap_center_times(const Trajectory& trajectory, double stride) {
  if (!(stride > 0.0)) throw InvalidArgument("submap stride must be positive");
  const double t0 = trajectory.t_first();
  const double t1 = trajectory.t_last();
  // Small slack so that spans that are exact multiples of the stride keep
  // their last center despite rounding.
  const auto steps = static_cast<long long>(std::floor((t1 - t0) / stride + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  for (long long k = 0; k <= steps; ++k) {
    out.push_back(std::min(t1, t0 + static_cast<double>(k) * stride));
  }
  return out;
}

std::vector<Submap> extract_submap_sequence(const PointCloudMap& map, const Trajectory& trajectory,
                                            const SubmapSpec& spec) {
  check_inputs(map, spec);
  const auto centers = submap_center_times(trajectory, spec.stride);
  std::vector<Submap> out(centers.size());
  const auto n = static_cast<long long>(centers.size());
  ExceptionSink errors;
#pragma omp parallel for schedule(dynamic, 4)
  for (long long k = 0; k < n; ++k) {
    errors.run([&] {
      const auto i = static_cast<std::size_t>(k);
      out[i] = extract_submap(map, interpolate_pose(trajectory, centers[i]), spec);
    });
  }
  errors.rethrow();
  return out;
}

}  // namespace wildannot
