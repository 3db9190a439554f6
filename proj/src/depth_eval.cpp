#include "wildannot/depth_eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wildannot/error.hpp"

namespace wildannot {

nlohmann::json DepthMetrics::to_json() const {
  return {{"delta1", delta1}, {"abs_rel", abs_rel}, {"rmse", rmse}, {"pixel_count", pixel_count}};
}

void DepthMetricsAccumulator::add(double pred, double gt) {
  const double err = pred - gt;
  bool inlier;
  if (mode_ == Delta1Mode::kRatio) {
    inlier = std::max(pred / gt, gt / pred) < 1.25;
  } else {
    inlier = std::abs(err) / gt <= 0.25;
  }
  ++count_;
  inliers_ += inlier ? 1 : 0;
  abs_rel_sum_ += std::abs(err) / gt;
  squared_sum_ += err * err;
}

void DepthMetricsAccumulator::add(const DepthFrame& pred, const DepthFrame& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ShapeMismatch("prediction is " + std::to_string(pred.width) + "x" +
                        std::to_string(pred.height) + ", ground truth " +
                        std::to_string(gt.width) + "x" + std::to_string(gt.height));
  }
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    if (pred.valid[i] && gt.valid[i]) add(pred.depth[i], gt.depth[i]);
  }
}

void DepthMetricsAccumulator::merge(const DepthMetricsAccumulator& other) {
  if (other.mode_ != mode_) throw InvalidArgument("cannot merge accumulators with different delta1 modes");
  count_ += other.count_;
  inliers_ += other.inliers_;
  abs_rel_sum_ += other.abs_rel_sum_;
  squared_sum_ += other.squared_sum_;
}

DepthMetrics DepthMetricsAccumulator::metrics() const {
  if (count_ == 0) throw NoValidPixels("no pixel is valid in both prediction and ground truth");
  const double n = static_cast<double>(count_);
  DepthMetrics m;
  m.delta1 = static_cast<double>(inliers_) / n;
  m.abs_rel = abs_rel_sum_ / n;
  m.rmse = std::sqrt(squared_sum_ / n);
  m.pixel_count = count_;
  return m;
}

DepthMetrics depth_metrics(const DepthFrame& pred, const DepthFrame& gt, Delta1Mode mode) {
  DepthMetricsAccumulator acc(mode);
  acc.add(pred, gt);
  return acc.metrics();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return values[lo] + f * (values[hi] - values[lo]);
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("quantiles of an empty sample");
  std::sort(values.begin(), values.end());
  Quantiles out;
  out.p5 = quantile(values, 0.05);
  out.p25 = quantile(values, 0.25);
  out.p50 = quantile(values, 0.50);
  out.p75 = quantile(values, 0.75);
  out.p95 = quantile(values, 0.95);
  return out;
}

std::optional<std::array<Quantiles, 3>> DepthDistribution::summary() const {
  if (depth.empty()) return std::nullopt;
  return std::array<Quantiles, 3>{quantiles(u), quantiles(v), quantiles(depth)};
}

nlohmann::json DepthDistribution::quantiles_json() const {
  nlohmann::json j;
  j["subsample_rate"] = subsample_rate;
  j["sample_count"] = size();
  const auto s = summary();
  const char* names[3] = {"u", "v", "depth"};
  for (int a = 0; a < 3; ++a) {
    if (!s) {
      j["quantiles"][names[a]] = nullptr;
      continue;
    }
    const Quantiles& q = (*s)[a];
    j["quantiles"][names[a]] = {
        {"p5", q.p5}, {"p25", q.p25}, {"p50", q.p50}, {"p75", q.p75}, {"p95", q.p95}};
  }
  return j;
}

std::string DepthDistribution::to_csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "axis,value\n";
  for (std::size_t i = 0; i < size(); ++i) {
    os << "u," << u[i] << "\nv," << v[i] << "\ndepth," << depth[i] << '\n';
  }
  return os.str();
}

DepthDistributionBuilder::DepthDistributionBuilder(double subsample_rate, std::uint64_t seed)
    : rng_(seed) {
  if (!(subsample_rate > 0.0 && subsample_rate <= 1.0)) {
    throw InvalidArgument("subsample rate must lie in (0, 1]");
  }
  dist_.subsample_rate = subsample_rate;
}

void DepthDistributionBuilder::add(const DepthFrame& frame) {
  const double rate = dist_.subsample_rate;
  for (int row = 0; row < frame.height; ++row) {
    for (int col = 0; col < frame.width; ++col) {
      const std::size_t i = frame.index(row, col);
      if (!frame.valid[i] || !(frame.depth[i] > 0.0f)) continue;
      // 53 random bits give a uniform double in [0, 1).
      const double draw = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      if (draw >= rate) continue;
      dist_.u.push_back((col + 0.5) / frame.width);
      dist_.v.push_back((row + 0.5) / frame.height);
      dist_.depth.push_back(frame.depth[i]);
    }
  }
}

DepthDistribution depth_distribution_stats(const std::vector<DepthFrame>& frames,
                                           double subsample_rate, std::uint64_t seed) {
  DepthDistributionBuilder builder(subsample_rate, seed);
  for (const DepthFrame& f : frames) builder.add(f);
  return builder.distribution();
}

}  // namespace wildannot
