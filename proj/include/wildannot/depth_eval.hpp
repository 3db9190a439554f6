#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "wildannot/render.hpp"

namespace wildannot {

enum class Delta1Mode {
  kRatio,    // max(pred / gt, gt / pred) < 1.25
  kLiteral,  // |pred - gt| / gt <= 0.25
};

struct DepthMetrics {
  double delta1 = 0.0;
  double abs_rel = 0.0;
  double rmse = 0.0;
  std::size_t pixel_count = 0;

  nlohmann::json to_json() const;
};

// Running sums over jointly valid pixels; merge() is associative so frames
// may be reduced in any grouping.
class DepthMetricsAccumulator {
 public:
  explicit DepthMetricsAccumulator(Delta1Mode mode = Delta1Mode::kRatio) : mode_(mode) {}

  void add(double pred, double gt);
  // Throws ShapeMismatch when the frames differ in size.
  void add(const DepthFrame& pred, const DepthFrame& gt);
  void merge(const DepthMetricsAccumulator& other);

  std::size_t count() const { return count_; }
  // Throws NoValidPixels when nothing was accumulated.
  DepthMetrics metrics() const;

 private:
  Delta1Mode mode_;
  std::size_t count_ = 0;
  std::size_t inliers_ = 0;
  double abs_rel_sum_ = 0.0;
  double squared_sum_ = 0.0;
};

DepthMetrics depth_metrics(const DepthFrame& pred, const DepthFrame& gt,
                           Delta1Mode mode = Delta1Mode::kRatio);

struct Quantiles {
  double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
};

// Linear interpolation between order statistics; `values` need not be sorted.
double quantile(std::vector<double> values, double q);
Quantiles quantiles(std::vector<double> values);

struct DepthDistribution {
  double subsample_rate = 0.01;
  std::vector<double> u;      // (column + 0.5) / width
  std::vector<double> v;      // (row + 0.5) / height
  std::vector<double> depth;  // meters

  std::size_t size() const { return depth.size(); }
  // Empty when there are no samples.
  std::optional<std::array<Quantiles, 3>> summary() const;
  nlohmann::json quantiles_json() const;
  std::string to_csv() const;
};

// Bernoulli subsampling of valid pixels with a seeded generator. Frames are
// visited in the order given and pixels in row-major order, so the result is
// a pure function of (frames, rate, seed).
class DepthDistributionBuilder {
 public:
  DepthDistributionBuilder(double subsample_rate, std::uint64_t seed);

  void add(const DepthFrame& frame);
  const DepthDistribution& distribution() const { return dist_; }

 private:
  DepthDistribution dist_;
  std::mt19937_64 rng_;
};

DepthDistribution depth_distribution_stats(const std::vector<DepthFrame>& frames,
                                           double subsample_rate, std::uint64_t seed);

}  // namespace wildannot
