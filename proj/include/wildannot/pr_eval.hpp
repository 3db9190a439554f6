#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "wildannot/pose.hpp"

namespace wildannot {

using DescriptorMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// N records with D-dimensional global descriptors. Poses are camera poses for
// images and center poses for submaps.
struct DescriptorSet {
  std::vector<std::uint64_t> ids;
  DescriptorMatrix vectors;
  std::vector<Pose> poses;
  std::vector<std::string> sequence_labels;
  std::vector<double> timestamps;

  std::size_t size() const { return ids.size(); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  // Throws LengthMismatch if the per-record arrays disagree.
  void validate() const;
  DescriptorSet subset(std::span<const std::size_t> rows) const;
  // Records whose label satisfies `keep`, in original order.
  template <class Pred>
  DescriptorSet filter_labels(Pred keep) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
      if (keep(sequence_labels[i])) rows.push_back(i);
    }
    return subset(rows);
  }
  // Distinct labels in order of first appearance.
  std::vector<std::string> labels() const;
};

// Binary 'WDSC' file plus `<path>.json` mapping id ranges to sequence labels.
DescriptorSet read_descriptors(const std::filesystem::path& path);
void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set);

struct Fold {
  int index = 0;  // 1..4
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Fold k tests on {V-0k, K-0k} and trains on every other given label.
// Throws MissingSequence unless V-01..V-04 and K-01..K-04 are all present.
std::vector<Fold> build_splits(const std::vector<std::string>& sequences);

struct PairMiningConfig {
  double positive_distance = 5.0;
  std::optional<double> positive_bearing = 15.0;  // degrees
  double negative_distance = 50.0;

  void validate() const;
};

struct MinedPairs {
  std::vector<std::vector<std::uint32_t>> positives;  // ascending, self excluded
  std::vector<std::vector<std::uint32_t>> negatives;
};

// Yaw of the optical axis (+z) projected onto the world xy-plane, degrees.
double camera_yaw_deg(const Pose& camera_pose);
// Absolute yaw difference wrapped to [0, 180].
double heading_difference_deg(const Pose& a, const Pose& b);

MinedPairs mine_pairs(std::span<const Pose> poses, const PairMiningConfig& config);

enum class EvalMode { kIntra, kInter };
enum class DescriptorMetric { kEuclidean, kCosine };

struct EvalConfig {
  double positive_threshold = 25.0;  // meters
  std::vector<int> recall_ns = {1, 5};
  // Intra mode: database records of the query's sequence with
  // |t_db - t_query| < window are not retrievable.
  double intra_exclusion_window = 600.0;
  EvalMode mode = EvalMode::kIntra;
  DescriptorMetric metric = DescriptorMetric::kEuclidean;

  void validate() const;
};

struct RecallCell {
  std::string query_sequence;
  std::string database_sequence;
  std::size_t query_total = 0;
  std::size_t query_count = 0;                  // queries with a positive
  std::vector<std::uint32_t> excluded_queries;  // positions within the cell's queries
  std::vector<double> recall;                   // percent, one per recall_ns entry
  bool empty_denominator = false;
};

struct RecallReport {
  std::vector<int> recall_ns;
  std::vector<RecallCell> cells;
  // Mean over cells with a non-empty denominator; empty if none.
  std::vector<double> average;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// One cell per (query sequence, database sequence): intra pairs each
// sequence with itself, inter pairs each query sequence with every other
// database sequence. Throws DimensionMismatch or EmptyDatabase.
RecallReport evaluate_recall(const DescriptorSet& queries, const DescriptorSet& database,
                             const EvalConfig& config);
// Single-threaded reference with identical output.
RecallReport evaluate_recall_serial(const DescriptorSet& queries, const DescriptorSet& database,
                                    const EvalConfig& config);

// Each query sequence against the submaps of every sequence in its
// environment (the label prefix before '-'); cells are labeled with the
// environment name. The temporal exclusion window is not applied.
RecallReport evaluate_cross_modal(const DescriptorSet& image_queries,
                                  const DescriptorSet& submap_database, const EvalConfig& config);

// "V" -> "Venman", "K" -> "Karawatha", otherwise the prefix itself.
std::string environment_of(const std::string& sequence_label);

// Recall for one query block against one database block: the building block
// of the report, exposed for testing.
RecallCell evaluate_cell(const DescriptorSet& queries, const DescriptorSet& database,
                         const EvalConfig& config, bool parallel = true);

}  // namespace wildannot
