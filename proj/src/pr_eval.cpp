#include "wildannot/pr_eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "wildannot/error.hpp"
#include "wildannot/io.hpp"
#include "wildannot/kdtree.hpp"

namespace wildannot {
namespace {

constexpr char kMagic[4] = {'W', 'D', 'S', 'C'};

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T take(std::span<const std::uint8_t> bytes, std::size_t& at, const std::string& path) {
  if (at + sizeof(T) > bytes.size()) throw ParseError(path + ": truncated descriptor file");
  T v;
  std::memcpy(&v, bytes.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

double descriptor_distance(const float* a, const float* b, int dim, DescriptorMetric metric) {
  if (metric == DescriptorMetric::kEuclidean) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
      s += d * d;
    }
    return std::sqrt(s);
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int k = 0; k < dim; ++k) {
    ab += static_cast<double>(a[k]) * b[k];
    aa += static_cast<double>(a[k]) * a[k];
    bb += static_cast<double>(b[k]) * b[k];
  }
  if (aa == 0.0 || bb == 0.0) return 1.0;
  return 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
}

// Rank (0-based) of the best-ranked retrievable positive, or -1 if none.
long best_positive_rank(const DescriptorSet& queries, std::size_t q, const DescriptorSet& db,
                        const EvalConfig& config, std::vector<double>& dist,
                        std::vector<std::uint8_t>& usable) {
  const std::size_t n = db.size();
  const int dim = db.dim();
  const float* qv = queries.vectors.row(static_cast<Eigen::Index>(q)).data();
  const Eigen::Vector3d& qx = queries.poses[q].translation();
  const double r2 = config.positive_threshold * config.positive_threshold;
  long best = -1;
  for (std::size_t j = 0; j < n; ++j) {
    usable[j] = 1;
    if (config.mode == EvalMode::kIntra && db.sequence_labels[j] == queries.sequence_labels[q] &&
        std::abs(db.timestamps[j] - queries.timestamps[q]) < config.intra_exclusion_window) {
      usable[j] = 0;
      continue;
    }
    dist[j] = descriptor_distance(qv, db.vectors.row(static_cast<Eigen::Index>(j)).data(), dim,
                                  config.metric);
    if ((db.poses[j].translation() - qx).squaredNorm() <= r2) {
      if (best < 0 || dist[j] < dist[static_cast<std::size_t>(best)]) best = static_cast<long>(j);
    }
  }
  if (best < 0) return -1;
  const double d = dist[static_cast<std::size_t>(best)];
  long rank = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!usable[j]) continue;
    if (dist[j] < d || (dist[j] == d && static_cast<long>(j) < best)) ++rank;
  }
  return rank;
}

void finish_report(RecallReport& report) {
  report.average.clear();
  std::size_t used = 0;
  std::vector<double> sum(report.recall_ns.size(), 0.0);
  for (const RecallCell& c : report.cells) {
    if (c.empty_denominator) continue;
    ++used;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += c.recall[k];
  }
  if (used == 0) return;
  for (double& s : sum) s /= static_cast<double>(used);
  report.average = sum;
}

void check_inputs(const DescriptorSet& queries, const DescriptorSet& database,
                  const EvalConfig& config) {
  config.validate();
  queries.validate();
  database.validate();
  if (database.size() == 0) throw EmptyDatabase("database has no records");
  if (queries.size() > 0 && queries.dim() != database.dim()) {
    throw DimensionMismatch("query descriptors have dimension " + std::to_string(queries.dim()) +
                            ", database " + std::to_string(database.dim()));
  }
}

RecallReport evaluate_impl(const DescriptorSet& queries, const DescriptorSet& database,
                           const EvalConfig& config, bool parallel) {
  check_inputs(queries, database, config);
  RecallReport report;
  report.recall_ns = config.recall_ns;
  const auto db_labels = database.labels();
  for (const std::string& ql : queries.labels()) {
    const DescriptorSet q = queries.filter_labels([&](const std::string& l) { return l == ql; });
    if (config.mode == EvalMode::kIntra) {
      const DescriptorSet d = database.filter_labels([&](const std::string& l) { return l == ql; });
      RecallCell cell = evaluate_cell(q, d, config, parallel);
      cell.query_sequence = ql;
      cell.database_sequence = ql;
      report.cells.push_back(std::move(cell));
      continue;
    }
    for (const std::string& dl : db_labels) {
      if (dl == ql) continue;
      const DescriptorSet d = database.filter_labels([&](const std::string& l) { return l == dl; });
      RecallCell cell = evaluate_cell(q, d, config, parallel);
      cell.query_sequence = ql;
      cell.database_sequence = dl;
      report.cells.push_back(std::move(cell));
    }
  }
  finish_report(report);
  return report;
}

nlohmann::json recall_json(const std::vector<int>& ns, const std::vector<double>& values,
                           bool empty) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const std::string key = "R@" + std::to_string(ns[k]);
    if (empty || k >= values.size()) {
      j[key] = nullptr;
    } else {
      j[key] = values[k];
    }
  }
  return j;
}

}  // namespace

void DescriptorSet::validate() const {
  const std::size_t n = ids.size();
  if (static_cast<std::size_t>(vectors.rows()) != n || poses.size() != n ||
      sequence_labels.size() != n || timestamps.size() != n) {
    throw LengthMismatch("descriptor set arrays disagree in length");
  }
}

DescriptorSet DescriptorSet::subset(std::span<const std::size_t> rows) const {
  DescriptorSet out;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), vectors.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    out.ids.push_back(ids[i]);
    out.vectors.row(static_cast<Eigen::Index>(k)) = vectors.row(static_cast<Eigen::Index>(i));
    out.poses.push_back(poses[i]);
    out.sequence_labels.push_back(sequence_labels[i]);
    out.timestamps.push_back(timestamps[i]);
  }
  return out;
}

std::vector<std::string> DescriptorSet::labels() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& l : sequence_labels) {
    if (seen.insert(l).second) out.push_back(l);
  }
  return out;
}

DescriptorSet read_descriptors(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_binary_file(path);
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError(where + ": not a WDSC descriptor file");
  }
  std::size_t at = 4;
  const auto count = take<std::uint32_t>(bytes, at, where);
  const auto dim = take<std::uint32_t>(bytes, at, where);
  const std::size_t record = 8 + 8 + 12 + 16 + 4ull * dim;
  if (bytes.size() != 12 + record * count) {
    throw ParseError(where + ": size does not match header (" + std::to_string(count) +
                     " records of dimension " + std::to_string(dim) + ")");
  }
  const std::filesystem::path sidecar = path.string() + ".json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(sidecar.string() + ": " + e.what());
  }
  struct Range {
    std::uint64_t first, last;
    std::string label;
  };
  std::vector<Range> ranges;
  try {
    for (const auto& s : meta.at("sequences")) {
      ranges.push_back({s.at("first_id").get<std::uint64_t>(), s.at("last_id").get<std::uint64_t>(),
                        s.at("label").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(sidecar.string() + ": " + e.what());
  }

  DescriptorSet set;
  set.vectors.resize(count, dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto id = take<std::uint64_t>(bytes, at, where);
    const auto t = take<double>(bytes, at, where);
    float x[3], q[4];
    for (float& v : x) v = take<float>(bytes, at, where);
    for (float& v : q) v = take<float>(bytes, at, where);
    for (std::uint32_t k = 0; k < dim; ++k) set.vectors(i, k) = take<float>(bytes, at, where);
    const auto it = std::find_if(ranges.begin(), ranges.end(),
                                 [&](const Range& r) { return id >= r.first && id <= r.last; });
    if (it == ranges.end()) {
      throw ParseError(where + ": record id " + std::to_string(id) + " has no sequence label");
    }
    set.ids.push_back(id);
    set.timestamps.push_back(t);
    set.poses.emplace_back(Eigen::Quaterniond(q[3], q[0], q[1], q[2]),
                           Eigen::Vector3d(x[0], x[1], x[2]), t);
    set.sequence_labels.push_back(it->label);
  }
  return set;
}

void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set) {
  set.validate();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put(out, static_cast<std::uint32_t>(set.size()));
  put(out, static_cast<std::uint32_t>(set.dim()));
  nlohmann::json sequences = nlohmann::json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    put(out, set.ids[i]);
    put(out, set.timestamps[i]);
    const Eigen::Vector3d& x = set.poses[i].translation();
    const Eigen::Quaterniond& q = set.poses[i].rotation();
    for (double v : {x.x(), x.y(), x.z(), q.x(), q.y(), q.z(), q.w()}) put(out, static_cast<float>(v));
    for (int k = 0; k < set.dim(); ++k) put(out, set.vectors(static_cast<Eigen::Index>(i), k));
    if (!sequences.empty() && sequences.back()["label"] == set.sequence_labels[i]) {
      sequences.back()["last_id"] = set.ids[i];
    } else {
      sequences.push_back(
          {{"label", set.sequence_labels[i]}, {"first_id", set.ids[i]}, {"last_id", set.ids[i]}});
    }
  }
  write_binary_file(path, out);
  write_text_file(path.string() + ".json", nlohmann::json{{"sequences", sequences}}.dump(2) + "\n");
}

std::vector<Fold> build_splits(const std::vector<std::string>& sequences) {
  std::vector<std::string> missing;
  for (const char* env : {"V", "K"}) {
    for (int k = 1; k <= 4; ++k) {
      const std::string label = std::string(env) + "-0" + std::to_string(k);
      if (std::find(sequences.begin(), sequences.end(), label) == sequences.end()) {
        missing.push_back(label);
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing sequences:";
    for (const auto& m : missing) msg += " " + m;
    throw MissingSequence(msg);
  }
  std::vector<Fold> folds;
  for (int k = 1; k <= 4; ++k) {
    Fold f;
    f.index = k;
    f.test = {"V-0" + std::to_string(k), "K-0" + std::to_string(k)};
    std::set<std::string> seen;
    for (const auto& s : sequences) {
      if (s == f.test[0] || s == f.test[1] || !seen.insert(s).second) continue;
      f.train.push_back(s);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

void PairMiningConfig::validate() const {
  if (!(positive_distance > 0.0 && positive_distance < negative_distance)) {
    throw InvalidArgument("pair mining requires 0 < positive_distance < negative_distance");
  }
  if (positive_bearing && !(*positive_bearing >= 0.0)) {
    throw InvalidArgument("positive_bearing must be non-negative");
  }
}

double camera_yaw_deg(const Pose& camera_pose) {
  const Eigen::Vector3d axis = camera_pose.rotation() * Eigen::Vector3d::UnitZ();
  return std::atan2(axis.y(), axis.x()) * 180.0 / M_PI;
}

double heading_difference_deg(const Pose& a, const Pose& b) {
  double d = std::fmod(std::abs(camera_yaw_deg(a) - camera_yaw_deg(b)), 360.0);
  if (d > 180.0) d = 360.0 - d;
  return d;
}

MinedPairs mine_pairs(std::span<const Pose> poses, const PairMiningConfig& config) {
  config.validate();
  const std::size_t n = poses.size();
  MinedPairs out;
  out.positives.resize(n);
  out.negatives.resize(n);
  std::vector<Eigen::Vector3d> xs(n);
  std::vector<double> yaw(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = poses[i].translation();
    yaw[i] = camera_yaw_deg(poses[i]);
  }
  const KdTree tree(xs);
  const double neg2 = config.negative_distance * config.negative_distance;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (PointIndex j : tree.radius_search(xs[i], config.positive_distance)) {
      if (j == i) continue;
      if (config.positive_bearing) {
        double d = std::fmod(std::abs(yaw[i] - yaw[j]), 360.0);
        if (d > 180.0) d = 360.0 - d;
        if (d > *config.positive_bearing) continue;
      }
      out.positives[i].push_back(j);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if ((xs[j] - xs[i]).squaredNorm() > neg2) out.negatives[i].push_back(static_cast<std::uint32_t>(j));
    }
  }
  return out;
}

void EvalConfig::validate() const {
  if (!(positive_threshold > 0.0)) throw InvalidArgument("positive_threshold must be positive");
  if (recall_ns.empty()) throw InvalidArgument("recall_ns must not be empty");
  for (int n : recall_ns) {
    if (n <= 0) throw InvalidArgument("recall_ns entries must be positive");
  }
  if (!(intra_exclusion_window >= 0.0)) {
    throw InvalidArgument("intra_exclusion_window must be non-negative");
  }
}

RecallCell evaluate_cell(const DescriptorSet& queries, const DescriptorSet& database,
                         const EvalConfig& config, bool parallel) {
  RecallCell cell;
  cell.query_total = queries.size();
  cell.recall.assign(config.recall_ns.size(), 0.0);
  std::vector<long> ranks(queries.size(), -1);
  const auto nq = static_cast<std::int64_t>(queries.size());
  if (database.size() > 0) {
#pragma omp parallel if (parallel)
    {
      std::vector<double> dist(database.size());
      std::vector<std::uint8_t> usable(database.size());
#pragma omp for schedule(dynamic, 16)
      for (std::int64_t q = 0; q < nq; ++q) {
        ranks[static_cast<std::size_t>(q)] =
            best_positive_rank(queries, static_cast<std::size_t>(q), database, config, dist, usable);
      }
    }
  }
  std::vector<std::size_t> hits(config.recall_ns.size(), 0);
  for (std::size_t q = 0; q < ranks.size(); ++q) {
    if (ranks[q] < 0) {
      cell.excluded_queries.push_back(static_cast<std::uint32_t>(q));
      continue;
    }
    ++cell.query_count;
    for (std::size_t k = 0; k < hits.size(); ++k) {
      if (ranks[q] < config.recall_ns[k]) ++hits[k];
    }
  }
  cell.empty_denominator = cell.query_count == 0;
  if (!cell.empty_denominator) {
    for (std::size_t k = 0; k < hits.size(); ++k) {
      cell.recall[k] = 100.0 * static_cast<double>(hits[k]) / static_cast<double>(cell.query_count);
    }
  }
  return cell;
}

RecallReport evaluate_recall(const DescriptorSet& queries, const DescriptorSet& database,
                             const EvalConfig& config) {
  return evaluate_impl(queries, database, config, true);
}

RecallReport evaluate_recall_serial(const DescriptorSet& queries, const DescriptorSet& database,
                                    const EvalConfig& config) {
  return evaluate_impl(queries, database, config, false);
}

std::string environment_of(const std::string& sequence_label) {
  const std::string prefix = sequence_label.substr(0, sequence_label.find('-'));
  if (prefix == "V") return "Venman";
  if (prefix == "K") return "Karawatha";
  return prefix;
}

RecallReport evaluate_cross_modal(const DescriptorSet& image_queries,
                                  const DescriptorSet& submap_database, const EvalConfig& config) {
  check_inputs(image_queries, submap_database, config);
  // Images and submaps of the same moment are a legitimate match across
  // modalities, so no temporal exclusion applies.
  EvalConfig cell_config = config;
  cell_config.mode = EvalMode::kInter;
  RecallReport report;
  report.recall_ns = config.recall_ns;
  for (const std::string& ql : image_queries.labels()) {
    const std::string env = environment_of(ql);
    const DescriptorSet q = image_queries.filter_labels([&](const std::string& l) { return l == ql; });
    const DescriptorSet d = submap_database.filter_labels(
        [&](const std::string& l) { return environment_of(l) == env; });
    RecallCell cell = evaluate_cell(q, d, cell_config, true);
    cell.query_sequence = ql;
    cell.database_sequence = env;
    report.cells.push_back(std::move(cell));
  }
  finish_report(report);
  return report;
}

nlohmann::json RecallReport::to_json() const {
  nlohmann::json j;
  j["recall_ns"] = recall_ns;
  j["rows"] = nlohmann::json::array();
  // Environment columns: mean over the cells whose query belongs to it.
  std::map<std::string, std::pair<std::size_t, std::vector<double>>> env;
  std::vector<std::string> env_order;
  for (const RecallCell& c : cells) {
    j["rows"].push_back({{"query", c.query_sequence},
                         {"database", c.database_sequence},
                         {"environment", environment_of(c.query_sequence)},
                         {"queries", c.query_total},
                         {"queries_evaluated", c.query_count},
                         {"queries_excluded", c.excluded_queries.size()},
                         {"empty_denominator", c.empty_denominator},
                         {"recall", recall_json(recall_ns, c.recall, c.empty_denominator)}});
    const std::string e = environment_of(c.query_sequence);
    if (!env.count(e)) env_order.push_back(e);
    auto& slot = env[e];
    if (slot.second.empty()) slot.second.assign(recall_ns.size(), 0.0);
    if (c.empty_denominator) continue;
    ++slot.first;
    for (std::size_t k = 0; k < recall_ns.size(); ++k) slot.second[k] += c.recall[k];
  }
  nlohmann::json columns = nlohmann::json::object();
  for (const std::string& e : env_order) {
    auto [used, sums] = env[e];
    if (used > 0) {
      for (double& s : sums) s /= static_cast<double>(used);
    }
    columns[e] = recall_json(recall_ns, sums, used == 0);
  }
  columns["Average"] = recall_json(recall_ns, average, average.empty());
  j["columns"] = columns;
  j["average"] = recall_json(recall_ns, average, average.empty());
  return j;
}

std::string RecallReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "query,database,n,recall,queries_evaluated,queries_excluded\n";
  for (const RecallCell& c : cells) {
    for (std::size_t k = 0; k < recall_ns.size(); ++k) {
      os << c.query_sequence << ',' << c.database_sequence << ',' << recall_ns[k] << ',';
      if (c.empty_denominator) {
        os << "";
      } else {
        os << c.recall[k];
      }
      os << ',' << c.query_count << ',' << c.excluded_queries.size() << '\n';
    }
  }
  for (std::size_t k = 0; k < recall_ns.size() && !average.empty(); ++k) {
    os << "Average,," << recall_ns[k] << ',' << average[k] << ",,\n";
  }
  return os.str();
}

}  // namespace wildannot
