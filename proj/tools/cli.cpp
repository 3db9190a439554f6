#include "wildannot/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "wildannot/annotate.hpp"
#include "wildannot/depth_eval.hpp"
#include "wildannot/error.hpp"
#include "wildannot/io.hpp"
#include "wildannot/logging.hpp"
#include "wildannot/manifest.hpp"
#include "wildannot/normals.hpp"
#include "wildannot/parallel.hpp"
#include "wildannot/pr_eval.hpp"
#include "wildannot/render.hpp"
#include "wildannot/submap.hpp"
#include "wildannot/synth.hpp"

namespace wildannot {
namespace {

namespace fs = std::filesystem;

// Flag value if given on the command line, else the manifest's config entry,
// else the built-in default the flag variable was initialized with.
template <class T>
T layered(const CLI::Option* opt, const T& flag_value, const nlohmann::json& config,
          const char* key) {
  if (opt->count() > 0 || !config.contains(key)) return flag_value;
  try {
    return config.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest config '") + key + "': " + e.what());
  }
}

double path_length_km(const Trajectory& trajectory) {
  double total = 0.0;
  const auto& poses = trajectory.poses();
  for (std::size_t i = 1; i < poses.size(); ++i) {
    total += (poses[i].translation() - poses[i - 1].translation()).norm();
  }
  return total / 1000.0;
}

void check_declared_count(const std::string& what, std::optional<std::size_t> declared,
                          std::size_t computed) {
  if (!declared || *declared == computed) return;
  log_warning("declared " + what + " " + std::to_string(*declared) + " differs from computed " +
              std::to_string(computed));
}

struct Inputs {
  SequenceManifest manifest;
  PointCloudMap map;
  Trajectory trajectory;
};

Inputs load_inputs(const fs::path& manifest_path) {
  Inputs in;
  in.manifest = read_manifest(manifest_path);
  in.map = read_ply_map(in.manifest.point_cloud_path);
  in.trajectory = read_trajectory_csv(in.manifest.trajectory_path);
  log_info("loaded " + std::to_string(in.map.size()) + " points and " +
           std::to_string(in.trajectory.size()) + " poses for " + in.manifest.sequence_label);
  return in;
}

// Depth images below `root`, as sorted relative paths. Normal images written
// next to depth images are left out.
std::vector<fs::path> depth_images(const fs::path& root) {
  if (!fs::is_directory(root)) throw InvalidArgument("not a directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    const fs::path rel = fs::relative(entry.path(), root);
    if (rel.has_parent_path() && rel.parent_path().filename() == "normal") continue;
    out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct AnnotateArgs {
  std::string manifest;
  std::string output;
  std::string normals_cache;
  double gamma = GhprConfig{}.gamma;
  double crop_radius = GhprConfig{}.crop_radius;
  double normal_radius = NormalOptions{}.radius;
  int min_neighbors = NormalOptions{}.min_neighbors;
  bool debug_dump = false;
};

int cmd_annotate(const AnnotateArgs& a, const CLI::App& sub, std::ostream& out) {
  Inputs in = load_inputs(a.manifest);
  const CameraRig rig = read_camera_rig(in.manifest.camera_rig_path);
  const std::vector<double> frames = read_timestamps(in.manifest.frame_timestamps_path);
  const nlohmann::json& cfg = in.manifest.config;

  AnnotateConfig config;
  config.ghpr.gamma = layered(sub.get_option("--gamma"), a.gamma, cfg, "gamma");
  config.ghpr.crop_radius = layered(sub.get_option("--crop-radius"), a.crop_radius, cfg, "crop_radius");
  config.debug_dump = layered(sub.get_option("--debug-dump"), a.debug_dump, cfg, "debug_dump");
  config.ghpr.validate();
  NormalOptions nopt;
  nopt.radius = layered(sub.get_option("--normal-radius"), a.normal_radius, cfg, "normal_radius");
  nopt.min_neighbors =
      layered(sub.get_option("--min-neighbors"), a.min_neighbors, cfg, "normal_min_neighbors");
  if (!(nopt.radius > 0.0) || nopt.min_neighbors < 1) {
    throw InvalidArgument("normal radius and minimum neighbor count must be positive");
  }

  std::optional<fs::path> cache;
  if (!a.normals_cache.empty()) {
    cache = a.normals_cache;
  } else if (in.manifest.normals_cache_path) {
    cache = *in.manifest.normals_cache_path;
  }
  NormalEstimate normals;
  if (cache && fs::exists(*cache)) {
    normals = decode_normals_cache(read_binary_file(*cache));
    if (normals.size() != in.map.size()) {
      throw ParseError("normals cache " + cache->string() + " holds " +
                       std::to_string(normals.size()) + " normals for a map of " +
                       std::to_string(in.map.size()) + " points");
    }
    normals.oriented = resolve_observation_origins(in.map, &in.trajectory).has_value();
    log_info("read normals from " + cache->string());
  } else {
    normals = estimate_normals(in.map, nopt, &in.trajectory);
    if (cache) write_binary_file(*cache, encode_normals_cache(normals));
  }

  const AnnotationIndex index = annotate_sequence(in.map, normals, in.trajectory, rig, frames,
                                                  in.manifest.sequence_label, a.output, config);
  if (in.manifest.declared_stats) {
    const DeclaredStats& d = *in.manifest.declared_stats;
    check_declared_count("image count", d.image_count, index.frames.size());
    if (d.distance_km) {
      const double km = path_length_km(in.trajectory);
      if (std::abs(km - *d.distance_km) > 0.05 * std::max(*d.distance_km, 1e-3)) {
        log_warning("declared distance " + std::to_string(*d.distance_km) +
                    " km differs from trajectory length " + std::to_string(km) + " km");
      }
    }
  }
  const StageCounts& t = index.totals;
  nlohmann::json summary = {{"sequence", index.sequence},
                            {"frames_written", index.frames.size()},
                            {"frames_skipped", index.skipped.size()},
                            {"stage_totals",
                             {{"candidates", t.candidates},
                              {"after_frustum", t.after_frustum},
                              {"after_backface", t.after_backface},
                              {"after_ghpr", t.after_ghpr}}}};
  out << summary.dump() << '\n';
  return kExitOk;
}

struct SubmapArgs {
  std::string manifest;
  std::string output;
  double radius = SubmapSpec{}.radius;
  double window = *SubmapSpec{}.time_window;
  double stride = SubmapSpec{}.stride;
};

int cmd_submaps(const SubmapArgs& a, const CLI::App& sub, std::ostream& out) {
  Inputs in = load_inputs(a.manifest);
  const nlohmann::json& cfg = in.manifest.config;
  SubmapSpec spec;
  spec.radius = layered(sub.get_option("--radius"), a.radius, cfg, "submap_radius");
  spec.time_window = layered(sub.get_option("--window"), a.window, cfg, "submap_window");
  spec.stride = layered(sub.get_option("--stride"), a.stride, cfg, "submap_stride");
  spec.validate();

  const std::string& seq = in.manifest.sequence_label;
  const std::vector<Submap> submaps = extract_submap_sequence(in.map, in.trajectory, spec);
  const fs::path dir = fs::path(a.output) / seq;
  fs::create_directories(dir);
  nlohmann::json entries = nlohmann::json::array();
  for (const Submap& s : submaps) {
    const std::int64_t ns = to_nanoseconds(s.center_pose.timestamp());
    const std::string name = "submap_" + seq + "_" + std::to_string(ns) + ".ply";
    write_ply_points_f32(dir / name, s.points);
    entries.push_back({{"file", name},
                       {"timestamp", s.center_pose.timestamp()},
                       {"timestamp_ns", ns},
                       {"pose", pose_to_json(s.center_pose)},
                       {"point_count", s.points.size()}});
  }
  nlohmann::json index = {{"sequence", seq},
                          {"radius", spec.radius},
                          {"time_window", *spec.time_window},
                          {"stride", spec.stride},
                          {"submaps", entries}};
  write_text_file(dir / "submaps.json", index.dump(2) + "\n");
  if (in.manifest.declared_stats) {
    check_declared_count("submap count", in.manifest.declared_stats->submap_count, submaps.size());
  }
  out << nlohmann::json{{"sequence", seq}, {"submaps_written", submaps.size()}}.dump() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string queries;
  std::string database;
  std::string task = "vpr";
  std::string mode = "intra";
  std::string metric = "euclidean";
  std::string output;
  int fold = 0;
  double threshold = 0.0;  // 0 selects the task default
  double exclusion_window = EvalConfig{}.intra_exclusion_window;
  std::vector<int> recall_at = EvalConfig{}.recall_ns;
};

double task_threshold(const std::string& task) { return task == "lpr" ? 3.0 : 25.0; }

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  DescriptorSet queries = read_descriptors(a.queries);
  DescriptorSet database = a.database.empty() ? queries : read_descriptors(a.database);
  if (a.task == "cmpr" && a.database.empty()) {
    throw InvalidArgument("--task cmpr needs a --database of submap descriptors");
  }

  EvalConfig config;
  config.positive_threshold = a.threshold > 0.0 ? a.threshold : task_threshold(a.task);
  config.recall_ns = a.recall_at;
  config.intra_exclusion_window = a.exclusion_window;
  config.mode = a.mode == "inter" ? EvalMode::kInter : EvalMode::kIntra;
  config.metric = a.metric == "cosine" ? DescriptorMetric::kCosine : DescriptorMetric::kEuclidean;
  config.validate();

  if (a.fold > 0) {
    std::vector<std::string> labels = queries.labels();
    for (const auto& l : database.labels()) {
      if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    }
    const Fold fold = build_splits(labels)[static_cast<std::size_t>(a.fold - 1)];
    const auto in_test = [&](const std::string& l) {
      return std::find(fold.test.begin(), fold.test.end(), l) != fold.test.end();
    };
    queries = queries.filter_labels(in_test);
    // Cross-modal retrieval searches the submaps of every sequence.
    if (a.task != "cmpr") database = database.filter_labels(in_test);
  }

  const RecallReport report = a.task == "cmpr" ? evaluate_cross_modal(queries, database, config)
                                               : evaluate_recall(queries, database, config);
  nlohmann::json j = report.to_json();
  j["task"] = a.task;
  j["mode"] = a.task == "cmpr" ? "cross_modal" : a.mode;
  j["positive_threshold"] = config.positive_threshold;
  if (a.fold > 0) j["fold"] = a.fold;

  if (!a.output.empty()) {
    fs::create_directories(a.output);
    std::string stem = "recall_" + a.task + "_" + (a.task == "cmpr" ? "cross_modal" : a.mode);
    if (a.fold > 0) stem += "_fold" + std::to_string(a.fold);
    write_text_file(fs::path(a.output) / (stem + ".json"), j.dump(2) + "\n");
    write_text_file(fs::path(a.output) / (stem + ".csv"), report.to_csv());
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct DepthEvalArgs {
  std::string pred;
  std::string gt;
  std::string output;
  bool delta1_literal = false;
};

int cmd_depth_eval(const DepthEvalArgs& a, std::ostream& out) {
  const Delta1Mode mode = a.delta1_literal ? Delta1Mode::kLiteral : Delta1Mode::kRatio;
  std::map<std::string, DepthMetricsAccumulator> per_sequence;
  DepthMetricsAccumulator total(mode);
  std::size_t pairs = 0;
  nlohmann::json skipped = nlohmann::json::array();
  for (const fs::path& rel : depth_images(a.gt)) {
    const fs::path pred_path = fs::path(a.pred) / rel;
    if (!fs::exists(pred_path)) continue;
    const DepthFrame gt = decode_depth(read_binary_file(fs::path(a.gt) / rel));
    const DepthFrame pred = decode_depth(read_binary_file(pred_path));
    if (pred.width != gt.width || pred.height != gt.height) {
      log_warning("skipping " + rel.string() + ": prediction " + std::to_string(pred.width) + "x" +
                  std::to_string(pred.height) + " vs ground truth " + std::to_string(gt.width) +
                  "x" + std::to_string(gt.height));
      skipped.push_back(rel.string());
      continue;
    }
    const std::string seq = rel.has_parent_path() ? rel.begin()->string() : "";
    DepthMetricsAccumulator frame(mode);
    frame.add(pred, gt);
    per_sequence.try_emplace(seq, mode).first->second.merge(frame);
    total.merge(frame);
    ++pairs;
  }
  if (pairs == 0) throw InvalidArgument("no matching prediction / ground-truth pairs found");

  nlohmann::json j;
  j["delta1_mode"] = a.delta1_literal ? "literal" : "ratio";
  j["pairs"] = pairs;
  j["skipped"] = skipped;
  j["aggregate"] = total.metrics().to_json();
  j["sequences"] = nlohmann::json::object();
  for (const auto& [seq, acc] : per_sequence) {
    if (!seq.empty() && acc.count() > 0) j["sequences"][seq] = acc.metrics().to_json();
  }
  if (!a.output.empty()) write_text_file(a.output, j.dump(2) + "\n");
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct StatsArgs {
  std::string depth_dir;
  std::string output;
  double rate = 0.01;
  std::uint64_t seed = 0;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  DepthDistributionBuilder builder(a.rate, a.seed);
  std::size_t frames = 0;
  for (const fs::path& rel : depth_images(a.depth_dir)) {
    builder.add(decode_depth(read_binary_file(fs::path(a.depth_dir) / rel)));
    ++frames;
  }
  const DepthDistribution& dist = builder.distribution();
  nlohmann::json q = dist.quantiles_json();
  q["frames"] = frames;
  q["seed"] = a.seed;
  fs::create_directories(a.output);
  write_text_file(fs::path(a.output) / "depth_distribution.csv", dist.to_csv());
  write_text_file(fs::path(a.output) / "depth_quantiles.json", q.dump(2) + "\n");
  out << q.dump(2) << '\n';
  return kExitOk;
}

struct SynthArgs {
  std::string kind = "forest";
  std::string output;
  std::string label = "S-01";
  std::uint64_t seed = 0;
  std::size_t frames = 10;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticScene scene;
  Trajectory trajectory;
  const double rate = 15.0;
  const double span = std::max(10.0 / 1.5, static_cast<double>(a.frames) / rate);
  if (a.kind == "forest") {
    scene = gen_forest({}, a.seed);
    trajectory = straight_trajectory({-5, 0, 1.5}, {5, 0, 1.5}, 0.0, span, 10.0);
  } else if (a.kind == "plane") {
    scene = gen_plane({}, a.seed);
    trajectory = straight_trajectory({-4, 0, 2}, {4, 0, 2}, 0.0, span, 10.0);
  } else {
    scene = gen_sphere({}, a.seed);
    trajectory = straight_trajectory({-25, 0, 0}, {-15, 0, 0}, 0.0, span, 10.0);
  }
  const fs::path manifest =
      export_scene(a.output, a.label, scene, trajectory, forward_looking_rig(),
                   frame_times(0.0, a.frames, rate));
  out << nlohmann::json{{"manifest", manifest.string()}, {"points", scene.map.size()}}.dump()
      << '\n';
  return kExitOk;
}

int jobs_from_environment() {
  const char* env = std::getenv("WILDANNOT_JOBS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const int jobs = std::stoi(env, &used);
    if (used == std::string(env).size() && jobs > 0) return jobs;
  } catch (const std::exception&) {
  }
  log_warning(std::string("ignoring invalid WILDANNOT_JOBS='") + env + "'");
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth, normal and place-recognition annotation tools for lidar-camera sequences",
               "wildannot"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  int jobs = 0;
  bool quiet = false, verbose = false;
  app.add_option("--jobs,-j", jobs, "Worker threads (0: WILDANNOT_JOBS, else all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet,-q", quiet, "Suppress warnings");
  app.add_flag("--verbose,-v", verbose, "Log progress to stderr");

  AnnotateArgs an;
  CLI::App* annotate = app.add_subcommand("annotate", "Render depth and normal annotations");
  annotate->add_option("--manifest,-m", an.manifest, "Sequence manifest JSON")->required();
  annotate->add_option("--output,-o", an.output, "Output directory")->required();
  annotate->add_option("--gamma", an.gamma, "Spherical reflection exponent (negative)");
  annotate->add_option("--crop-radius", an.crop_radius, "Map crop radius around the camera [m]");
  annotate->add_option("--normal-radius", an.normal_radius, "Normal estimation radius [m]");
  annotate->add_option("--min-neighbors", an.min_neighbors, "Minimum neighbors for a normal");
  annotate->add_option("--normals-cache", an.normals_cache,
                       "Normals cache file (read if present, written otherwise)");
  annotate->add_flag("--debug-dump", an.debug_dump, "Write per-point drop stages per frame");

  SubmapArgs sm;
  CLI::App* submaps = app.add_subcommand("submaps", "Extract lidar submaps along the trajectory");
  submaps->add_option("--manifest,-m", sm.manifest, "Sequence manifest JSON")->required();
  submaps->add_option("--output,-o", sm.output, "Output directory")->required();
  submaps->add_option("--radius", sm.radius, "Submap radius [m]");
  submaps->add_option("--window", sm.window, "Time window width centered on each pose [s]");
  submaps->add_option("--stride", sm.stride, "Spacing of submap centers [s]");

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate place-recognition recall");
  eval->add_option("--queries", ev.queries, "Query descriptor file")->required();
  eval->add_option("--database", ev.database, "Database descriptor file (default: the queries)");
  eval->add_option("--task", ev.task, "vpr, lpr or cmpr")
      ->check(CLI::IsMember({"vpr", "lpr", "cmpr"}));
  eval->add_option("--mode", ev.mode, "intra or inter (ignored for cmpr)")
      ->check(CLI::IsMember({"intra", "inter"}));
  eval->add_option("--fold", ev.fold, "Evaluate one cross-split fold 1-4 (0: all sequences)")
      ->check(CLI::Range(0, 4));
  eval->add_option("--threshold", ev.threshold,
                   "Positive distance [m] (0: 25 for vpr and cmpr, 3 for lpr)")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--exclusion-window", ev.exclusion_window,
                   "Intra-sequence temporal exclusion [s]");
  eval->add_option("--recall-at", ev.recall_at, "Recall@N cutoffs")->delimiter(',');
  eval->add_option("--metric", ev.metric, "euclidean or cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  eval->add_option("--output,-o", ev.output, "Directory for the JSON and CSV reports");

  DepthEvalArgs de;
  CLI::App* depth_eval = app.add_subcommand("depth-eval", "Compare predicted and reference depth");
  depth_eval->add_option("--pred", de.pred, "Directory of predicted depth PNGs")->required();
  depth_eval->add_option("--gt", de.gt, "Directory of reference depth PNGs")->required();
  depth_eval->add_option("--output,-o", de.output, "Metrics JSON file");
  depth_eval->add_flag("--delta1-literal", de.delta1_literal,
                       "Use |pred - gt| / gt <= 0.25 instead of the 1.25 ratio test");

  StatsArgs st;
  CLI::App* stats = app.add_subcommand("stats", "Subsample depth pixels for distribution plots");
  stats->add_option("--depth-dir", st.depth_dir, "Directory of depth PNGs")->required();
  stats->add_option("--output,-o", st.output, "Output directory")->required();
  stats->add_option("--rate", st.rate, "Fraction of valid pixels sampled")
      ->check(CLI::Range(0.0, 1.0));
  stats->add_option("--seed", st.seed, "Sampling seed");

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth", "Export a synthetic sequence with a manifest");
  synth->add_option("--kind", sy.kind, "forest, plane or sphere")
      ->check(CLI::IsMember({"forest", "plane", "sphere"}));
  synth->add_option("--output,-o", sy.output, "Output directory")->required();
  synth->add_option("--label", sy.label, "Sequence label");
  synth->add_option("--seed", sy.seed, "Generator seed");
  synth->add_option("--frames", sy.frames, "Number of camera frames")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  set_log_level(quiet ? LogLevel::kQuiet : verbose ? LogLevel::kInfo : LogLevel::kWarning);
  set_num_jobs(jobs > 0 ? jobs : jobs_from_environment());

  try {
    if (*annotate) return cmd_annotate(an, *annotate, out);
    if (*submaps) return cmd_submaps(sm, *submaps, out);
    if (*eval) return cmd_eval(ev, out);
    if (*depth_eval) return cmd_depth_eval(de, out);
    if (*stats) return cmd_stats(st, out);
    if (*synth) return cmd_synth(sy, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace wildannot
