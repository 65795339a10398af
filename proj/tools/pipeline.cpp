#include "pipeline.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "seqpr/descriptor.hpp"
#include "seqpr/diffmat.hpp"
#include "seqpr/error.hpp"
#include "seqpr/ingest.hpp"
#include "seqpr/search.hpp"
#include "seqpr/sim.hpp"

namespace seqpr::app {

namespace fs = std::filesystem;
using nlohmann::json;

Command parse_command(std::string_view name) {
  if (name == "embed") return Command::kEmbed;
  if (name == "diff") return Command::kDiff;
  if (name == "search") return Command::kSearch;
  if (name == "eval") return Command::kEval;
  if (name == "tune") return Command::kTune;
  if (name == "simulate") return Command::kSimulate;
  if (name == "full") return Command::kFull;
  throw ValidationError("unknown command '" + std::string(name) +
                        "' (expected embed, diff, search, eval, tune, simulate or full)");
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kEmbed:
      return "embed";
    case Command::kDiff:
      return "diff";
    case Command::kSearch:
      return "search";
    case Command::kEval:
      return "eval";
    case Command::kTune:
      return "tune";
    case Command::kSimulate:
      return "simulate";
    case Command::kFull:
      return "full";
  }
  return "full";
}

namespace {

constexpr const char* kSeqSlamLabel = "SeqSLAM";
constexpr const char* kLayLabel = "LAY";
constexpr const char* kNnLabel = "NN";

class Stage {
 public:
  Stage(const RunConfig& cfg, const PipelineOptions& opt, PipelineResult& result)
      : cfg_(cfg), opt_(opt), result_(result) {}

  void simulate();
  void embed();
  void diff();
  void search();
  void eval();
  void tune();

 private:
  fs::path out(const char* name) const { return opt_.out_dir / name; }

  fs::path input(const std::optional<fs::path>& explicit_path, const char* name) const {
    return explicit_path ? *explicit_path : out(name);
  }

  bool have_scans() const {
    if (cfg_.ref_descriptors || cfg_.live_descriptors) return false;
    return fs::exists(input(cfg_.ref_scans, files::kRefScans)) &&
           fs::exists(input(cfg_.live_scans, files::kLiveScans));
  }

  std::string representation() const {
    return have_scans() ? std::string(to_string(cfg_.descriptor.mode)) : "precomputed";
  }

  void log(const std::string& msg) const {
    if (opt_.log) *opt_.log << msg << '\n';
  }

  void produced(const fs::path& p) { result_.outputs.push_back(p); }

  std::pair<DescriptorSequence, DescriptorSequence> load_descriptor_pair() const;
  GroundTruth load_ground_truth(std::size_t n_ref, std::size_t n_live) const;

  const RunConfig& cfg_;
  const PipelineOptions& opt_;
  PipelineResult& result_;
};

std::vector<PolarScan> require_scans(const fs::path& path) {
  auto scans = load_scans(path);
  if (scans.empty()) throw ValidationError(path.string() + ": no scans");
  return scans;
}

void Stage::simulate() {
  WorldSpec spec = cfg_.sim_spec ? load_world_spec(*cfg_.sim_spec)
                   : cfg_.sim_preset == "aliased-corridor" ? default_aliased_world()
                                                           : default_reverse_world();
  if (cfg_.sim_seed) spec.seed = *cfg_.sim_seed;
  const World w = generate_world(spec, cfg_.radius);
  fs::create_directories(opt_.out_dir);
  write_world_spec(out(files::kWorld), spec);
  produced(out(files::kWorld));
  if (spec.output == WorldOutput::kScans) {
    write_scans(out(files::kRefScans), w.ref_scans);
    write_scans(out(files::kLiveScans), w.live_scans);
    produced(out(files::kRefScans));
    produced(out(files::kLiveScans));
  } else {
    write_descriptors(out(files::kRefDescriptors), w.ref_descriptors);
    write_descriptors(out(files::kLiveDescriptors), w.live_descriptors);
    produced(out(files::kRefDescriptors));
    produced(out(files::kLiveDescriptors));
  }
  write_poses(out(files::kRefPoses), w.ref_poses);
  write_poses(out(files::kLivePoses), w.live_poses);
  produced(out(files::kRefPoses));
  produced(out(files::kLivePoses));
  log("simulated " + std::to_string(w.ref_poses.size()) + " reference and " +
      std::to_string(w.live_poses.size()) + " live frames");
}

void Stage::embed() {
  const auto ref = require_scans(input(cfg_.ref_scans, files::kRefScans));
  const auto live = require_scans(input(cfg_.live_scans, files::kLiveScans));
  auto ref_desc = embed_sequence(ref, cfg_.descriptor, opt_.threads);
  auto live_desc = embed_sequence(live, cfg_.descriptor, opt_.threads);
  write_descriptors(out(files::kRefDescriptors), ref_desc);
  write_descriptors(out(files::kLiveDescriptors), live_desc);
  produced(out(files::kRefDescriptors));
  produced(out(files::kLiveDescriptors));
  log("embedded " + std::to_string(ref.size()) + " + " + std::to_string(live.size()) +
      " scans as " + std::string(to_string(cfg_.descriptor.mode)) + " descriptors of dim " +
      std::to_string(ref_desc.dim()));
}

std::pair<DescriptorSequence, DescriptorSequence> Stage::load_descriptor_pair() const {
  return {load_descriptors(input(cfg_.ref_descriptors, files::kRefDescriptors)),
          load_descriptors(input(cfg_.live_descriptors, files::kLiveDescriptors))};
}

GroundTruth Stage::load_ground_truth(std::size_t n_ref, std::size_t n_live) const {
  const auto ref = load_poses(input(cfg_.ref_poses, files::kRefPoses));
  const auto live = load_poses(input(cfg_.live_poses, files::kLivePoses));
  if (ref.size() != n_ref || live.size() != n_live) {
    throw ValidationError("pose files hold " + std::to_string(ref.size()) + " reference / " +
                          std::to_string(live.size()) + " live poses but the descriptors hold " +
                          std::to_string(n_ref) + " / " + std::to_string(n_live) + " frames");
  }
  return gt_distance_matrix(ref, live, cfg_.radius);
}

void Stage::diff() {
  const auto [ref, live] = load_descriptor_pair();
  const auto raw = pairwise_distances(ref, live, opt_.threads);
  if (cfg_.enhancement > raw.n_ref()) {
    throw ValidationError("enhance.window R = " + std::to_string(cfg_.enhancement) +
                          " exceeds the number of reference frames (" +
                          std::to_string(raw.n_ref()) + ")");
  }
  const auto enhanced = enhance_contrast(raw, cfg_.enhancement, opt_.threads);
  write_difference_matrix(out(files::kDiffmat), raw);
  write_difference_matrix_csv(out(files::kDiffmatCsv), raw);
  write_difference_matrix(out(files::kEnhanced), enhanced);
  write_difference_matrix_csv(out(files::kEnhancedCsv), enhanced);
  for (const char* f : {files::kDiffmat, files::kDiffmatCsv, files::kEnhanced, files::kEnhancedCsv}) {
    produced(out(f));
  }
  log("difference matrix " + std::to_string(raw.n_ref()) + " x " + std::to_string(raw.n_live()) +
      ", enhanced with R = " + std::to_string(cfg_.enhancement));
}

void Stage::search() {
  const auto d = read_difference_matrix(out(files::kEnhanced));
  if (!d.enhanced) throw ValidationError(out(files::kEnhanced).string() + " is not enhanced");
  if (cfg_.search.window > d.n_live()) {
    throw ValidationError("search.window W = " + std::to_string(cfg_.search.window) +
                          " exceeds the number of live frames (" + std::to_string(d.n_live()) +
                          "); W must be <= N_live");
  }
  SearchConfig forward = cfg_.search;
  forward.direction = SearchDirection::kForwardOnly;
  SearchConfig both = cfg_.search;
  both.direction = SearchDirection::kForwardAndBackward;
  const auto m_forward = run_search(d, forward, opt_.threads);
  const auto m_both = run_search(d, both, opt_.threads);
  write_matches_csv(out(files::kMatchesSeqslam), m_forward);
  write_matches_csv(out(files::kMatchesLay), m_both);
  write_matches_csv(out(files::kMatches),
                    cfg_.search.direction == SearchDirection::kForwardOnly ? m_forward : m_both);
  const auto grids = score_grids(d, cfg_.search, opt_.threads);
  write_matrix_csv(out(files::kScoreSums), grids.sums);
  write_matrix_csv(out(files::kScoreRelative), grids.relative);
  for (const char* f : {files::kMatchesSeqslam, files::kMatchesLay, files::kMatches,
                        files::kScoreSums, files::kScoreRelative}) {
    produced(out(f));
  }
  std::size_t backward = 0;
  for (const auto& e : m_both.entries) backward += e.matched() && e.direction == MatchDirection::kBackward;
  log("searched " + std::to_string(m_both.entries.size()) + " queries with W = " +
      std::to_string(cfg_.search.window) + "; " + std::to_string(backward) +
      " backward-tagged matches");
}

void Stage::eval() {
  const auto raw = read_difference_matrix(out(files::kDiffmat));
  const auto gt = load_ground_truth(raw.n_ref(), raw.n_live());
  const auto m_forward = read_matches_csv(out(files::kMatchesSeqslam), raw.n_ref(), raw.n_live());
  const auto m_both = read_matches_csv(out(files::kMatchesLay), raw.n_ref(), raw.n_live());

  const auto nn = nn_pr_curve(raw, gt, cfg_.sweep_levels);
  const auto seq = sequence_pr_curve(m_forward, gt, cfg_.sweep_levels);
  const auto lay = sequence_pr_curve(m_both, gt, cfg_.sweep_levels);

  const auto rep = representation();
  result_.summary = {{rep, kNnLabel, nn.summary},
                     {rep, kSeqSlamLabel, seq.summary},
                     {rep, kLayLabel, lay.summary}};
  write_summary_csv(out(files::kSummary), result_.summary);
  write_pr_curve_csv(out(files::kPrCurve),
                     cfg_.search.direction == SearchDirection::kForwardOnly ? seq : lay);
  write_pr_curve_csv(out(files::kPrCurveNn), nn);
  for (const char* f : {files::kSummary, files::kPrCurve, files::kPrCurveNn}) produced(out(f));
  std::ostringstream msg;
  msg << std::fixed << std::setprecision(3) << "AUC  NN " << nn.auc << "  SeqSLAM " << seq.auc
      << "  LAY " << lay.auc;
  log(msg.str());
}

void Stage::tune() {
  DescriptorSequence ref;
  DescriptorSequence live;
  if (have_scans()) {
    ref = embed_sequence(require_scans(input(cfg_.ref_scans, files::kRefScans)), cfg_.descriptor,
                         opt_.threads);
    live = embed_sequence(require_scans(input(cfg_.live_scans, files::kLiveScans)),
                          cfg_.descriptor, opt_.threads);
  } else {
    std::tie(ref, live) = load_descriptor_pair();
  }
  const auto gt = load_ground_truth(ref.size(), live.size());
  auto result = grid_search(ref, live, gt, cfg_.tune_windows, cfg_.tune_enhancements, cfg_.search,
                            cfg_.sweep_levels, opt_.threads);
  write_tune_csv(out(files::kTune), result);
  produced(out(files::kTune));
  log("chose W = " + std::to_string(result.chosen.window) +
      ", R = " + std::to_string(result.chosen.enhancement));
  result_.tune = std::move(result);
}

json summary_json(const std::vector<SummaryRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"representation", r.representation},
                   {"search", r.search},
                   {"auc", r.summary.auc},
                   {"max_f1", r.summary.max_f1},
                   {"max_f2", r.summary.max_f2},
                   {"max_f0.5", r.summary.max_f05},
                   {"recall_at_p60", r.summary.recall_at_p60},
                   {"recall_at_p80", r.summary.recall_at_p80}});
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_report(const fs::path& path, const RunConfig& cfg, Command command,
                  const PipelineResult& result, const fs::path& out_dir) {
  json report;
  report["command"] = std::string(to_string(command));
  report["timestamp"] = utc_timestamp();
  report["config"] = cfg.echo();
  json outputs = json::array();
  for (const auto& p : result.outputs) outputs.push_back(p.lexically_relative(out_dir).string());
  report["outputs"] = outputs;
  if (!result.summary.empty()) report["summary"] = summary_json(result.summary);
  if (result.tune) {
    json grid = json::array();
    for (const auto& c : result.tune->grid) {
      grid.push_back({{"W", c.window}, {"R", c.enhancement},
                      {"precision_at_80_recall", c.precision_at_80_recall}});
    }
    report["tune"] = {{"grid", grid},
                      {"chosen", {{"W", result.tune->chosen.window},
                                  {"R", result.tune->chosen.enhancement}}}};
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot write report: " + path.string());
  os << report.dump(2) << '\n';
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, Command command,
                            const PipelineOptions& options) {
  config.validate();
  fs::create_directories(options.out_dir);
  PipelineResult result;
  Stage stage(config, options, result);
  switch (command) {
    case Command::kSimulate:
      stage.simulate();
      break;
    case Command::kEmbed:
      stage.embed();
      break;
    case Command::kDiff:
      stage.diff();
      break;
    case Command::kSearch:
      stage.search();
      break;
    case Command::kEval:
      stage.eval();
      break;
    case Command::kTune:
      stage.tune();
      break;
    case Command::kFull: {
      // Staged hand-off through the same artifact files, so a `full` run and
      // a sequence of partial commands see identical inputs at every step.
      const bool scans = !config.ref_descriptors && !config.live_descriptors &&
                         fs::exists(config.ref_scans.value_or(options.out_dir / files::kRefScans)) &&
                         fs::exists(config.live_scans.value_or(options.out_dir / files::kLiveScans));
      if (scans) stage.embed();
      stage.diff();
      stage.search();
      stage.eval();
      break;
    }
  }
  const auto report = options.out_dir / files::kReport;
  result.outputs.push_back(report);
  write_report(report, config, command, result, options.out_dir);
  return result;
}

}  // namespace seqpr::app
