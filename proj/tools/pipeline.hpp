#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "run_config.hpp"
#include "seqpr/eval.hpp"

namespace seqpr::app {

enum class Command { kEmbed, kDiff, kSearch, kEval, kTune, kSimulate, kFull };

Command parse_command(std::string_view name);
std::string_view to_string(Command c);

// Artifact names inside the output directory.
namespace files {
inline constexpr const char* kRefScans = "ref_scans.bin";
inline constexpr const char* kLiveScans = "live_scans.bin";
inline constexpr const char* kRefDescriptors = "ref_descriptors.bin";
inline constexpr const char* kLiveDescriptors = "live_descriptors.bin";
inline constexpr const char* kRefPoses = "ref_poses.csv";
inline constexpr const char* kLivePoses = "live_poses.csv";
inline constexpr const char* kWorld = "world.json";
inline constexpr const char* kDiffmat = "diffmat.bin";
inline constexpr const char* kDiffmatCsv = "diffmat.csv";
inline constexpr const char* kEnhanced = "diffmat_enhanced.bin";
inline constexpr const char* kEnhancedCsv = "diffmat_enhanced.csv";
inline constexpr const char* kMatches = "matches.csv";
inline constexpr const char* kMatchesSeqslam = "matches_seqslam.csv";
inline constexpr const char* kMatchesLay = "matches_lay.csv";
inline constexpr const char* kScoreSums = "scores_sum.csv";
inline constexpr const char* kScoreRelative = "scores_relative.csv";
inline constexpr const char* kPrCurve = "pr_curve.csv";
inline constexpr const char* kPrCurveNn = "pr_curve_nn.csv";
inline constexpr const char* kSummary = "summary.csv";
inline constexpr const char* kTune = "tune.csv";
inline constexpr const char* kReport = "report.json";
}  // namespace files

struct PipelineOptions {
  std::filesystem::path out_dir = "out";
  std::size_t threads = 0;  // 0 = all cores
  std::ostream* log = nullptr;
};

struct PipelineResult {
  std::vector<std::filesystem::path> outputs;
  std::vector<SummaryRow> summary;
  std::optional<TuneResult> tune;
};

/// Runs one command. Throws ValidationError / ParseError on bad input; the
/// CLI maps those to a non-zero exit status.
PipelineResult run_pipeline(const RunConfig& config, Command command,
                            const PipelineOptions& options);

}  // namespace seqpr::app
