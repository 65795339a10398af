#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "seqpr/diffmat.hpp"
#include "seqpr/ingest.hpp"
#include "seqpr/search.hpp"

namespace seqpr {

inline constexpr double kDefaultTruePositiveRadius = 15.0;  // metres

struct GroundTruth {
  PoseTrajectory ref_poses;
  PoseTrajectory live_poses;
  double radius = kDefaultTruePositiveRadius;
  RowMatrix distance;  // planar metres, ref rows x live columns

  std::size_t n_ref() const { return ref_poses.size(); }
  std::size_t n_live() const { return live_poses.size(); }
  /// True if some reference pose lies within radius of live pose j.
  bool has_neighbour(std::size_t j) const;
};

GroundTruth gt_distance_matrix(const PoseTrajectory& ref, const PoseTrajectory& live,
                               double radius = kDefaultTruePositiveRadius);

struct LabelCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;  // unmatched with no neighbour; excluded from P/R
};

/// Distances equal to the radius count as true positives.
LabelCounts label_matches(const MatchSet& m, const GroundTruth& gt);

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PRSummary {
  double auc = 0.0;
  double max_f1 = 0.0;
  double max_f2 = 0.0;
  double max_f05 = 0.0;
  double recall_at_p60 = 0.0;
  double recall_at_p80 = 0.0;
};

struct PRCurve {
  std::vector<PRPoint> points;
  double auc = 0.0;
  PRSummary summary;
};

struct ThresholdedMatches {
  double threshold = 0.0;
  MatchSet matches;
};

/// Builds a curve from a family of match sets at strictly increasing
/// thresholds. Points with no positive predictions are skipped.
PRCurve pr_curve(const std::vector<ThresholdedMatches>& family, const GroundTruth& gt);
/// Same as above from precomputed counts; the workhorse of pr_curve.
PRCurve pr_curve_from_counts(const std::vector<std::pair<double, LabelCounts>>& counts);

/// Trapezoidal area over recall, points sorted by recall, with the curve
/// extended to recall 0 at its maximum precision.
double pr_auc(std::vector<PRPoint> points);

double f_beta(double precision, double recall, double beta);

/// Best recall among points reaching the target precision; 0 if none.
double recall_at_precision(const PRCurve& curve, double p_target);
/// Precision at the operating point with the lowest recall still >= target;
/// 0 if the target recall is never reached.
double precision_at_recall(const PRCurve& curve, double r_target);

PRSummary summarise(const PRCurve& curve);
/// Component-wise mean over several runs.
PRSummary mean_summary(const std::vector<PRSummary>& runs);

/// Up to `levels` distinct score values taken at evenly spaced empirical
/// quantiles of the scored entries, ascending.
std::vector<double> quantile_thresholds(std::vector<double> values, std::size_t levels);

/// PR curve for a sequence search by sweeping the minimum match score.
PRCurve sequence_pr_curve(const MatchSet& m, const GroundTruth& gt, std::size_t levels = 100);

/// PR curve for the NN baseline by sweeping the ball radius over quantiles
/// of the per-query minimum distance.
PRCurve nn_pr_curve(const DifferenceMatrix& raw, const GroundTruth& gt,
                    std::size_t levels = 100);

struct TuneCell {
  std::size_t window = 0;       // W
  std::size_t enhancement = 0;  // R
  double precision_at_80_recall = 0.0;
};

struct TuneResult {
  std::vector<TuneCell> grid;  // R-major, then W, both ascending
  TuneCell chosen;
};

/// Exhaustive W x R search maximising precision at 80% recall. Ties go to
/// the smaller W, then the smaller R. Cells where W exceeds the live length
/// score 0.
TuneResult grid_search(const DescriptorSequence& reference, const DescriptorSequence& live,
                       const GroundTruth& gt, std::vector<std::size_t> windows,
                       std::vector<std::size_t> enhancements, const SearchConfig& cfg,
                       std::size_t levels = 100, std::size_t threads = 0);
/// Same from a precomputed raw difference matrix.
TuneResult grid_search(const DifferenceMatrix& raw, const GroundTruth& gt,
                       std::vector<std::size_t> windows, std::vector<std::size_t> enhancements,
                       const SearchConfig& cfg, std::size_t levels = 100,
                       std::size_t threads = 0);

// CSV exports.
struct SummaryRow {
  std::string representation;
  std::string search;
  PRSummary summary;
};
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);
void write_pr_curve_csv(const std::filesystem::path& path, const PRCurve& curve);
void write_tune_csv(const std::filesystem::path& path, const TuneResult& result);

}  // namespace seqpr
