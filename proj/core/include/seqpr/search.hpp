#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "seqpr/diffmat.hpp"

namespace seqpr {

enum class SearchDirection { kForwardOnly, kForwardAndBackward };
enum class MatchDirection { kForward, kBackward };

std::string_view to_string(SearchDirection d);
std::string_view to_string(MatchDirection d);
SearchDirection parse_search_direction(std::string_view text);

struct SearchConfig {
  std::size_t window = 10;  // W, live frames per trajectory
  double v_min = 0.8;       // reference frames per live frame
  double v_max = 1.2;
  double v_step = 0.1;
  std::optional<std::size_t> exclusion;  // defaults to W
  SearchDirection direction = SearchDirection::kForwardAndBackward;

  void validate() const;
  std::size_t exclusion_or_default() const { return exclusion.value_or(window); }
  /// Signed slopes in sweep order: v_min..v_max, then -v_min..-v_max when
  /// backward search is enabled.
  std::vector<double> slopes() const;
};

/// Sweep result for one query column.
struct ScoreColumn {
  std::vector<double> score;               // S(i, j); +inf when no admissible trajectory
  std::vector<MatchDirection> direction;   // sign of the winning slope
};

/// Mean enhanced difference along the best constant-slope trajectory ending
/// at every reference index. Requires j >= W - 1.
ScoreColumn sweep_scores(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t j);

struct MatchEntry {
  std::size_t query = 0;
  std::optional<std::size_t> best_ref;
  std::optional<double> score;  // confidence, >= 1 for sequence search
  MatchDirection direction = MatchDirection::kForward;
  double raw_sum = 0.0;  // S at the winner (sequence) or the min distance (NN)

  bool matched() const { return best_ref.has_value(); }
};

enum class MatchStatus { kOk, kTooFewLiveFrames };

struct MatchSet {
  std::size_t n_ref = 0;
  std::size_t n_live = 0;
  std::vector<MatchEntry> entries;  // ascending query order
  MatchStatus status = MatchStatus::kOk;
};

/// Offset applied to the enhanced matrix before forming confidence ratios:
/// min(0, min over all entries). Keeps both sides of the ratio non-negative.
double score_floor(const DifferenceMatrix& d);

/// Best endpoint for query j and its best/second-best confidence ratio.
MatchEntry best_match(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t j);
MatchEntry best_match(const ScoreColumn& column, std::size_t j, std::size_t exclusion,
                      double floor);

MatchSet run_search(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t threads = 0);

/// Nearest neighbour baseline on a raw matrix: column argmin, kept if within
/// `radius`; score = radius - distance.
MatchSet nn_ball_search(const DifferenceMatrix& d, double radius);

/// Entries with no score or score below min_score become unmatched.
MatchSet threshold_matches(const MatchSet& m, double min_score);

/// Keeps only entries whose query index is listed.
MatchSet filter_queries(const MatchSet& m, const std::vector<std::size_t>& queries);

struct ScoreGrids {
  RowMatrix sums;      // S(i, j); NaN for j < W - 1
  RowMatrix relative;  // confidence that endpoint i would receive at query j
};
ScoreGrids score_grids(const DifferenceMatrix& d, const SearchConfig& cfg,
                       std::size_t threads = 0);

/// `query_index,ref_index,score,direction,raw_sum` with `-` for unmatched.
void write_matches_csv(const std::filesystem::path& path, const MatchSet& m);
MatchSet read_matches_csv(const std::filesystem::path& path, std::size_t n_ref,
                          std::size_t n_live);

}  // namespace seqpr
