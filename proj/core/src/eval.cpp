#include "seqpr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "seqpr/error.hpp"
#include "text_util.hpp"

namespace seqpr {

namespace fs = std::filesystem;

namespace {

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  return os;
}

}  // namespace

bool GroundTruth::has_neighbour(std::size_t j) const {
  return distance.col(static_cast<Eigen::Index>(j)).minCoeff() <= radius;
}

GroundTruth gt_distance_matrix(const PoseTrajectory& ref, const PoseTrajectory& live,
                               double radius) {
  if (ref.empty() || live.empty()) {
    throw ValidationError("ground truth needs non-empty reference and live trajectories");
  }
  if (!(radius > 0.0)) throw ValidationError("true-positive radius must be > 0");
  GroundTruth gt;
  gt.ref_poses = ref;
  gt.live_poses = live;
  gt.radius = radius;
  gt.distance.resize(static_cast<Eigen::Index>(ref.size()), static_cast<Eigen::Index>(live.size()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < live.size(); ++j) {
      gt.distance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::hypot(ref[i].x - live[j].x, ref[i].y - live[j].y);
    }
  }
  return gt;
}

LabelCounts label_matches(const MatchSet& m, const GroundTruth& gt) {
  LabelCounts c;
  for (const auto& e : m.entries) {
    if (e.query >= gt.n_live()) {
      throw ValidationError("match query " + std::to_string(e.query) +
                            " outside ground truth (" + std::to_string(gt.n_live()) +
                            " live poses)");
    }
    if (e.matched()) {
      if (*e.best_ref >= gt.n_ref()) {
        throw ValidationError("match reference " + std::to_string(*e.best_ref) +
                              " outside ground truth (" + std::to_string(gt.n_ref()) +
                              " reference poses)");
      }
      const double dist = gt.distance(static_cast<Eigen::Index>(*e.best_ref),
                                      static_cast<Eigen::Index>(e.query));
      if (dist <= gt.radius) {
        ++c.tp;
      } else {
        ++c.fp;
      }
    } else if (gt.has_neighbour(e.query)) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * precision + recall;
  if (den <= 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / den;
}

double pr_auc(std::vector<PRPoint> points) {
  if (points.empty()) return 0.0;
  std::sort(points.begin(), points.end(), [](const PRPoint& a, const PRPoint& b) {
    if (a.recall != b.recall) return a.recall < b.recall;
    return a.precision > b.precision;
  });
  double max_precision = 0.0;
  for (const auto& p : points) max_precision = std::max(max_precision, p.precision);

  double area = 0.0;
  double prev_r = 0.0;
  double prev_p = max_precision;
  for (const auto& p : points) {
    area += (p.recall - prev_r) * 0.5 * (p.precision + prev_p);
    prev_r = p.recall;
    prev_p = p.precision;
  }
  return area;
}

double recall_at_precision(const PRCurve& curve, double p_target) {
  double best = 0.0;
  for (const auto& p : curve.points) {
    if (p.precision >= p_target) best = std::max(best, p.recall);
  }
  return best;
}

double precision_at_recall(const PRCurve& curve, double r_target) {
  const PRPoint* chosen = nullptr;
  for (const auto& p : curve.points) {
    if (p.recall < r_target) continue;
    if (!chosen || p.recall < chosen->recall ||
        (p.recall == chosen->recall && p.precision > chosen->precision)) {
      chosen = &p;
    }
  }
  return chosen ? chosen->precision : 0.0;
}

PRSummary summarise(const PRCurve& curve) {
  PRSummary s;
  s.auc = curve.auc;
  for (const auto& p : curve.points) {
    s.max_f1 = std::max(s.max_f1, f_beta(p.precision, p.recall, 1.0));
    s.max_f2 = std::max(s.max_f2, f_beta(p.precision, p.recall, 2.0));
    s.max_f05 = std::max(s.max_f05, f_beta(p.precision, p.recall, 0.5));
  }
  s.recall_at_p60 = recall_at_precision(curve, 0.6);
  s.recall_at_p80 = recall_at_precision(curve, 0.8);
  return s;
}

PRSummary mean_summary(const std::vector<PRSummary>& runs) {
  PRSummary s;
  if (runs.empty()) return s;
  for (const auto& r : runs) {
    s.auc += r.auc;
    s.max_f1 += r.max_f1;
    s.max_f2 += r.max_f2;
    s.max_f05 += r.max_f05;
    s.recall_at_p60 += r.recall_at_p60;
    s.recall_at_p80 += r.recall_at_p80;
  }
  const double n = static_cast<double>(runs.size());
  s.auc /= n;
  s.max_f1 /= n;
  s.max_f2 /= n;
  s.max_f05 /= n;
  s.recall_at_p60 /= n;
  s.recall_at_p80 /= n;
  return s;
}

PRCurve pr_curve_from_counts(const std::vector<std::pair<double, LabelCounts>>& counts) {
  if (counts.empty()) throw ValidationError("precision-recall curve needs at least one threshold");
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (!(counts[k].first > counts[k - 1].first)) {
      throw ValidationError("precision-recall thresholds must be strictly increasing");
    }
  }
  PRCurve curve;
  for (const auto& [threshold, c] : counts) {
    if (c.tp + c.fp == 0) continue;
    PRPoint p;
    p.threshold = threshold;
    p.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    p.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    curve.points.push_back(p);
  }
  curve.auc = pr_auc(curve.points);
  curve.summary = summarise(curve);
  return curve;
}

PRCurve pr_curve(const std::vector<ThresholdedMatches>& family, const GroundTruth& gt) {
  std::vector<std::pair<double, LabelCounts>> counts;
  counts.reserve(family.size());
  for (const auto& f : family) counts.emplace_back(f.threshold, label_matches(f.matches, gt));
  return pr_curve_from_counts(counts);
}

std::vector<double> quantile_thresholds(std::vector<double> values, std::size_t levels) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  std::vector<double> out;
  if (values.empty() || levels == 0) return out;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  for (std::size_t k = 0; k < levels; ++k) {
    const std::size_t idx = levels == 1 ? 0 : (k * (n - 1)) / (levels - 1);
    if (out.empty() || values[idx] > out.back()) out.push_back(values[idx]);
  }
  return out;
}

PRCurve sequence_pr_curve(const MatchSet& m, const GroundTruth& gt, std::size_t levels) {
  std::vector<double> scores;
  for (const auto& e : m.entries) {
    if (e.matched() && e.score) scores.push_back(*e.score);
  }
  const auto thresholds = quantile_thresholds(std::move(scores), levels);
  if (thresholds.empty()) return {};
  std::vector<std::pair<double, LabelCounts>> counts;
  counts.reserve(thresholds.size());
  for (const double t : thresholds) {
    counts.emplace_back(t, label_matches(threshold_matches(m, t), gt));
  }
  return pr_curve_from_counts(counts);
}

PRCurve nn_pr_curve(const DifferenceMatrix& raw, const GroundTruth& gt, std::size_t levels) {
  // One unbounded search gives every query's nearest neighbour; a finite
  // radius only drops the entries farther than it.
  const MatchSet all = nn_ball_search(raw, std::numeric_limits<double>::infinity());
  std::vector<double> minima;
  minima.reserve(all.entries.size());
  for (const auto& e : all.entries) minima.push_back(e.raw_sum);
  const auto radii = quantile_thresholds(minima, levels);
  if (radii.empty()) return {};

  std::vector<std::pair<double, LabelCounts>> counts;
  counts.reserve(radii.size());
  for (const double r : radii) {
    MatchSet m = all;
    for (auto& e : m.entries) {
      if (e.raw_sum <= r) {
        e.score = r - e.raw_sum;
      } else {
        e.best_ref.reset();
        e.score.reset();
      }
    }
    counts.emplace_back(r, label_matches(m, gt));
  }
  return pr_curve_from_counts(counts);
}

TuneResult grid_search(const DifferenceMatrix& raw, const GroundTruth& gt,
                       std::vector<std::size_t> windows, std::vector<std::size_t> enhancements,
                       const SearchConfig& cfg, std::size_t levels, std::size_t threads) {
  if (windows.empty() || enhancements.empty()) {
    throw ValidationError("grid search needs non-empty W and R ranges");
  }
  if (raw.enhanced) throw ValidationError("grid search expects a raw difference matrix");
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  std::sort(enhancements.begin(), enhancements.end());
  enhancements.erase(std::unique(enhancements.begin(), enhancements.end()), enhancements.end());

  TuneResult result;
  for (const std::size_t r : enhancements) {
    const bool r_valid = r >= 1 && r <= raw.n_ref();
    DifferenceMatrix enhanced;
    if (r_valid) enhanced = enhance_contrast(raw, r, threads);
    for (const std::size_t w : windows) {
      TuneCell cell{w, r, 0.0};
      if (r_valid && w >= 2 && w <= raw.n_live()) {
        SearchConfig c = cfg;
        c.window = w;
        const auto m = run_search(enhanced, c, threads);
        cell.precision_at_80_recall = precision_at_recall(sequence_pr_curve(m, gt, levels), 0.8);
      }
      result.grid.push_back(cell);
    }
  }

  const TuneCell* best = nullptr;
  for (const auto& c : result.grid) {
    if (!best || c.precision_at_80_recall > best->precision_at_80_recall ||
        (c.precision_at_80_recall == best->precision_at_80_recall &&
         (c.window < best->window ||
          (c.window == best->window && c.enhancement < best->enhancement)))) {
      best = &c;
    }
  }
  result.chosen = *best;
  return result;
}

TuneResult grid_search(const DescriptorSequence& reference, const DescriptorSequence& live,
                       const GroundTruth& gt, std::vector<std::size_t> windows,
                       std::vector<std::size_t> enhancements, const SearchConfig& cfg,
                       std::size_t levels, std::size_t threads) {
  return grid_search(pairwise_distances(reference, live, threads), gt, std::move(windows),
                     std::move(enhancements), cfg, levels, threads);
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows) {
  auto os = open_csv(path);
  os << "representation,search,auc,max_f1,max_f2,max_f0.5,recall_at_p60,recall_at_p80\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    os << r.representation << ',' << r.search << ',' << detail::format_double(s.auc) << ','
       << detail::format_double(s.max_f1) << ',' << detail::format_double(s.max_f2) << ','
       << detail::format_double(s.max_f05) << ',' << detail::format_double(s.recall_at_p60)
       << ',' << detail::format_double(s.recall_at_p80) << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open for reading: " + path.string());
  std::vector<SummaryRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1) {
      if (detail::split(line).size() != 8) throw ParseError("summary header must have 8 columns", 1);
      continue;
    }
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != 8) throw ParseError("summary row must have 8 columns", line_no);
    double v[6];
    for (int k = 0; k < 6; ++k) {
      const auto parsed = detail::parse_double(f[static_cast<std::size_t>(k) + 2]);
      if (!parsed) throw ParseError("summary value is not a number", line_no);
      v[k] = *parsed;
    }
    rows.push_back({std::string(f[0]), std::string(f[1]), {v[0], v[1], v[2], v[3], v[4], v[5]}});
  }
  return rows;
}

void write_pr_curve_csv(const fs::path& path, const PRCurve& curve) {
  auto os = open_csv(path);
  os << "threshold,precision,recall\n";
  for (const auto& p : curve.points) {
    os << detail::format_double(p.threshold) << ',' << detail::format_double(p.precision) << ','
       << detail::format_double(p.recall) << '\n';
  }
}

void write_tune_csv(const fs::path& path, const TuneResult& result) {
  auto os = open_csv(path);
  os << "W,R,precision_at_80_recall,chosen\n";
  for (const auto& c : result.grid) {
    const bool chosen = c.window == result.chosen.window &&
                        c.enhancement == result.chosen.enhancement;
    os << c.window << ',' << c.enhancement << ',' << detail::format_double(c.precision_at_80_recall)
       << ',' << (chosen ? 1 : 0) << '\n';
  }
}

}  // namespace seqpr
