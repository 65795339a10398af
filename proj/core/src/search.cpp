#include "seqpr/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "seqpr/error.hpp"
#include "seqpr/parallel.hpp"
#include "text_util.hpp"

namespace seqpr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_enhanced(const DifferenceMatrix& d) {
  if (!d.enhanced) throw ValidationError("sequence search requires a contrast-enhanced matrix");
  if (d.n_ref() == 0 || d.n_live() == 0) throw ValidationError("empty difference matrix");
}

// Ratio of two floor-offset sums. Both arguments are >= floor by
// construction, so the result is >= 1 whenever best <= second.
double confidence_ratio(double second, double best, double floor) {
  const double num = second - floor;
  const double den = best - floor;
  if (den > 0.0) return num / den;
  // Winner sits exactly on the floor.
  return num > 0.0 ? std::numeric_limits<double>::max() : 1.0;
}

}  // namespace

std::string_view to_string(SearchDirection d) {
  return d == SearchDirection::kForwardOnly ? "forward-only" : "forward-and-backward";
}

std::string_view to_string(MatchDirection d) {
  return d == MatchDirection::kForward ? "forward" : "backward";
}

SearchDirection parse_search_direction(std::string_view text) {
  if (text == "forward-only") return SearchDirection::kForwardOnly;
  if (text == "forward-and-backward") return SearchDirection::kForwardAndBackward;
  throw ValidationError("unknown search direction '" + std::string(text) +
                        "' (expected forward-only or forward-and-backward)");
}

void SearchConfig::validate() const {
  if (window < 2) throw ValidationError("search window W must be >= 2");
  if (!(v_min > 0.0) || !(v_max >= v_min) || !std::isfinite(v_max)) {
    throw ValidationError("search slopes must satisfy 0 < v_min <= v_max");
  }
  if (!(v_step > 0.0) || !std::isfinite(v_step)) {
    throw ValidationError("search v_step must be > 0");
  }
  if (exclusion && *exclusion < 1) throw ValidationError("search exclusion must be >= 1");
}

std::vector<double> SearchConfig::slopes() const {
  validate();
  std::vector<double> out;
  const double tol = 1e-9 * std::max(1.0, v_max);
  for (std::size_t k = 0;; ++k) {
    const double v = v_min + static_cast<double>(k) * v_step;
    if (v > v_max + tol) break;
    out.push_back(std::min(v, v_max));
  }
  if (direction == SearchDirection::kForwardAndBackward) {
    const std::size_t n = out.size();
    for (std::size_t k = 0; k < n; ++k) out.push_back(-out[k]);
  }
  return out;
}

ScoreColumn sweep_scores(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t j) {
  require_enhanced(d);
  const auto slopes = cfg.slopes();
  const std::size_t w = cfg.window;
  if (j + 1 < w || j >= d.n_live()) {
    throw ValidationError("query " + std::to_string(j) + " needs W - 1 = " +
                          std::to_string(w - 1) + " earlier live frames and must be < N_live = " +
                          std::to_string(d.n_live()));
  }

  const auto n_ref = static_cast<std::ptrdiff_t>(d.n_ref());
  ScoreColumn out;
  out.score.assign(d.n_ref(), kInf);
  out.direction.assign(d.n_ref(), MatchDirection::kForward);
  const double inv_w = 1.0 / static_cast<double>(w);

  for (std::ptrdiff_t i = 0; i < n_ref; ++i) {
    double best = kInf;
    MatchDirection best_dir = MatchDirection::kForward;
    for (const double v : slopes) {
      double sum = 0.0;
      bool admissible = true;
      for (std::size_t k = 0; k < w; ++k) {
        // std::round is half-away-from-zero.
        const auto row = static_cast<std::ptrdiff_t>(
            std::round(static_cast<double>(i) - v * static_cast<double>(k)));
        if (row < 0 || row >= n_ref) {
          admissible = false;
          break;
        }
        sum += d(static_cast<std::size_t>(row), j - k);
      }
      if (!admissible) continue;
      const double s = sum * inv_w;
      if (s < best) {
        best = s;
        best_dir = v > 0.0 ? MatchDirection::kForward : MatchDirection::kBackward;
      }
    }
    out.score[static_cast<std::size_t>(i)] = best;
    out.direction[static_cast<std::size_t>(i)] = best_dir;
  }
  return out;
}

double score_floor(const DifferenceMatrix& d) {
  if (d.values.size() == 0) return 0.0;
  return std::min(0.0, d.values.minCoeff());
}

MatchEntry best_match(const ScoreColumn& column, std::size_t j, std::size_t exclusion,
                      double floor) {
  MatchEntry e;
  e.query = j;
  e.raw_sum = kInf;
  const auto& s = column.score;

  std::size_t best = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isfinite(s[i]) && (best == s.size() || s[i] < s[best])) best = i;
  }
  if (best == s.size()) return e;  // no admissible trajectory anywhere
  e.raw_sum = s[best];
  e.direction = column.direction[best];

  double second = kInf;
  bool have_second = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t gap = i > best ? i - best : best - i;
    if (gap <= exclusion || !std::isfinite(s[i])) continue;
    if (!have_second || s[i] < second) {
      second = s[i];
      have_second = true;
    }
  }
  if (!have_second) return e;  // ambiguous by construction: nothing to compare against

  e.best_ref = best;
  e.score = confidence_ratio(second, s[best], floor);
  return e;
}

MatchEntry best_match(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t j) {
  return best_match(sweep_scores(d, cfg, j), j, cfg.exclusion_or_default(), score_floor(d));
}

MatchSet run_search(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t threads) {
  require_enhanced(d);
  cfg.validate();
  MatchSet m;
  m.n_ref = d.n_ref();
  m.n_live = d.n_live();
  if (d.n_live() < cfg.window) {
    m.status = MatchStatus::kTooFewLiveFrames;
    return m;
  }
  const std::size_t first = cfg.window - 1;
  const double floor = score_floor(d);
  const std::size_t exclusion = cfg.exclusion_or_default();
  m.entries.resize(d.n_live() - first);
  parallel_for(m.entries.size(), threads, [&](std::size_t q) {
    const std::size_t j = first + q;
    m.entries[q] = best_match(sweep_scores(d, cfg, j), j, exclusion, floor);
  });
  return m;
}

MatchSet nn_ball_search(const DifferenceMatrix& d, double radius) {
  if (d.enhanced) {
    throw ValidationError("nearest-neighbour search operates on raw embedding distances");
  }
  if (std::isnan(radius)) throw ValidationError("radius must not be NaN");
  MatchSet m;
  m.n_ref = d.n_ref();
  m.n_live = d.n_live();
  m.entries.resize(d.n_live());
  for (std::size_t j = 0; j < d.n_live(); ++j) {
    MatchEntry& e = m.entries[j];
    e.query = j;
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.n_ref(); ++i) {
      if (d(i, j) < d(best, j)) best = i;
    }
    e.raw_sum = d.n_ref() ? d(best, j) : kInf;
    if (d.n_ref() && e.raw_sum <= radius) {
      e.best_ref = best;
      e.score = radius - e.raw_sum;
    }
  }
  return m;
}

MatchSet threshold_matches(const MatchSet& m, double min_score) {
  MatchSet out = m;
  for (auto& e : out.entries) {
    if (!e.score || *e.score < min_score) {
      e.best_ref.reset();
      e.score.reset();
    }
  }
  return out;
}

MatchSet filter_queries(const MatchSet& m, const std::vector<std::size_t>& queries) {
  std::vector<bool> keep(m.n_live, false);
  for (const auto q : queries) {
    if (q < keep.size()) keep[q] = true;
  }
  MatchSet out;
  out.n_ref = m.n_ref;
  out.n_live = m.n_live;
  out.status = m.status;
  for (const auto& e : m.entries) {
    if (e.query < keep.size() && keep[e.query]) out.entries.push_back(e);
  }
  return out;
}

ScoreGrids score_grids(const DifferenceMatrix& d, const SearchConfig& cfg, std::size_t threads) {
  require_enhanced(d);
  cfg.validate();
  const auto rows = static_cast<Eigen::Index>(d.n_ref());
  const auto cols = static_cast<Eigen::Index>(d.n_live());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ScoreGrids g;
  g.sums = RowMatrix::Constant(rows, cols, nan);
  g.relative = RowMatrix::Constant(rows, cols, nan);
  if (d.n_live() < cfg.window) return g;

  const double floor = score_floor(d);
  const auto excl = static_cast<std::ptrdiff_t>(cfg.exclusion_or_default());
  const std::size_t first = cfg.window - 1;
  parallel_for(d.n_live() - first, threads, [&](std::size_t q) {
    const std::size_t j = first + q;
    const auto col = sweep_scores(d, cfg, j);
    const auto n = static_cast<std::ptrdiff_t>(col.score.size());
    // prefix[i] = min S over [0, i), suffix[i] = min S over [i, n)
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<double> suffix(static_cast<std::size_t>(n) + 1, kInf);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      prefix[static_cast<std::size_t>(i + 1)] =
          std::min(prefix[static_cast<std::size_t>(i)], col.score[static_cast<std::size_t>(i)]);
    }
    for (std::ptrdiff_t i = n - 1; i >= 0; --i) {
      suffix[static_cast<std::size_t>(i)] = std::min(suffix[static_cast<std::size_t>(i + 1)],
                                                     col.score[static_cast<std::size_t>(i)]);
    }
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double s = col.score[static_cast<std::size_t>(i)];
      g.sums(i, static_cast<Eigen::Index>(j)) = s;
      if (!std::isfinite(s)) continue;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - excl);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, i + excl + 1);
      const double other =
          std::min(prefix[static_cast<std::size_t>(lo)], suffix[static_cast<std::size_t>(hi)]);
      if (std::isfinite(other)) {
        g.relative(i, static_cast<Eigen::Index>(j)) = confidence_ratio(other, s, floor);
      }
    }
  });
  return g;
}

void write_matches_csv(const std::filesystem::path& path, const MatchSet& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os << "query_index,ref_index,score,direction,raw_sum\n";
  for (const auto& e : m.entries) {
    os << e.query << ',';
    if (e.matched()) {
      os << *e.best_ref << ',' << (e.score ? detail::format_double(*e.score) : "-") << ','
         << to_string(e.direction);
    } else {
      os << "-,-,-";
    }
    os << ',' << detail::format_double(e.raw_sum) << '\n';
  }
}

MatchSet read_matches_csv(const std::filesystem::path& path, std::size_t n_ref,
                          std::size_t n_live) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open for reading: " + path.string());
  MatchSet m;
  m.n_ref = n_ref;
  m.n_live = n_live;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + what, line_no);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1) continue;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != 5) fail("expected 5 fields");
    MatchEntry e;
    const auto q = detail::parse_uint(f[0]);
    if (!q || *q >= n_live) fail("query index missing or out of range");
    e.query = *q;
    if (f[1] != "-") {
      const auto r = detail::parse_uint(f[1]);
      if (!r || *r >= n_ref) fail("reference index out of range");
      e.best_ref = *r;
      if (f[2] != "-") {
        const auto s = detail::parse_double(f[2]);
        if (!s) fail("bad score");
        e.score = *s;
      }
      if (f[3] == "backward") {
        e.direction = MatchDirection::kBackward;
      } else if (f[3] != "forward") {
        fail("bad direction");
      }
    }
    const auto raw = detail::parse_double(f[4]);
    if (!raw) fail("bad raw_sum");
    e.raw_sum = *raw;
    m.entries.push_back(e);
  }
  return m;
}

}  // namespace seqpr
