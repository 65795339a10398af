#include "seqpr/sim.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "seqpr/error.hpp"

namespace seqpr {

namespace {

// Distinct new roads are laid out on parallel lines this far apart, well
// outside any sensible true-positive radius.
constexpr double kRoadSeparation = 1000.0;
constexpr double kFrameSpacing = 1.0;

enum class Stream : std::uint64_t { kAppearance = 1, kPerturb = 2, kLiveNoise = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

struct Visit {
  std::size_t place = 0;
  bool reversed = false;
};

Eigen::VectorXd random_unit_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  const double n = v.norm();
  return n > 0.0 ? Eigen::VectorXd(v / n) : v;
}

PolarScan random_scan(std::size_t azimuths, std::size_t bins, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PolarScan s;
  s.power.resize(static_cast<Eigen::Index>(azimuths), static_cast<Eigen::Index>(bins));
  for (Eigen::Index r = 0; r < s.power.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.power.cols(); ++c) s.power(r, c) = uniform(rng);
  }
  return s;
}

PolarScan noisy_scan(const PolarScan& scan, double sigma, std::mt19937_64& rng) {
  if (sigma == 0.0) return scan;
  std::normal_distribution<double> normal(0.0, sigma);
  PolarScan out = scan;
  for (Eigen::Index r = 0; r < out.power.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.power.cols(); ++c) {
      out.power(r, c) = std::clamp(out.power(r, c) + normal(rng), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::kNewRoad:
      return "new-road";
    case SegmentKind::kForwardRevisit:
      return "forward-revisit";
    case SegmentKind::kReverseRevisit:
      return "reverse-revisit";
  }
  return "new-road";
}

SegmentKind parse_segment_kind(std::string_view text) {
  if (text == "new-road") return SegmentKind::kNewRoad;
  if (text == "forward-revisit") return SegmentKind::kForwardRevisit;
  if (text == "reverse-revisit") return SegmentKind::kReverseRevisit;
  throw ValidationError("unknown segment kind '" + std::string(text) + "'");
}

void WorldSpec::validate() const {
  if (segments.empty()) throw ValidationError("world needs at least one segment");
  if (segments.front().kind != SegmentKind::kNewRoad) {
    throw ValidationError("the first segment must be a new road");
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.kind == SegmentKind::kNewRoad) {
      if (seg.length < 1) throw ValidationError("segment " + std::to_string(s) + ": length < 1");
    } else if (seg.target >= s) {
      throw ValidationError("segment " + std::to_string(s) +
                            ": revisit target must be an earlier segment");
    }
  }
  if (place_dim < 1) throw ValidationError("place_dim must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
  std::set<std::size_t> grouped;
  for (const auto& g : alias_groups) {
    for (const auto s : g) {
      if (s >= segments.size() || segments[s].kind != SegmentKind::kNewRoad) {
        throw ValidationError("alias groups may only list new-road segments");
      }
      if (!grouped.insert(s).second) {
        throw ValidationError("segment " + std::to_string(s) + " appears in two alias groups");
      }
    }
  }
  if (output == WorldOutput::kScans && (scan_azimuths < 1 || scan_ranges < 1)) {
    throw ValidationError("scan dimensions must be positive");
  }
}

std::vector<std::size_t> World::live_frames_of(SegmentKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < live_segment.size(); ++f) {
    if (spec.segments[live_segment[f]].kind == kind) out.push_back(f);
  }
  return out;
}

World generate_world(const WorldSpec& spec, double radius) {
  spec.validate();
  World w;
  w.spec = spec;

  // Places and the order in which each segment visits them.
  std::vector<std::vector<Visit>> visits(spec.segments.size());
  std::size_t roads = 0;
  for (std::size_t s = 0; s < spec.segments.size(); ++s) {
    const auto& seg = spec.segments[s];
    if (seg.kind == SegmentKind::kNewRoad) {
      for (std::size_t k = 0; k < seg.length; ++k) {
        visits[s].push_back({w.ref_poses.size(), false});
        w.ref_poses.push_back({static_cast<double>(k) * kFrameSpacing,
                               static_cast<double>(roads) * kRoadSeparation, 0.0});
      }
      ++roads;
    } else {
      visits[s] = visits[seg.target];
      if (seg.kind == SegmentKind::kReverseRevisit) {
        std::reverse(visits[s].begin(), visits[s].end());
        for (auto& v : visits[s]) v.reversed = !v.reversed;
      }
    }
  }
  const std::size_t n_places = w.ref_poses.size();

  // Appearance of each place; aliased roads reuse the group leader's.
  std::vector<std::size_t> appearance(n_places);
  for (std::size_t p = 0; p < n_places; ++p) appearance[p] = p;
  for (const auto& group : spec.alias_groups) {
    if (group.empty()) continue;
    const auto& leader = visits[group.front()];
    for (std::size_t m = 1; m < group.size(); ++m) {
      const auto& member = visits[group[m]];
      for (std::size_t k = 0; k < std::min(leader.size(), member.size()); ++k) {
        appearance[member[k].place] = appearance[leader[k].place];
      }
    }
  }

  for (std::size_t s = 0; s < spec.segments.size(); ++s) {
    for (const auto& v : visits[s]) {
      const auto& p = w.ref_poses[v.place];
      w.live_poses.push_back({p.x, p.y, wrap_angle(v.reversed ? std::numbers::pi : 0.0)});
      w.live_segment.push_back(s);
      w.live_place.push_back(v.place);
    }
  }

  auto appearance_rng = make_rng(spec.seed, static_cast<std::uint64_t>(Stream::kAppearance));
  if (spec.output == WorldOutput::kDescriptors) {
    RowMatrix looks(static_cast<Eigen::Index>(n_places), static_cast<Eigen::Index>(spec.place_dim));
    for (std::size_t p = 0; p < n_places; ++p) {
      if (appearance[p] == p) {
        looks.row(static_cast<Eigen::Index>(p)) =
            random_unit_vector(spec.place_dim, appearance_rng).transpose();
      } else {
        looks.row(static_cast<Eigen::Index>(p)) = looks.row(static_cast<Eigen::Index>(appearance[p]));
      }
    }
    RowMatrix live(static_cast<Eigen::Index>(w.live_place.size()), looks.cols());
    for (std::size_t f = 0; f < w.live_place.size(); ++f) {
      live.row(static_cast<Eigen::Index>(f)) = looks.row(static_cast<Eigen::Index>(w.live_place[f]));
    }
    w.ref_descriptors = DescriptorSequence(std::move(looks), "sim-ref");
    w.live_descriptors = perturb(DescriptorSequence(std::move(live), "sim-live"), spec.noise_sigma,
                                 spec.seed ^ static_cast<std::uint64_t>(Stream::kLiveNoise));
    w.live_descriptors.set_source_id("sim-live");
  } else {
    std::vector<PolarScan> looks(n_places);
    for (std::size_t p = 0; p < n_places; ++p) {
      looks[p] = appearance[p] == p ? random_scan(spec.scan_azimuths, spec.scan_ranges, appearance_rng)
                                    : looks[appearance[p]];
    }
    auto noise_rng = make_rng(spec.seed, static_cast<std::uint64_t>(Stream::kLiveNoise));
    const auto half_turn = static_cast<std::ptrdiff_t>(spec.scan_azimuths / 2);
    for (std::size_t s = 0; s < spec.segments.size(); ++s) {
      for (const auto& v : visits[s]) {
        PolarScan scan = looks[v.place];
        if (v.reversed && spec.rotate_reverse) scan = shift_azimuth(scan, half_turn);
        w.live_scans.push_back(noisy_scan(scan, spec.noise_sigma, noise_rng));
      }
    }
    w.ref_scans = std::move(looks);
  }

  w.gt = gt_distance_matrix(w.ref_poses, w.live_poses, radius);
  return w;
}

DescriptorSequence perturb(const DescriptorSequence& seq, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("perturbation sigma must be >= 0");
  if (sigma == 0.0) return seq;
  auto rng = make_rng(seed, static_cast<std::uint64_t>(Stream::kPerturb));
  std::normal_distribution<double> normal(0.0, sigma);
  RowMatrix v = seq.vectors();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) v(i, k) += normal(rng);
  }
  return DescriptorSequence(std::move(v), seq.source_id());
}

WorldSpec default_reverse_world() {
  WorldSpec spec;
  spec.segments = {{SegmentKind::kNewRoad, 60, 0},
                   {SegmentKind::kNewRoad, 20, 0},
                   {SegmentKind::kReverseRevisit, 0, 0}};
  spec.noise_sigma = 0.05;
  spec.rotate_reverse = true;
  spec.seed = 7;
  spec.output = WorldOutput::kScans;
  spec.scan_azimuths = 64;
  spec.scan_ranges = 128;
  return spec;
}

WorldSpec default_aliased_world() {
  WorldSpec spec;
  spec.segments = {{SegmentKind::kNewRoad, 30, 0},
                   {SegmentKind::kNewRoad, 30, 0},
                   {SegmentKind::kNewRoad, 30, 0},
                   {SegmentKind::kNewRoad, 30, 0}};
  spec.alias_groups = {{1, 3}};
  spec.place_dim = 256;
  spec.noise_sigma = 0.05;
  spec.seed = 11;
  spec.output = WorldOutput::kDescriptors;
  return spec;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

}  // namespace

WorldSpec load_world_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open world spec: " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    reject_unknown(j,
                   {"segments", "place_dim", "noise_sigma", "alias_groups", "rotate_reverse", "seed",
                    "output", "scan_azimuths", "scan_ranges"},
                   path.string());
    WorldSpec spec;
    for (const auto& s : j.at("segments")) {
      reject_unknown(s, {"kind", "length", "target"}, path.string() + ": segment");
      Segment seg;
      seg.kind = parse_segment_kind(s.at("kind").get<std::string>());
      seg.length = s.value("length", std::size_t{0});
      seg.target = s.value("target", std::size_t{0});
      spec.segments.push_back(seg);
    }
    spec.place_dim = j.value("place_dim", spec.place_dim);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.alias_groups = j.value("alias_groups", spec.alias_groups);
    spec.rotate_reverse = j.value("rotate_reverse", spec.rotate_reverse);
    spec.seed = j.value("seed", spec.seed);
    const auto output = j.value("output", std::string("descriptors"));
    if (output == "descriptors") {
      spec.output = WorldOutput::kDescriptors;
    } else if (output == "scans") {
      spec.output = WorldOutput::kScans;
    } else {
      throw ValidationError("world output must be 'descriptors' or 'scans'");
    }
    spec.scan_azimuths = j.value("scan_azimuths", spec.scan_azimuths);
    spec.scan_ranges = j.value("scan_ranges", spec.scan_ranges);
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_world_spec(const std::filesystem::path& path, const WorldSpec& spec) {
  json j;
  j["segments"] = json::array();
  for (const auto& s : spec.segments) {
    json seg{{"kind", std::string(to_string(s.kind))}};
    if (s.kind == SegmentKind::kNewRoad) {
      seg["length"] = s.length;
    } else {
      seg["target"] = s.target;
    }
    j["segments"].push_back(seg);
  }
  j["place_dim"] = spec.place_dim;
  j["noise_sigma"] = spec.noise_sigma;
  j["alias_groups"] = spec.alias_groups;
  j["rotate_reverse"] = spec.rotate_reverse;
  j["seed"] = spec.seed;
  j["output"] = spec.output == WorldOutput::kScans ? "scans" : "descriptors";
  j["scan_azimuths"] = spec.scan_azimuths;
  j["scan_ranges"] = spec.scan_ranges;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace seqpr
