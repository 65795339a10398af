#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "seqpr/eval.hpp"
#include "seqpr/ingest.hpp"

namespace seqpr {

enum class SegmentKind { kNewRoad, kForwardRevisit, kReverseRevisit };

std::string_view to_string(SegmentKind k);
SegmentKind parse_segment_kind(std::string_view text);

struct Segment {
  SegmentKind kind = SegmentKind::kNewRoad;
  std::size_t length = 1;  // frames; ignored for revisits (they take the target's length)
  std::size_t target = 0;  // index of an earlier segment, revisits only
};

enum class WorldOutput { kDescriptors, kScans };

/// A drive made of segments. Every new-road segment lays down fresh places
/// (one per frame, 1 m apart on its own straight line); revisits re-drive an
/// earlier segment's places forwards or backwards. The reference (map) run
/// holds each new-road place once, in order; the live run is the whole
/// drive with noise added.
struct WorldSpec {
  std::vector<Segment> segments;
  std::size_t place_dim = 256;
  double noise_sigma = 0.05;
  /// Each group lists new-road segments sharing one set of place appearances.
  /// Groups of unequal length share a prefix.
  std::vector<std::vector<std::size_t>> alias_groups;
  bool rotate_reverse = false;
  std::uint64_t seed = 1;

  WorldOutput output = WorldOutput::kDescriptors;
  std::size_t scan_azimuths = 64;
  std::size_t scan_ranges = 128;

  void validate() const;
};

struct World {
  WorldSpec spec;
  DescriptorSequence ref_descriptors;  // filled in descriptor mode
  DescriptorSequence live_descriptors;
  std::vector<PolarScan> ref_scans;  // filled in scan mode
  std::vector<PolarScan> live_scans;
  PoseTrajectory ref_poses;
  PoseTrajectory live_poses;
  GroundTruth gt;
  std::vector<std::size_t> live_segment;  // segment index of every live frame
  std::vector<std::size_t> live_place;    // reference index of every live frame's place

  /// Live frame indices belonging to segments of the given kind.
  std::vector<std::size_t> live_frames_of(SegmentKind kind) const;
};

World generate_world(const WorldSpec& spec, double radius = kDefaultTruePositiveRadius);

/// Adds N(0, sigma^2) to every component; sigma = 0 returns the input.
DescriptorSequence perturb(const DescriptorSequence& seq, double sigma, std::uint64_t seed);

/// Out-and-back world used by the CLI `simulate` default: a 60-frame road,
/// a 20-frame branch, then the first road driven in reverse.
WorldSpec default_reverse_world();
/// Two identical corridors separated by distinct roads.
WorldSpec default_aliased_world();

WorldSpec load_world_spec(const std::filesystem::path& path);
void write_world_spec(const std::filesystem::path& path, const WorldSpec& spec);

}  // namespace seqpr
