#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "seqpr/descriptor.hpp"
#include "seqpr/diffmat.hpp"
#include "seqpr/error.hpp"
#include "seqpr/sim.hpp"
#include "support/test_util.hpp"

namespace seqpr {
namespace {

WorldSpec revisit_spec(double noise) {
  WorldSpec spec;
  spec.segments = {{SegmentKind::kNewRoad, 25, 0}, {SegmentKind::kForwardRevisit, 0, 0}};
  spec.noise_sigma = noise;
  spec.place_dim = 32;
  spec.seed = 3;
  return spec;
}

TEST(GenerateWorld, NoiseFreeForwardRevisitRepeatsReference) {
  const auto w = generate_world(revisit_spec(0.0));
  ASSERT_EQ(w.ref_descriptors.size(), 25u);
  ASSERT_EQ(w.live_descriptors.size(), 50u);
  for (std::size_t f = 25; f < 50; ++f) {
    EXPECT_TRUE((w.live_descriptors.row(f).array() == w.ref_descriptors.row(f - 25).array()).all());
  }
}

TEST(GenerateWorld, OutAndBackGroundTruthBand) {
  WorldSpec spec;
  spec.segments = {{SegmentKind::kNewRoad, 30, 0}, {SegmentKind::kReverseRevisit, 0, 0}};
  const auto w = generate_world(spec);
  ASSERT_EQ(w.gt.n_live(), 60u);
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_EQ(w.gt.distance(static_cast<Eigen::Index>(29 - k), static_cast<Eigen::Index>(30 + k)), 0.0);
    EXPECT_GE(w.gt.distance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(30 + k)),
              std::abs(29.0 - 2.0 * static_cast<double>(k)) - 1e-12);
    EXPECT_DOUBLE_EQ(std::abs(w.live_poses[30 + k].theta), std::numbers::pi);
  }
}

TEST(GenerateWorld, RevisitFramesSitOnTheirTargets) {
  for (const auto& spec : {default_reverse_world(), default_aliased_world(), revisit_spec(0.1)}) {
    const auto w = generate_world(spec);
    for (std::size_t f = 0; f < w.live_place.size(); ++f) {
      EXPECT_LE(w.gt.distance(static_cast<Eigen::Index>(w.live_place[f]), static_cast<Eigen::Index>(f)), 0.5);
    }
  }
}

TEST(GenerateWorld, SameSeedIsBitIdentical) {
  for (const auto& spec : {default_reverse_world(), default_aliased_world()}) {
    const auto a = generate_world(spec);
    const auto b = generate_world(spec);
    EXPECT_TRUE((a.live_descriptors.vectors().array() == b.live_descriptors.vectors().array()).all());
    ASSERT_EQ(a.live_scans.size(), b.live_scans.size());
    for (std::size_t k = 0; k < a.live_scans.size(); ++k) {
      ASSERT_TRUE((a.live_scans[k].power.array() == b.live_scans[k].power.array()).all());
    }
    EXPECT_TRUE((a.gt.distance.array() == b.gt.distance.array()).all());
  }
  auto other = default_aliased_world();
  other.seed += 1;
  EXPECT_FALSE((generate_world(other).live_descriptors.vectors().array() ==
                generate_world(default_aliased_world()).live_descriptors.vectors().array())
                   .all());
}

TEST(GenerateWorld, AliasedSegmentsShareAppearance) {
  const auto w = generate_world(default_aliased_world());
  // segments 1 and 3 each hold 30 places, at reference rows 30.. and 90..
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_TRUE((w.ref_descriptors.row(30 + k).array() == w.ref_descriptors.row(90 + k).array()).all());
  }
  EXPECT_FALSE((w.ref_descriptors.row(0).array() == w.ref_descriptors.row(60).array()).all());
}

TEST(GenerateWorld, ReverseScansAreHalfTurnShifts) {
  auto spec = default_reverse_world();
  spec.noise_sigma = 0.0;
  const auto w = generate_world(spec);
  const auto rev = w.live_frames_of(SegmentKind::kReverseRevisit);
  ASSERT_EQ(rev.size(), 60u);
  for (const auto f : rev) {
    const auto expected = shift_azimuth(w.ref_scans[w.live_place[f]], 32);
    ASSERT_TRUE((w.live_scans[f].power.array() == expected.power.array()).all());
  }
}

double band_contrast(DescriptorMode mode) {
  const auto w = generate_world(default_reverse_world());
  DescriptorConfig dc;
  dc.mode = mode;
  const auto d = pairwise_distances(embed_sequence(w.ref_scans, dc), embed_sequence(w.live_scans, dc));
  double band = 0.0, off = 0.0;
  std::size_t n_band = 0, n_off = 0;
  for (const auto j : w.live_frames_of(SegmentKind::kReverseRevisit)) {
    for (std::size_t i = 0; i < d.n_ref(); ++i) {
      if (i == w.live_place[j]) {
        band += d(i, j);
        ++n_band;
      } else {
        off += d(i, j);
        ++n_off;
      }
    }
  }
  band /= static_cast<double>(n_band);
  off /= static_cast<double>(n_off);
  return (off - band) / off;
}

TEST(GenerateWorld, ReverseBandVisibleOnlyToInvariantDescriptor) {
  EXPECT_GT(band_contrast(DescriptorMode::kRotationInvariant), 0.5);
  EXPECT_LT(std::abs(band_contrast(DescriptorMode::kBaselineThumbnail)), 0.05);
}

TEST(GenerateWorld, InvalidSpecsRejected) {
  WorldSpec spec;
  spec.segments = {{SegmentKind::kNewRoad, 5, 0}, {SegmentKind::kForwardRevisit, 0, 1}};
  EXPECT_THROW(generate_world(spec), ValidationError);
  spec.segments = {{SegmentKind::kReverseRevisit, 0, 0}};
  EXPECT_THROW(generate_world(spec), ValidationError);
  spec.segments = {{SegmentKind::kNewRoad, 0, 0}};
  EXPECT_THROW(generate_world(spec), ValidationError);
  spec.segments = {{SegmentKind::kNewRoad, 3, 0}};
  spec.noise_sigma = -1.0;
  EXPECT_THROW(generate_world(spec), ValidationError);
}

TEST(Perturb, ZeroSigmaIsIdentity) {
  std::mt19937_64 rng(60);
  const DescriptorSequence seq(testing::random_matrix(5, 7, rng));
  EXPECT_TRUE((perturb(seq, 0.0, 1).vectors().array() == seq.vectors().array()).all());
}

TEST(Perturb, NormConcentration) {
  const DescriptorSequence seq(RowMatrix::Zero(20, 4096));
  const auto p = perturb(seq, 0.1, 9);
  for (std::size_t i = 0; i < 20; ++i) {
    const double n = p.row(i).norm();
    EXPECT_GT(n, 6.4 * 0.8);
    EXPECT_LT(n, 6.4 * 1.2);
  }
}

TEST(Perturb, SeedsDiffer) {
  const DescriptorSequence seq(RowMatrix::Zero(2, 16));
  EXPECT_FALSE((perturb(seq, 0.1, 1).vectors().array() == perturb(seq, 0.1, 2).vectors().array()).all());
  EXPECT_TRUE((perturb(seq, 0.1, 1).vectors().array() == perturb(seq, 0.1, 1).vectors().array()).all());
}

TEST(WorldSpecIo, JsonRoundTrip) {
  testing::TempDir dir("world");
  auto spec = default_reverse_world();
  spec.alias_groups = {{0}};
  write_world_spec(dir / "w.json", spec);
  const auto back = load_world_spec(dir / "w.json");
  ASSERT_EQ(back.segments.size(), spec.segments.size());
  for (std::size_t s = 0; s < spec.segments.size(); ++s) {
    EXPECT_EQ(back.segments[s].kind, spec.segments[s].kind);
    if (spec.segments[s].kind == SegmentKind::kNewRoad) {
      EXPECT_EQ(back.segments[s].length, spec.segments[s].length);
    } else {
      EXPECT_EQ(back.segments[s].target, spec.segments[s].target);
    }
  }
  EXPECT_EQ(back.seed, spec.seed);
  EXPECT_EQ(back.noise_sigma, spec.noise_sigma);
  EXPECT_EQ(back.rotate_reverse, spec.rotate_reverse);
  EXPECT_EQ(back.output, spec.output);
  EXPECT_EQ(back.alias_groups, spec.alias_groups);
}

TEST(WorldSpecIo, UnknownKeyAndBadJsonRejected) {
  testing::TempDir dir("world");
  {
    std::ofstream os(dir / "a.json");
    os << R"({"segments":[{"kind":"new-road","length":3}],"colour":"red"})";
  }
  EXPECT_THROW(load_world_spec(dir / "a.json"), ValidationError);
  {
    std::ofstream os(dir / "b.json");
    os << R"({"segments":[)";
  }
  EXPECT_THROW(load_world_spec(dir / "b.json"), ParseError);
}

}  // namespace
}  // namespace seqpr
