#include <random>

#include <gtest/gtest.h>

#include "seqpr/descriptor.hpp"
#include "seqpr/error.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

namespace seqpr {
namespace {

DescriptorConfig baseline(std::size_t thumb_a, std::size_t thumb_r, std::size_t patch) {
  DescriptorConfig c;
  c.mode = DescriptorMode::kBaselineThumbnail;
  c.thumb_azimuths = thumb_a;
  c.thumb_ranges = thumb_r;
  c.patch_size = patch;
  return c;
}

DescriptorConfig invariant(std::size_t bins) {
  DescriptorConfig c;
  c.mode = DescriptorMode::kRotationInvariant;
  c.ri_bins = bins;
  return c;
}

TEST(PreprocessBaseline, ConstantScanGivesZeros) {
  PolarScan s{RowMatrix::Constant(16, 16, 0.5)};
  for (std::size_t p : {1u, 2u, 4u, 8u}) {
    const auto v = preprocess_baseline(s, baseline(8, 8, p));
    EXPECT_EQ(v.size(), 64);
    EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(PreprocessBaseline, TwoByTwoCheckerboard) {
  // mean 0.5, population std 0.5
  PolarScan s{RowMatrix(2, 2)};
  s.power << 0, 1, 1, 0;
  const auto v = preprocess_baseline(s, baseline(2, 2, 2));
  ASSERT_EQ(v.size(), 4);
  EXPECT_DOUBLE_EQ(v(0), -1.0);
  EXPECT_DOUBLE_EQ(v(1), 1.0);
  EXPECT_DOUBLE_EQ(v(2), 1.0);
  EXPECT_DOUBLE_EQ(v(3), -1.0);
}

TEST(PreprocessBaseline, BlockMeanDownsample) {
  // 4x4 -> 2x2 with P = 1: every patch is a single pixel and therefore zeroed,
  // so check the block means through P = 2 instead: blocks 0.1, 0.3, 0.5, 0.7.
  PolarScan s{RowMatrix(4, 4)};
  s.power << 0.1, 0.1, 0.3, 0.3,  //
      0.1, 0.1, 0.3, 0.3,         //
      0.5, 0.5, 0.7, 0.7,         //
      0.5, 0.5, 0.7, 0.7;
  const auto v = preprocess_baseline(s, baseline(2, 2, 2));
  const std::vector<double> thumb{0.1, 0.3, 0.5, 0.7};
  double mean = 0.0;
  for (double t : thumb) mean += t / 4;
  double var = 0.0;
  for (double t : thumb) var += (t - mean) * (t - mean) / 4;
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(v(k), (thumb[static_cast<std::size_t>(k)] - mean) / std::sqrt(var), 1e-12);
}

TEST(PreprocessBaseline, ScanSmallerThanThumbnailRejected) {
  PolarScan s{RowMatrix::Constant(4, 64, 0.2)};
  EXPECT_THROW(preprocess_baseline(s, baseline(8, 8, 4)), ValidationError);
}

TEST(PreprocessBaseline, PatchStatisticsProperty) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto scan = testing::random_scan(64, 128, rng);
    const auto cfg = baseline(32, 32, 8);
    const auto v = preprocess_baseline(scan, cfg);
    Eigen::Map<const RowMatrix> thumb(v.data(), 32, 32);
    for (int r0 = 0; r0 < 32; r0 += 8) {
      for (int c0 = 0; c0 < 32; c0 += 8) {
        const auto patch = thumb.block(r0, c0, 8, 8);
        if (patch.cwiseAbs().maxCoeff() == 0.0) continue;  // zero-flagged
        const double mean = patch.mean();
        const double var = (patch.array() - mean).square().mean();
        EXPECT_LE(std::abs(mean), 1e-9);
        EXPECT_NEAR(var, 1.0, 1e-6);
      }
    }
  }
}

TEST(PreprocessBaseline, NotRotationInvariant) {
  std::mt19937_64 rng(11);
  const auto scan = testing::random_scan(64, 128, rng);
  const auto cfg = baseline(32, 32, 8);
  const auto a = preprocess_baseline(scan, cfg);
  const auto b = preprocess_baseline(shift_azimuth(scan, 17), cfg);
  EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 0.1);
}

TEST(RiDescriptor, ImpulseColumnSpectrum) {
  // One range bin, A = 4, column [1,0,0,0]: every DFT magnitude is 1.
  PolarScan s{RowMatrix(4, 1)};
  s.power << 1, 0, 0, 0;
  const auto oracle_mags = oracle::dft_magnitudes({1, 0, 0, 0});
  ASSERT_EQ(oracle_mags.size(), 4u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(oracle_mags[static_cast<std::size_t>(k)], 1.0, 1e-15);

  const auto d = ri_descriptor(s, invariant(3));
  ASSERT_EQ(d.values.size(), 3);
  EXPECT_FALSE(d.degenerate);
  // [1,1,1] before normalisation
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(d.values(k), 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(RiDescriptor, MatchesBruteForceDft) {
  std::mt19937_64 rng(12);
  const auto scan = testing::random_scan(12, 5, rng);
  const std::size_t k = 7;
  std::vector<double> expected;
  for (Eigen::Index c = 0; c < 5; ++c) {
    std::vector<double> col(12);
    for (Eigen::Index r = 0; r < 12; ++r) col[static_cast<std::size_t>(r)] = scan.power(r, c);
    const auto mags = oracle::dft_magnitudes(col);
    expected.insert(expected.end(), mags.begin(), mags.begin() + static_cast<long>(k));
  }
  double norm = 0.0;
  for (double e : expected) norm += e * e;
  norm = std::sqrt(norm);

  const auto d = ri_descriptor(scan, invariant(k));
  ASSERT_EQ(d.values.size(), static_cast<Eigen::Index>(expected.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(d.values(static_cast<Eigen::Index>(i)), expected[i] / norm, 1e-12);
  }
}

TEST(RiDescriptor, ZeroScanIsDegenerate) {
  PolarScan s{RowMatrix::Zero(8, 4)};
  const auto d = ri_descriptor(s, invariant(3));
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.values.size(), 12);
  EXPECT_EQ(d.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RiDescriptor, TooManyBinsRejected) {
  PolarScan s{RowMatrix::Constant(8, 4, 0.3)};
  EXPECT_THROW(ri_descriptor(s, invariant(6)), ValidationError);
  EXPECT_NO_THROW(ri_descriptor(s, invariant(5)));
}

TEST(RiDescriptor, ShiftInvarianceAndUnitNormProperty) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> shift(0, 63);
  const auto cfg = invariant(16);
  for (int trial = 0; trial < 30; ++trial) {
    const auto scan = testing::random_scan(64, 32, rng);
    const auto a = ri_descriptor(scan, cfg);
    const auto b = ri_descriptor(shift_azimuth(scan, shift(rng)), cfg);
    EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(a.values.norm(), 1.0, 1e-9);
  }
}

TEST(EmbedSequence, IdenticalScansIdenticalVectors) {
  std::mt19937_64 rng(14);
  const auto scan = testing::random_scan(16, 8, rng);
  const std::vector<PolarScan> scans(5, scan);
  const auto seq = embed_sequence(scans, invariant(4), 3);
  ASSERT_EQ(seq.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_TRUE((seq.row(i).array() == seq.row(0).array()).all());
}

TEST(EmbedSequence, EmptyTrajectoryRejected) {
  try {
    embed_sequence({}, invariant(4));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("empty trajectory"), std::string::npos);
  }
}

TEST(EmbedSequence, MixedShapesNameFirstOffender) {
  std::mt19937_64 rng(15);
  std::vector<PolarScan> scans{testing::random_scan(8, 4, rng), testing::random_scan(8, 4, rng),
                               testing::random_scan(8, 5, rng), testing::random_scan(9, 4, rng)};
  try {
    embed_sequence(scans, invariant(2));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("scan 2"), std::string::npos);
  }
}

TEST(EmbedSequence, OrderIndependentOfThreads) {
  std::mt19937_64 rng(16);
  std::vector<PolarScan> scans;
  for (int i = 0; i < 23; ++i) scans.push_back(testing::random_scan(32, 32, rng));
  for (const auto& cfg : {invariant(8), baseline(16, 16, 4)}) {
    const auto one = embed_sequence(scans, cfg, 1);
    const auto many = embed_sequence(scans, cfg, 7);
    EXPECT_TRUE((one.vectors().array() == many.vectors().array()).all());
    for (std::size_t i = 0; i < scans.size(); ++i) {
      const Eigen::VectorXd direct = cfg.mode == DescriptorMode::kRotationInvariant
                                         ? ri_descriptor(scans[i], cfg).values
                                         : preprocess_baseline(scans[i], cfg);
      EXPECT_TRUE((one.row(i).transpose().array() == direct.array()).all());
    }
  }
}

TEST(DescriptorConfig, Validation) {
  EXPECT_THROW(baseline(4, 4, 8).validate(), ValidationError);
  EXPECT_THROW(baseline(8, 8, 0).validate(), ValidationError);
  EXPECT_NO_THROW(baseline(8, 8, 8).validate());
  EXPECT_EQ(parse_descriptor_mode("baseline-thumbnail"), DescriptorMode::kBaselineThumbnail);
  EXPECT_THROW(parse_descriptor_mode("kradar"), ValidationError);
}

}  // namespace
}  // namespace seqpr
