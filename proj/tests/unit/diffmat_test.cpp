#include <random>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "seqpr/diffmat.hpp"
#include "seqpr/error.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

namespace seqpr {
namespace {

using testing::random_matrix;

TEST(PairwiseDistances, SelfMatchHasZeroDiagonalAndIsSymmetric) {
  std::mt19937_64 rng(20);
  const DescriptorSequence seq(random_matrix(9, 13, rng));
  const auto d = pairwise_distances(seq, seq);
  EXPECT_EQ(d.values.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((d.values - d.values.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_FALSE(d.enhanced);
}

TEST(PairwiseDistances, ThreeFourFive) {
  RowMatrix ref(2, 2);
  ref << 0, 0, 3, 4;
  RowMatrix live(1, 2);
  live << 0, 0;
  const auto d = pairwise_distances(DescriptorSequence(ref), DescriptorSequence(live));
  ASSERT_EQ(d.n_ref(), 2u);
  ASSERT_EQ(d.n_live(), 1u);
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(d(1, 0), 5.0);
}

TEST(PairwiseDistances, MatchesLoopOracle) {
  std::mt19937_64 rng(21);
  const auto ref = random_matrix(7, 11, rng, -1, 1);
  const auto live = random_matrix(5, 11, rng, -1, 1);
  const auto d = pairwise_distances(DescriptorSequence(ref), DescriptorSequence(live), 3);
  const auto expected = oracle::distances(testing::to_grid(ref), testing::to_grid(live));
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(d(i, j), expected[i][j], 1e-12);
  }
}

TEST(PairwiseDistances, InvariantUnderOrthonormalRotation) {
  std::mt19937_64 rng(22);
  const auto ref = random_matrix(6, 10, rng, -1, 1);
  const auto live = random_matrix(8, 10, rng, -1, 1);
  const Eigen::MatrixXd q = Eigen::MatrixXd(random_matrix(10, 10, rng, -1, 1)).householderQr().householderQ();
  const RowMatrix ref_rot = ref * q;
  const RowMatrix live_rot = live * q;
  const auto a = pairwise_distances(DescriptorSequence(ref), DescriptorSequence(live));
  const auto b = pairwise_distances(DescriptorSequence(ref_rot), DescriptorSequence(live_rot));
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PairwiseDistances, DimensionMismatchRejected) {
  std::mt19937_64 rng(23);
  EXPECT_THROW(pairwise_distances(DescriptorSequence(random_matrix(2, 3, rng)),
                                  DescriptorSequence(random_matrix(2, 4, rng))),
               ValidationError);
}

TEST(EnhanceContrast, ConstantColumnBecomesZero) {
  const auto d = enhance_contrast(testing::as_raw(RowMatrix::Constant(6, 3, 2.5)), 3);
  EXPECT_TRUE(d.enhanced);
  EXPECT_EQ(d.window, 3u);
  EXPECT_EQ(d.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EnhanceContrast, TwoEntryColumn) {
  RowMatrix m(2, 1);
  m << 0, 2;
  const auto d = enhance_contrast(testing::as_raw(m), 2);
  EXPECT_DOUBLE_EQ(d(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(d(1, 0), 1.0);
}

TEST(EnhanceContrast, FullWindowIsGlobalZScore) {
  std::mt19937_64 rng(24);
  const auto m = random_matrix(17, 4, rng, 0, 3);
  const auto d = enhance_contrast(testing::as_raw(m), 17);
  for (Eigen::Index c = 0; c < 4; ++c) {
    std::vector<double> col(17);
    for (Eigen::Index r = 0; r < 17; ++r) col[static_cast<std::size_t>(r)] = m(r, c);
    const auto z = oracle::zscore(col, kStdFloor);
    for (std::size_t r = 0; r < 17; ++r) EXPECT_NEAR(d(r, static_cast<std::size_t>(c)), z[r], 1e-12);
  }
}

// Every section of every column, including the short tail, is z-scored on its own.
TEST(EnhanceContrast, SectionStatisticsProperty) {
  std::mt19937_64 rng(25);
  std::uniform_int_distribution<std::size_t> rows(1, 40), cols(1, 12);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = rows(rng);
    const auto m = random_matrix(n, cols(rng), rng, 0, 5);
    std::uniform_int_distribution<std::size_t> win(1, n);
    const std::size_t r = win(rng);
    const auto d = enhance_contrast(testing::as_raw(m), r);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (std::size_t start = 0; start < n; start += r) {
        const std::size_t len = std::min(r, n - start);
        std::vector<double> section(len);
        for (std::size_t k = 0; k < len; ++k) section[k] = m(static_cast<Eigen::Index>(start + k), c);
        const auto z = oracle::zscore(section, kStdFloor);
        for (std::size_t k = 0; k < len; ++k) {
          ASSERT_NEAR(d(start + k, static_cast<std::size_t>(c)), z[k], 1e-12);
        }
      }
    }
  }
}

TEST(EnhanceContrast, ColumnsAreIndependent) {
  std::mt19937_64 rng(26);
  auto m = random_matrix(12, 5, rng);
  const auto before = enhance_contrast(testing::as_raw(m), 4);
  m.col(2) = random_matrix(12, 1, rng, 10, 20);
  const auto after = enhance_contrast(testing::as_raw(m), 4);
  for (Eigen::Index c : {0, 1, 3, 4}) {
    EXPECT_TRUE((before.values.col(c).array() == after.values.col(c).array()).all());
  }
}

TEST(EnhanceContrast, InvalidWindowAndDoubleEnhancementRejected) {
  const auto raw = testing::as_raw(RowMatrix::Constant(5, 2, 1.0));
  EXPECT_THROW(enhance_contrast(raw, 0), ValidationError);
  EXPECT_THROW(enhance_contrast(raw, 6), ValidationError);
  const auto once = enhance_contrast(raw, 5);
  EXPECT_THROW(enhance_contrast(once, 5), ValidationError);
}

TEST(EnhanceContrast, ThreadCountDoesNotChangeOutput) {
  std::mt19937_64 rng(27);
  const auto raw = testing::as_raw(random_matrix(50, 37, rng));
  const auto a = enhance_contrast(raw, 7, 1);
  const auto b = enhance_contrast(raw, 7, 8);
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
}

TEST(DifferenceMatrixIo, BinaryRoundTripKeepsWindow) {
  testing::TempDir dir("diff");
  std::mt19937_64 rng(28);
  const auto raw = testing::as_raw(random_matrix(8, 6, rng));
  write_difference_matrix(dir / "raw.bin", raw);
  const auto raw2 = read_difference_matrix(dir / "raw.bin");
  EXPECT_FALSE(raw2.enhanced);
  EXPECT_FALSE(raw2.window.has_value());
  EXPECT_TRUE((raw2.values.array() == raw.values.array()).all());

  const auto enh = enhance_contrast(raw, 3);
  write_difference_matrix(dir / "enh.bin", enh);
  const auto enh2 = read_difference_matrix(dir / "enh.bin");
  EXPECT_TRUE(enh2.enhanced);
  EXPECT_EQ(enh2.window, 3u);
  EXPECT_TRUE((enh2.values.array() == enh.values.array()).all());
}

TEST(DifferenceMatrixIo, CsvHasOneLinePerReferenceFrame) {
  testing::TempDir dir("diff");
  std::mt19937_64 rng(29);
  const auto raw = testing::as_raw(random_matrix(4, 3, rng));
  write_difference_matrix_csv(dir / "d.csv", raw);
  const auto back = read_matrix_csv(dir / "d.csv");
  ASSERT_EQ(back.rows(), 4);
  ASSERT_EQ(back.cols(), 3);
  EXPECT_LE((back - raw.values).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DifferenceMatrixIo, NegativeRawEntriesRejected) {
  testing::TempDir dir("diff");
  RowMatrix m(1, 2);
  m << 0.5, -0.5;
  write_difference_matrix(dir / "bad.bin", testing::as_raw(m));
  EXPECT_THROW(read_difference_matrix(dir / "bad.bin"), ParseError);
}

}  // namespace
}  // namespace seqpr
