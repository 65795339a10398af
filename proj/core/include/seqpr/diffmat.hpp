#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "seqpr/ingest.hpp"

namespace seqpr {

inline constexpr double kStdFloor = 1e-8;

/// Reference frames along rows, live frames along columns.
struct DifferenceMatrix {
  RowMatrix values;
  bool enhanced = false;
  std::optional<std::size_t> window;  // R, set iff enhanced

  std::size_t n_ref() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_live() const { return static_cast<std::size_t>(values.cols()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

/// Euclidean distance between every reference/live descriptor pair.
DifferenceMatrix pairwise_distances(const DescriptorSequence& reference,
                                    const DescriptorSequence& live, std::size_t threads = 0);

/// Standardises each column within non-overlapping row sections of length
/// `window` (the last one may be shorter) using the population std.
/// Sections with std below kStdFloor are zero-filled.
DifferenceMatrix enhance_contrast(const DifferenceMatrix& d, std::size_t window,
                                  std::size_t threads = 0);

void write_difference_matrix(const std::filesystem::path& path, const DifferenceMatrix& d);
DifferenceMatrix read_difference_matrix(const std::filesystem::path& path);
void write_difference_matrix_csv(const std::filesystem::path& path, const DifferenceMatrix& d);

}  // namespace seqpr
