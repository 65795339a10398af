#include "seqpr/diffmat.hpp"

#include <cmath>
#include <string>

#include "seqpr/error.hpp"
#include "seqpr/parallel.hpp"

namespace seqpr {

DifferenceMatrix pairwise_distances(const DescriptorSequence& reference,
                                    const DescriptorSequence& live, std::size_t threads) {
  if (reference.empty() || live.empty()) {
    throw ValidationError("difference matrix needs non-empty reference and live sequences");
  }
  if (reference.dim() != live.dim()) {
    throw ValidationError("descriptor dimension mismatch: reference " +
                          std::to_string(reference.dim()) + ", live " +
                          std::to_string(live.dim()));
  }
  DifferenceMatrix d;
  d.values.resize(static_cast<Eigen::Index>(reference.size()),
                  static_cast<Eigen::Index>(live.size()));
  const auto& ref = reference.vectors();
  const auto& liv = live.vectors();
  // Direct differences rather than the Gram expansion: exact zeros on
  // identical rows and no cancellation for near neighbours.
  parallel_for(live.size(), threads, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
      d.values(i, col) = (ref.row(i) - liv.row(col)).norm();
    }
  });
  return d;
}

DifferenceMatrix enhance_contrast(const DifferenceMatrix& d, std::size_t window,
                                  std::size_t threads) {
  if (d.enhanced) throw ValidationError("difference matrix is already contrast enhanced");
  if (window < 1 || window > d.n_ref()) {
    throw ValidationError("enhancement window R = " + std::to_string(window) +
                          " must lie in [1, N_ref = " + std::to_string(d.n_ref()) + "]");
  }
  DifferenceMatrix out;
  out.values.resize(d.values.rows(), d.values.cols());
  out.enhanced = true;
  out.window = window;

  const auto rows = d.values.rows();
  const auto r = static_cast<Eigen::Index>(window);
  parallel_for(d.n_live(), threads, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    for (Eigen::Index start = 0; start < rows; start += r) {
      const auto len = std::min(r, rows - start);
      const auto src = d.values.col(col).segment(start, len);
      auto dst = out.values.col(col).segment(start, len);
      const double mean = src.mean();
      const double sigma = std::sqrt((src.array() - mean).square().mean());
      if (sigma < kStdFloor) {
        dst.setZero();
      } else {
        dst = (src.array() - mean) / sigma;
      }
    }
  });
  return out;
}

void write_difference_matrix(const std::filesystem::path& path, const DifferenceMatrix& d) {
  write_matrix_container(path, d.values, d.enhanced ? d.window.value_or(0) : 0);
}

DifferenceMatrix read_difference_matrix(const std::filesystem::path& path) {
  auto blob = read_matrix_container(path);
  DifferenceMatrix d;
  d.values = std::move(blob.values);
  if (blob.aux > 0) {
    d.enhanced = true;
    d.window = static_cast<std::size_t>(blob.aux);
  } else if (!d.values.allFinite() || (d.values.array() < 0.0).any()) {
    throw ParseError(path.string() + ": raw difference matrix must be finite and non-negative");
  }
  return d;
}

void write_difference_matrix_csv(const std::filesystem::path& path, const DifferenceMatrix& d) {
  write_matrix_csv(path, d.values);
}

}  // namespace seqpr
