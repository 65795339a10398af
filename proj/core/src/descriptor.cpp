#include "seqpr/descriptor.hpp"

#include <cmath>
#include <complex>
#include <string>

#include <unsupported/Eigen/FFT>

#include "seqpr/error.hpp"
#include "seqpr/parallel.hpp"

namespace seqpr {

std::string_view to_string(DescriptorMode mode) {
  return mode == DescriptorMode::kBaselineThumbnail ? "baseline-thumbnail" : "rotation-invariant";
}

DescriptorMode parse_descriptor_mode(std::string_view text) {
  if (text == "baseline-thumbnail") return DescriptorMode::kBaselineThumbnail;
  if (text == "rotation-invariant") return DescriptorMode::kRotationInvariant;
  throw ValidationError("unknown descriptor mode '" + std::string(text) +
                        "' (expected baseline-thumbnail or rotation-invariant)");
}

void DescriptorConfig::validate() const {
  if (patch_size < 1) throw ValidationError("descriptor.patch_size must be >= 1");
  if (thumb_azimuths < patch_size || thumb_ranges < patch_size) {
    throw ValidationError("descriptor thumbnail must be at least patch_size in both dimensions");
  }
  if (ri_bins < 1) throw ValidationError("descriptor.ri_bins must be >= 1");
}

void DescriptorConfig::validate_for(std::size_t azimuths, std::size_t range_bins) const {
  validate();
  if (mode == DescriptorMode::kBaselineThumbnail) {
    if (azimuths < thumb_azimuths || range_bins < thumb_ranges) {
      throw ValidationError("scan " + std::to_string(azimuths) + "x" +
                            std::to_string(range_bins) + " is smaller than the thumbnail " +
                            std::to_string(thumb_azimuths) + "x" + std::to_string(thumb_ranges));
    }
  } else if (ri_bins > azimuths / 2 + 1) {
    throw ValidationError("descriptor.ri_bins = " + std::to_string(ri_bins) +
                          " exceeds floor(A/2)+1 = " + std::to_string(azimuths / 2 + 1));
  }
}

namespace {

// Input rows [lo(k), lo(k+1)) feed output row k; sizes differ by at most one.
inline Eigen::Index block_start(Eigen::Index k, Eigen::Index in, Eigen::Index out) {
  return (k * in) / out;
}

RowMatrix block_mean(const RowMatrix& src, Eigen::Index rows, Eigen::Index cols) {
  RowMatrix dst(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto r0 = block_start(r, src.rows(), rows);
    const auto r1 = block_start(r + 1, src.rows(), rows);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto c0 = block_start(c, src.cols(), cols);
      const auto c1 = block_start(c + 1, src.cols(), cols);
      dst(r, c) = src.block(r0, c0, r1 - r0, c1 - c0).mean();
    }
  }
  return dst;
}

}  // namespace

Eigen::VectorXd preprocess_baseline(const PolarScan& scan, const DescriptorConfig& cfg) {
  cfg.validate_for(scan.azimuths(), scan.range_bins());
  const auto rows = static_cast<Eigen::Index>(cfg.thumb_azimuths);
  const auto cols = static_cast<Eigen::Index>(cfg.thumb_ranges);
  const auto p = static_cast<Eigen::Index>(cfg.patch_size);

  RowMatrix thumb = block_mean(scan.power, rows, cols);

  // Patches tile the thumbnail; edge patches are clipped when P does not divide it.
  for (Eigen::Index r0 = 0; r0 < rows; r0 += p) {
    for (Eigen::Index c0 = 0; c0 < cols; c0 += p) {
      auto patch = thumb.block(r0, c0, std::min(p, rows - r0), std::min(p, cols - c0));
      const double mean = patch.mean();
      const double var = (patch.array() - mean).square().mean();
      if (var < kVarianceFloor) {
        patch.setZero();
      } else {
        patch = ((patch.array() - mean) / std::sqrt(var)).matrix();
      }
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(thumb.data(), thumb.size());
}

RiDescriptor ri_descriptor(const PolarScan& scan, const DescriptorConfig& cfg) {
  cfg.validate_for(scan.azimuths(), scan.range_bins());
  const auto a = static_cast<Eigen::Index>(scan.azimuths());
  const auto b = static_cast<Eigen::Index>(scan.range_bins());
  const auto k = static_cast<Eigen::Index>(cfg.ri_bins);

  RiDescriptor out;
  out.values.setZero(k * b);

  Eigen::FFT<double> fft;
  std::vector<double> column(static_cast<std::size_t>(a));
  std::vector<std::complex<double>> spectrum;
  for (Eigen::Index c = 0; c < b; ++c) {
    for (Eigen::Index r = 0; r < a; ++r) column[static_cast<std::size_t>(r)] = scan.power(r, c);
    fft.fwd(spectrum, column);
    for (Eigen::Index f = 0; f < k; ++f) {
      out.values(c * k + f) = std::abs(spectrum[static_cast<std::size_t>(f)]);
    }
  }

  const double norm = out.values.norm();
  if (norm == 0.0) {
    out.degenerate = true;
  } else {
    out.values /= norm;
  }
  return out;
}

DescriptorSequence embed_sequence(const std::vector<PolarScan>& scans,
                                  const DescriptorConfig& cfg, std::size_t threads) {
  if (scans.empty()) throw ValidationError("empty trajectory");
  const std::size_t a = scans.front().azimuths();
  const std::size_t b = scans.front().range_bins();
  for (std::size_t s = 1; s < scans.size(); ++s) {
    if (scans[s].azimuths() != a || scans[s].range_bins() != b) {
      throw ValidationError("scan " + std::to_string(s) + " has shape " +
                            std::to_string(scans[s].azimuths()) + "x" +
                            std::to_string(scans[s].range_bins()) + ", expected " +
                            std::to_string(a) + "x" + std::to_string(b));
    }
  }
  try {
    cfg.validate_for(a, b);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("scan 0: ") + e.what());
  }

  const std::size_t dim = cfg.mode == DescriptorMode::kBaselineThumbnail
                              ? cfg.thumb_azimuths * cfg.thumb_ranges
                              : cfg.ri_bins * b;
  RowMatrix out(static_cast<Eigen::Index>(scans.size()), static_cast<Eigen::Index>(dim));
  parallel_for(scans.size(), threads, [&](std::size_t s) {
    try {
      const Eigen::VectorXd v = cfg.mode == DescriptorMode::kBaselineThumbnail
                                    ? preprocess_baseline(scans[s], cfg)
                                    : ri_descriptor(scans[s], cfg).values;
      out.row(static_cast<Eigen::Index>(s)) = v.transpose();
    } catch (const std::exception& e) {
      throw ValidationError("scan " + std::to_string(s) + ": " + e.what());
    }
  });
  return DescriptorSequence(std::move(out));
}

}  // namespace seqpr
