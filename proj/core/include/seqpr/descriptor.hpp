#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "seqpr/ingest.hpp"

namespace seqpr {

enum class DescriptorMode { kBaselineThumbnail, kRotationInvariant };

std::string_view to_string(DescriptorMode mode);
DescriptorMode parse_descriptor_mode(std::string_view text);

struct DescriptorConfig {
  DescriptorMode mode = DescriptorMode::kRotationInvariant;
  std::size_t thumb_azimuths = 32;
  std::size_t thumb_ranges = 32;
  std::size_t patch_size = 8;
  std::size_t ri_bins = 16;

  /// Throws ValidationError if the thumbnail is smaller than a patch.
  void validate() const;
  /// Additionally checks the config against a concrete scan shape.
  void validate_for(std::size_t azimuths, std::size_t range_bins) const;
};

/// Patches (and contrast windows) whose variance falls below this are zeroed.
inline constexpr double kVarianceFloor = 1e-8;

/// Block-mean downsampled, patch-normalised thumbnail, flattened row-major.
Eigen::VectorXd preprocess_baseline(const PolarScan& scan, const DescriptorConfig& cfg);

struct RiDescriptor {
  Eigen::VectorXd values;
  bool degenerate = false;  // all-zero input; normalisation skipped
};

/// Per range bin, the first `ri_bins` DFT magnitudes of the azimuth column,
/// concatenated bin-major and L2 normalised. Invariant to azimuth shifts.
RiDescriptor ri_descriptor(const PolarScan& scan, const DescriptorConfig& cfg);

/// Applies the configured transform to every scan. Output order follows the
/// input order whatever the thread count.
DescriptorSequence embed_sequence(const std::vector<PolarScan>& scans,
                                  const DescriptorConfig& cfg, std::size_t threads = 0);

}  // namespace seqpr
