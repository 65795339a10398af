#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqpr/descriptor.hpp"
#include "seqpr/eval.hpp"
#include "seqpr/search.hpp"

namespace seqpr::app {

/// Everything one CLI invocation needs. Loaded from a `key = value` text
/// file; unknown keys are rejected.
struct RunConfig {
  DescriptorConfig descriptor;
  SearchConfig search;
  std::size_t enhancement = 20;  // R
  double radius = kDefaultTruePositiveRadius;
  std::size_t sweep_levels = 100;

  // Inputs. Unset paths fall back to the default file names in the output
  // directory, so staged commands pick up each other's artifacts.
  std::optional<std::filesystem::path> ref_scans;
  std::optional<std::filesystem::path> live_scans;
  std::optional<std::filesystem::path> ref_descriptors;
  std::optional<std::filesystem::path> live_descriptors;
  std::optional<std::filesystem::path> ref_poses;
  std::optional<std::filesystem::path> live_poses;

  std::string sim_preset = "reverse-revisit";
  std::optional<std::filesystem::path> sim_spec;
  std::optional<std::uint64_t> sim_seed;

  std::vector<std::size_t> tune_windows{5, 10, 20};
  std::vector<std::size_t> tune_enhancements{10, 20, 40};

  void validate() const;
  /// Effective configuration, defaults included, as written into reports.
  std::map<std::string, std::string> echo() const;
};

/// Relative paths inside the file are resolved against `base_dir`.
RunConfig parse_run_config(std::istream& is, const std::filesystem::path& base_dir,
                           const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace seqpr::app
