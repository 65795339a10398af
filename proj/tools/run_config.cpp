#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "seqpr/error.hpp"

namespace seqpr::app {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(v[k]);
  }
  return out;
}

std::size_t to_size(const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("expected a number, got '" + v + "'");
  }
  return out;
}

std::vector<std::size_t> to_size_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_size(trim(item)));
  if (out.empty()) throw ValidationError("expected a comma-separated list of integers");
  return out;
}

std::string path_text(const std::optional<fs::path>& p) { return p ? p->string() : ""; }

}  // namespace

void RunConfig::validate() const {
  descriptor.validate();
  search.validate();
  if (enhancement < 1) throw ValidationError("enhance.window must be >= 1");
  if (!(radius > 0.0)) throw ValidationError("eval.radius must be > 0");
  if (sweep_levels < 1) throw ValidationError("eval.sweep_levels must be >= 1");
  if (sim_preset != "reverse-revisit" && sim_preset != "aliased-corridor") {
    throw ValidationError("sim.preset must be reverse-revisit or aliased-corridor");
  }
  if (tune_windows.empty() || tune_enhancements.empty()) {
    throw ValidationError("tune.windows and tune.enhancements must be non-empty");
  }
}

std::map<std::string, std::string> RunConfig::echo() const {
  return {
      {"descriptor.mode", std::string(to_string(descriptor.mode))},
      {"descriptor.thumb_azimuths", std::to_string(descriptor.thumb_azimuths)},
      {"descriptor.thumb_ranges", std::to_string(descriptor.thumb_ranges)},
      {"descriptor.patch_size", std::to_string(descriptor.patch_size)},
      {"descriptor.ri_bins", std::to_string(descriptor.ri_bins)},
      {"search.window", std::to_string(search.window)},
      {"search.v_min", fmt(search.v_min)},
      {"search.v_max", fmt(search.v_max)},
      {"search.v_step", fmt(search.v_step)},
      {"search.exclusion", std::to_string(search.exclusion_or_default())},
      {"search.direction", std::string(to_string(search.direction))},
      {"enhance.window", std::to_string(enhancement)},
      {"eval.radius", fmt(radius)},
      {"eval.sweep_levels", std::to_string(sweep_levels)},
      {"input.ref_scans", path_text(ref_scans)},
      {"input.live_scans", path_text(live_scans)},
      {"input.ref_descriptors", path_text(ref_descriptors)},
      {"input.live_descriptors", path_text(live_descriptors)},
      {"input.ref_poses", path_text(ref_poses)},
      {"input.live_poses", path_text(live_poses)},
      {"sim.preset", sim_preset},
      {"sim.spec", path_text(sim_spec)},
      {"sim.seed", sim_seed ? std::to_string(*sim_seed) : ""},
      {"tune.windows", join(tune_windows)},
      {"tune.enhancements", join(tune_enhancements)},
  };
}

RunConfig parse_run_config(std::istream& is, const fs::path& base_dir, const std::string& source) {
  RunConfig cfg;
  auto path_value = [&](const std::string& v) { return fs::path(v).is_absolute() ? fs::path(v) : base_dir / v; };

  const std::map<std::string, std::function<void(const std::string&)>> setters{
      {"descriptor.mode", [&](const std::string& v) { cfg.descriptor.mode = parse_descriptor_mode(v); }},
      {"descriptor.thumb_azimuths", [&](const std::string& v) { cfg.descriptor.thumb_azimuths = to_size(v); }},
      {"descriptor.thumb_ranges", [&](const std::string& v) { cfg.descriptor.thumb_ranges = to_size(v); }},
      {"descriptor.patch_size", [&](const std::string& v) { cfg.descriptor.patch_size = to_size(v); }},
      {"descriptor.ri_bins", [&](const std::string& v) { cfg.descriptor.ri_bins = to_size(v); }},
      {"search.window", [&](const std::string& v) { cfg.search.window = to_size(v); }},
      {"search.v_min", [&](const std::string& v) { cfg.search.v_min = to_double(v); }},
      {"search.v_max", [&](const std::string& v) { cfg.search.v_max = to_double(v); }},
      {"search.v_step", [&](const std::string& v) { cfg.search.v_step = to_double(v); }},
      {"search.exclusion", [&](const std::string& v) { cfg.search.exclusion = to_size(v); }},
      {"search.direction", [&](const std::string& v) { cfg.search.direction = parse_search_direction(v); }},
      {"enhance.window", [&](const std::string& v) { cfg.enhancement = to_size(v); }},
      {"eval.radius", [&](const std::string& v) { cfg.radius = to_double(v); }},
      {"eval.sweep_levels", [&](const std::string& v) { cfg.sweep_levels = to_size(v); }},
      {"input.ref_scans", [&](const std::string& v) { cfg.ref_scans = path_value(v); }},
      {"input.live_scans", [&](const std::string& v) { cfg.live_scans = path_value(v); }},
      {"input.ref_descriptors", [&](const std::string& v) { cfg.ref_descriptors = path_value(v); }},
      {"input.live_descriptors", [&](const std::string& v) { cfg.live_descriptors = path_value(v); }},
      {"input.ref_poses", [&](const std::string& v) { cfg.ref_poses = path_value(v); }},
      {"input.live_poses", [&](const std::string& v) { cfg.live_poses = path_value(v); }},
      {"sim.preset", [&](const std::string& v) { cfg.sim_preset = v; }},
      {"sim.spec", [&](const std::string& v) { cfg.sim_spec = path_value(v); }},
      {"sim.seed", [&](const std::string& v) { cfg.sim_seed = to_size(v); }},
      {"tune.windows", [&](const std::string& v) { cfg.tune_windows = to_size_list(v); }},
      {"tune.enhancements", [&](const std::string& v) { cfg.tune_enhancements = to_size_list(v); }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ValidationError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError(where + "unknown config key '" + key + "'");
    if (value.empty()) throw ValidationError(where + "empty value for '" + key + "'");
    try {
      it->second(value);
    } catch (const std::exception& e) {
      throw ValidationError(where + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config file: " + path.string());
  return parse_run_config(is, fs::absolute(path).parent_path(), path.string());
}

}  // namespace seqpr::app
