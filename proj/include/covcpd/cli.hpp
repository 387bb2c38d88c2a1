#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "covcpd/detector.hpp"
#include "covcpd/io.hpp"

namespace covcpd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr std::uint64_t kDefaultSeed = 20211014;

// Fully resolved settings of one invocation. Serialized into every output.
struct RunConfig {
  std::string command;
  std::filesystem::path input;
  IngestOptions ingest;
  DetectorConfig detector;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  std::optional<std::filesystem::path> out_dir;
  bool emit_plot_data = false;
  std::optional<std::filesystem::path> config_file;

  // simulate
  std::string study = "power";  // power | candidate | localization
  int setting = 1;
  bool null_model = false;  // both groups share the first group's law
  std::vector<double> noise_vars{0.0, 3.0, 6.0, 9.0};
  std::vector<int> n_per_group{150, 300};
  int reps = 500;
  int emit_panels = 0;
  Layout panel_layout = Layout::coefficients;
  int panel_grid = 1000;

  // null-quantile
  std::vector<double> rho;
  std::optional<std::filesystem::path> rho_file;
  std::vector<double> alphas{0.05};
  std::optional<std::filesystem::path> null_cache;
};

nlohmann::json to_json(const RunConfig& config);

// Reads "key = value" lines ('#' starts a comment) into "--key=value"
// arguments. Keys are long flag names without the leading dashes.
std::vector<std::string> read_config_file(const std::filesystem::path& path);

// Runs one command line (args[0] is the program name). Writes the JSON
// document to `out` and diagnostics to `err`; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_detect(const RunConfig& config, std::ostream& out);
int run_segment(const RunConfig& config, std::ostream& out);
int run_simulate(const RunConfig& config, std::ostream& out);
int run_null_quantile(const RunConfig& config, std::ostream& out);

}  // namespace covcpd::cli
