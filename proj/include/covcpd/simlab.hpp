#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covcpd/covtensor.hpp"
#include "covcpd/detector.hpp"

namespace covcpd {

// Two groups of independent curves in the 2nd..9th Fourier band. Group g has
// scores xi_d ~ N(0, sigma_g[d]^2) plus noise scores ~ N(0, noise_var / d^2).
struct SimSetting {
  int id = 0;  // 1..3 for the built-in settings, 0 for custom
  std::array<double, 8> sigma1{};
  std::array<double, 8> sigma2{};
  double noise_var = 0.0;
  int n_per_group = 150;
  BasisSpec basis = BasisSpec::band(2, 8);

  Eigen::Index total_n() const noexcept { return 2 * static_cast<Eigen::Index>(n_per_group); }
};

void validate(const SimSetting& setting);

// Setting 1: low vs high frequencies. Setting 2: alternating frequency pairs.
// Setting 3: equal power per frequency, amplitude moved between the cosine
// and sine member of each pair (a pure phase change).
SimSetting builtin_setting(int id, double noise_var = 0.0, int n_per_group = 150);

// Same law in both groups (sigma2 := sigma1).
SimSetting null_variant(SimSetting setting);

// Deterministic in (setting, seed). Signal and noise scores come from separate
// streams, so panels that differ only in noise_var share their signal part.
CurvePanel generate_panel(const SimSetting& setting, std::uint64_t seed);

// ||C1 - C2||^2 in the symmetric tensor basis.
double covariance_gap_sq(const SimSetting& setting);

// Limit of T_N(theta) / N under the two-group model with theta* = 1/2.
std::vector<double> drift_curve(const SimSetting& setting, std::span<const double> theta);

// R type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double prob);

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t panel_seed = 0;
  Eigen::Index k_hat = 0;
  double theta_hat = 0.0;
  double t_max = 0.0;
  std::optional<double> crit;
  std::optional<double> p;
  std::optional<bool> reject;
  std::optional<std::uint64_t> null_seed;  // replays the decision through detect --seed
};

struct ConfigResult {
  int setting_id = 0;
  double noise_var = 0.0;
  int n_per_group = 0;
  Eigen::Index total_n = 0;
  int reps = 0;
  std::optional<double> rejection_rate;  // set when the test was run
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  double runtime_seconds = 0.0;
  std::vector<ReplicateRecord> records;
};

struct ExperimentReport {
  std::string study;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::vector<ConfigResult> configs;
};

struct StudyOptions {
  int reps = 500;
  std::uint64_t seed = 1;
  int threads = 0;
  bool run_test = true;  // false: candidate location only
  DetectorConfig detector;
};

// Panel seed for (n_per_group, replicate). Independent of noise_var so that a
// noise ladder is run on common signal draws.
std::uint64_t panel_seed(std::uint64_t base, int n_per_group, int replicate);

// For every (noise_var, n_per_group) pair: run reps seeded panels, record the
// candidate and (if run_test) the decision, and summarise the candidate's
// 5/50/95 % quantiles and the rejection rate.
ExperimentReport power_study(const SimSetting& setting, std::span<const double> noise_grid,
                             std::span<const int> n_grid, const StudyOptions& options);

struct LocalizationSummary {
  int n_per_group = 0;
  Eigen::Index total_n = 0;
  std::vector<Eigen::Index> errors;  // k_hat - k*
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
  double mean_abs_scaled = 0.0;  // mean |k_hat - k*| / N
};

std::vector<LocalizationSummary> localization_study(const SimSetting& setting, std::span<const int> n_grid,
                                                    int reps, std::uint64_t seed, int threads = 0);

}  // namespace covcpd
