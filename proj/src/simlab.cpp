#include "covcpd/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <boost/random/normal_distribution.hpp>

#include "covcpd/errors.hpp"
#include "covcpd/parallel.hpp"

namespace covcpd {

namespace {

constexpr std::uint64_t kSignalStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kNullStream = 0x6e756c6c;

std::array<double, 8> swap_levels(const std::array<double, 8>& sigma) {
  std::array<double, 8> out{};
  for (std::size_t d = 0; d < sigma.size(); ++d) out[d] = sigma[d] == 1.0 ? 0.5 : 1.0;
  return out;
}

Candidate locate(const CurvePanel& panel, const DetectorConfig& config) {
  const CurvePanel prepared = preprocess(panel, config);
  return candidate(cusum_curve(lift_to_cov(prepared)));
}

}  // namespace

void validate(const SimSetting& setting) {
  for (std::size_t d = 0; d < 8; ++d) {
    if (!(setting.sigma1[d] > 0.0) || !(setting.sigma2[d] > 0.0)) {
      throw ArgumentError("group standard deviations must be positive");
    }
  }
  if (!(setting.noise_var >= 0.0)) throw ArgumentError("noise variance must be nonnegative");
  if (setting.n_per_group < 2) throw ArgumentError("each group needs at least two curves");
  if (setting.basis.length != 8) throw ArgumentError("simulation settings use an 8-function basis");
}

SimSetting builtin_setting(int id, double noise_var, int n_per_group) {
  SimSetting s;
  s.id = id;
  s.noise_var = noise_var;
  s.n_per_group = n_per_group;
  switch (id) {
    case 1:
      s.sigma1 = {1, 1, 1, 1, .5, .5, .5, .5};
      break;
    case 2:
      s.sigma1 = {1, 1, .5, .5, 1, 1, .5, .5};
      break;
    case 3:
      s.sigma1 = {1, .5, 1, .5, 1, .5, 1, .5};
      break;
    default:
      throw ArgumentError("built-in settings are 1, 2 and 3");
  }
  s.sigma2 = swap_levels(s.sigma1);
  validate(s);
  return s;
}

SimSetting null_variant(SimSetting setting) {
  setting.sigma2 = setting.sigma1;
  setting.id = 0;
  return setting;
}

CurvePanel generate_panel(const SimSetting& setting, std::uint64_t seed) {
  validate(setting);
  Engine signal = make_engine(seed, {kSignalStream});
  Engine noise = make_engine(seed, {kNoiseStream});
  boost::random::normal_distribution<double> normal;
  const double noise_sd = std::sqrt(setting.noise_var);

  CurvePanel panel;
  panel.basis = setting.basis;
  const Eigen::Index n = setting.total_n();
  panel.coeffs.resize(n, 8);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sigma = i < setting.n_per_group ? setting.sigma1 : setting.sigma2;
    for (int d = 0; d < 8; ++d) {
      const double score = sigma[static_cast<std::size_t>(d)] * normal(signal);
      const double error = (noise_sd / (d + 1)) * normal(noise);
      panel.coeffs(i, d) = score + error;
    }
  }
  return panel;
}

double covariance_gap_sq(const SimSetting& setting) {
  // Both covariances are diagonal in the score basis; the noise part cancels.
  double gap = 0.0;
  for (std::size_t d = 0; d < 8; ++d) {
    const double diff = setting.sigma1[d] * setting.sigma1[d] - setting.sigma2[d] * setting.sigma2[d];
    gap += diff * diff;
  }
  return gap;
}

std::vector<double> drift_curve(const SimSetting& setting, std::span<const double> theta) {
  constexpr double theta_star = 0.5;
  const double gap = covariance_gap_sq(setting);
  std::vector<double> out;
  out.reserve(theta.size());
  for (double th : theta) {
    if (!(th > 0.0 && th < 1.0)) throw ArgumentError("drift is defined for theta in (0, 1)");
    const double scale = th <= theta_star ? th * (1.0 - theta_star) : (1.0 - th) * theta_star;
    out.push_back(gap * scale * scale);
  }
  return out;
}

double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw ArgumentError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::uint64_t panel_seed(std::uint64_t base, int n_per_group, int replicate) {
  return derive_seed(base, {static_cast<std::uint64_t>(n_per_group), static_cast<std::uint64_t>(replicate)});
}

ExperimentReport power_study(const SimSetting& setting, std::span<const double> noise_grid,
                             std::span<const int> n_grid, const StudyOptions& options) {
  if (options.reps < 1) throw ArgumentError("a study needs at least one replicate");
  ExperimentReport report;
  report.study = options.run_test ? "power" : "candidate";
  report.seed = options.seed;
  report.alpha = options.detector.alpha;

  const int workers = resolve_threads(options.threads);
  std::uint64_t config_index = 0;
  for (double noise_var : noise_grid) {
    for (int n_per_group : n_grid) {
      SimSetting cell = setting;
      cell.noise_var = noise_var;
      cell.n_per_group = n_per_group;
      validate(cell);

      ConfigResult result;
      result.setting_id = setting.id;
      result.noise_var = noise_var;
      result.n_per_group = n_per_group;
      result.total_n = cell.total_n();
      result.reps = options.reps;
      result.records.resize(static_cast<std::size_t>(options.reps));

      const auto started = std::chrono::steady_clock::now();
      parallel_for(static_cast<std::size_t>(options.reps), workers, [&](std::size_t r) {
        ReplicateRecord& rec = result.records[r];
        rec.replicate = static_cast<int>(r);
        rec.panel_seed = panel_seed(options.seed, n_per_group, rec.replicate);
        const CurvePanel panel = generate_panel(cell, rec.panel_seed);
        if (options.run_test) {
          DetectorConfig config = options.detector;
          config.null_mc.seed = derive_seed(options.seed, {kNullStream, config_index, r});
          if (workers > 1) config.null_mc.threads = 1;
          const TestResult test = detect_and_test(panel, config);
          rec.k_hat = test.k_hat;
          rec.theta_hat = test.theta_hat;
          rec.t_max = test.t_max;
          rec.crit = test.crit;
          rec.p = test.p;
          rec.reject = test.reject;
          rec.null_seed = config.null_mc.seed;
        } else {
          const Candidate c = locate(panel, options.detector);
          rec.k_hat = c.k_hat;
          rec.theta_hat = c.theta_hat;
          rec.t_max = c.t_max;
        }
      });
      result.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

      std::vector<double> thetas;
      thetas.reserve(result.records.size());
      int rejections = 0;
      for (const auto& rec : result.records) {
        thetas.push_back(rec.theta_hat);
        if (rec.reject.value_or(false)) ++rejections;
      }
      result.q05 = sample_quantile(thetas, 0.05);
      result.q50 = sample_quantile(thetas, 0.50);
      result.q95 = sample_quantile(thetas, 0.95);
      if (options.run_test) result.rejection_rate = static_cast<double>(rejections) / options.reps;
      report.configs.push_back(std::move(result));
      ++config_index;
    }
  }
  return report;
}

std::vector<LocalizationSummary> localization_study(const SimSetting& setting, std::span<const int> n_grid,
                                                    int reps, std::uint64_t seed, int threads) {
  if (reps < 1) throw ArgumentError("a study needs at least one replicate");
  std::vector<LocalizationSummary> out;
  const DetectorConfig plain;
  for (int n_per_group : n_grid) {
    SimSetting cell = setting;
    cell.n_per_group = n_per_group;
    validate(cell);

    LocalizationSummary summary;
    summary.n_per_group = n_per_group;
    summary.total_n = cell.total_n();
    summary.errors.resize(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
      const CurvePanel panel = generate_panel(cell, panel_seed(seed, n_per_group, static_cast<int>(r)));
      summary.errors[r] = locate(panel, plain).k_hat - n_per_group;
    });

    std::vector<double> errs(summary.errors.begin(), summary.errors.end());
    summary.median = sample_quantile(errs, 0.5);
    summary.q25 = sample_quantile(errs, 0.25);
    summary.q75 = sample_quantile(errs, 0.75);
    summary.iqr = summary.q75 - summary.q25;
    double abs_sum = 0.0;
    for (double e : errs) abs_sum += std::abs(e);
    summary.mean_abs_scaled = abs_sum / reps / static_cast<double>(summary.total_n);
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace covcpd
