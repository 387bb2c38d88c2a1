// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "covcpd/covtensor.hpp"
#include "covcpd/cusum.hpp"
#include "covcpd/detector.hpp"
#include "covcpd/longrun.hpp"
#include "covcpd/nulldist.hpp"
#include "covcpd/rng.hpp"
#include "covcpd/simlab.hpp"
#include "oracles.hpp"

using namespace covcpd;

namespace {

constexpr std::uint64_t kSeed = 20211014;

// Null simulation size used inside the Monte Carlo studies.
DetectorConfig study_detector() {
  DetectorConfig config;
  config.null_mc.replicates = 2000;
  config.null_mc.grid = 500;
  return config;
}

struct Interval {
  double lo;
  double hi;
};

// 90 % intervals of theta_hat; rows (setting, N total), columns sigma^2 = 0, 3, 6, 9.
struct TableRow {
  int setting;
  int n_per_group;
  Interval cells[4];
};

const TableRow kTable[] = {
    {1, 150, {{0.497, 0.503}, {0.460, 0.533}, {0.347, 0.617}, {0.286, 0.710}}},
    {1, 300, {{0.500, 0.502}, {0.482, 0.513}, {0.428, 0.570}, {0.330, 0.628}}},
    {2, 150, {{0.500, 0.503}, {0.450, 0.537}, {0.333, 0.627}, {0.266, 0.677}}},
    {2, 300, {{0.500, 0.502}, {0.485, 0.518}, {0.408, 0.570}, {0.380, 0.643}}},
    {3, 150, {{0.500, 0.507}, {0.453, 0.527}, {0.343, 0.633}, {0.296, 0.703}}},
    {3, 300, {{0.500, 0.503}, {0.487, 0.515}, {0.422, 0.563}, {0.345, 0.639}}},
};

const double kNoise[] = {0.0, 3.0, 6.0, 9.0};

bool criterion_table() {
  int failures = 0;
  StudyOptions options;
  options.reps = 500;
  options.seed = kSeed;
  options.run_test = false;
  const std::vector<double> noise(std::begin(kNoise), std::end(kNoise));
  for (int setting = 1; setting <= 3; ++setting) {
    const std::vector<int> sizes{150, 300};
    const ExperimentReport report = power_study(builtin_setting(setting), noise, sizes, options);
    for (const ConfigResult& c : report.configs) {
      const int col = static_cast<int>(std::find(std::begin(kNoise), std::end(kNoise), c.noise_var) - std::begin(kNoise));
      const TableRow* row = nullptr;
      for (const auto& r : kTable) {
        if (r.setting == setting && r.n_per_group == c.n_per_group) row = &r;
      }
      const Interval ref = row->cells[col];
      const double tol = c.noise_var <= 3.0 ? 0.015 : 0.03;
      const bool ok = std::abs(c.q05 - ref.lo) <= tol && std::abs(c.q95 - ref.hi) <= tol;
      if (!ok) ++failures;
      std::printf("  setting %d N=%3lld sigma2=%g: (%.3f, %.3f) vs (%.3f, %.3f) tol %.3f %s\n", setting,
                  static_cast<long long>(c.total_n), c.noise_var, c.q05, c.q95, ref.lo, ref.hi, tol, ok ? "ok" : "MISS");
    }
  }
  std::printf("  %d of 24 cells outside tolerance\n", failures);
  return failures == 0;
}

bool criterion_size() {
  StudyOptions options;
  options.reps = 500;
  options.seed = kSeed + 1;
  options.detector = study_detector();
  const std::vector<double> noise{0.0};
  const std::vector<int> sizes{300};
  const ExperimentReport report = power_study(null_variant(builtin_setting(1)), noise, sizes, options);
  const double rate = *report.configs[0].rejection_rate;
  std::printf("  rejection rate %.3f over 500 null panels (N=600, alpha=0.05)\n", rate);
  return rate >= 0.03 && rate <= 0.08;
}

bool criterion_power() {
  StudyOptions options;
  options.reps = 200;
  options.seed = kSeed + 2;
  options.detector = study_detector();
  const std::vector<double> clean{0.0};
  const std::vector<int> full{300};
  const double sharp = *power_study(builtin_setting(1), clean, full, options).configs[0].rejection_rate;
  std::printf("  power at N=600, sigma2=0: %.3f\n", sharp);
  bool ok = sharp >= 0.99;
  const std::vector<double> noisy{3.0, 6.0, 9.0};
  const std::vector<int> sizes{150, 300};
  const ExperimentReport report = power_study(builtin_setting(1), noisy, sizes, options);
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double small = *report.configs[2 * i].rejection_rate;
    const double large = *report.configs[2 * i + 1].rejection_rate;
    std::printf("  sigma2=%g: power N=300 %.3f, N=600 %.3f\n", noisy[i], small, large);
    ok = ok && large >= small;
  }
  return ok;
}

bool criterion_null_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> rho{1.0};
  const NullDistribution dist = simulate_null(rho, 20000, 2000, kSeed, 0);
  const double q = critical_value(dist, 0.05);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double target = oracle::sup_bridge_sq_quantile(0.95);
  std::printf("  95%% quantile %.4f vs %.4f (series), %.1f s\n", q, target, seconds);
  return std::abs(q - target) <= 0.03 && seconds < 60.0;
}

bool criterion_cusum_algebra() {
  std::mt19937_64 gen(kSeed);
  double worst = 0.0;
  for (int panel_index = 0; panel_index < 100; ++panel_index) {
    const auto n = static_cast<Eigen::Index>(2 + gen() % 49);
    const int p = 1 + static_cast<int>(gen() % 4);
    const int start = 1 + static_cast<int>(gen() % 3);
    const CurvePanel panel = oracle::gaussian_panel(n, p, gen(), BasisSpec::band(start, p));
    CurvePanel banded = panel;
    banded.basis = BasisSpec::band(start, p);
    const CusumCurve curve = cusum_curve(lift_to_cov(banded));
    for (Eigen::Index k = 1; k < n; ++k) {
      const double quad = oracle::cusum_by_quadrature(banded, k, 48);
      const double rel = std::abs(curve.at(k) - quad) / std::max(quad, 1e-300);
      worst = std::max(worst, rel);
    }
  }
  std::printf("  worst relative error %.2e over 100 panels\n", worst);
  return worst <= 1e-7;
}

bool criterion_drift() {
  const SimSetting s = builtin_setting(1, 0.0, 2000);
  const CusumCurve curve = cusum_curve(lift_to_cov(generate_panel(s, kSeed)));
  const double peak = drift_curve(s, std::vector<double>{0.5})[0];
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double theta = i / 10.0;
    const double d = drift_curve(s, std::vector<double>{theta})[0];
    worst = std::max(worst, std::abs(curve.at(400 * i) / 4000.0 - d) / peak);
  }
  std::printf("  max |T_N/N - drift| / drift(1/2) = %.4f\n", worst);
  return worst <= 0.05;
}

bool criterion_localization() {
  const std::vector<int> sizes{150, 600};
  const auto summaries = localization_study(builtin_setting(1), sizes, 300, kSeed);
  std::printf("  IQR of k_hat - k*: N=300 %.2f, N=1200 %.2f (median %.1f, %.1f)\n", summaries[0].iqr,
              summaries[1].iqr, summaries[0].median, summaries[1].median);
  return summaries[1].iqr <= 1.5 * summaries[0].iqr;
}

bool criterion_invariance() {
  std::mt19937_64 gen(kSeed);
  int scale_fail = 0;
  int reverse_fail = 0;
  int rotate_fail = 0;
  int thread_fail = 0;
  DetectorConfig config = study_detector();
  for (int i = 0; i < 50; ++i) {
    const int n_per_group = 40 + static_cast<int>(gen() % 81);
    SimSetting s = builtin_setting(1 + i % 3, kNoise[i % 4], n_per_group);
    if (i % 5 == 4) s = null_variant(s);
    const CurvePanel panel = generate_panel(s, gen());
    config.null_mc.seed = gen();

    config.null_mc.threads = 1;
    const TestResult base = detect_and_test(panel, config);
    for (double c : {0.1, 10.0}) {
      CurvePanel scaled = panel;
      scaled.coeffs *= c;
      const TestResult r = detect_and_test(scaled, config);
      if (r.reject != base.reject || r.k_hat != base.k_hat || r.p != base.p) ++scale_fail;
    }

    CurvePanel reversed = panel;
    reversed.coeffs = panel.coeffs.colwise().reverse();
    const CusumCurve fwd = cusum_curve(lift_to_cov(panel));
    const CusumCurve rev = cusum_curve(lift_to_cov(reversed));
    const Eigen::Index n = panel.n();
    for (Eigen::Index k = 1; k < n; ++k) {
      if (std::abs(rev.at(k) - fwd.at(n - k)) > 1e-12 * fwd.t_max) {
        ++reverse_fail;
        break;
      }
    }

    Eigen::MatrixXd g(8, 8);
    std::normal_distribution<double> normal;
    for (int j = 0; j < 64; ++j) g.data()[j] = normal(gen);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    CurvePanel rotated = panel;
    rotated.coeffs = panel.coeffs * q.transpose();
    const CovCoeffSeq a = lift_to_cov(panel);
    const CovCoeffSeq b = lift_to_cov(rotated);
    const EigenSpectrum sa = eigenvalues(longrun_matrix(a, config.longrun), a.sym, config.truncation);
    const EigenSpectrum sb = eigenvalues(longrun_matrix(b, config.longrun), b.sym, config.truncation);
    for (std::size_t d = 0; d < sa.rho.size(); ++d) {
      if (std::abs(sa.rho[d] - sb.rho[d]) > 1e-6) {
        ++rotate_fail;
        break;
      }
    }

    config.null_mc.threads = 8;
    const TestResult wide = detect_and_test(panel, config);
    const bool same = wide.t_max == base.t_max && wide.crit == base.crit && wide.p == base.p &&
                      wide.reject == base.reject && wide.k_hat == base.k_hat && wide.spectrum.rho == base.spectrum.rho;
    if (!same) ++thread_fail;
  }
  std::printf("  failures out of 50: scaling %d, reversal %d, rotation %d, threads %d\n", scale_fail, reverse_fail,
              rotate_fail, thread_fail);
  return scale_fail + reverse_fail + rotate_fail + thread_fail == 0;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<bool()>>> criteria{
      {"1 reference intervals", criterion_table},
      {"2 size calibration", criterion_size},
      {"3 power", criterion_power},
      {"4 null-law oracle", criterion_null_oracle},
      {"5 CUSUM algebra", criterion_cusum_algebra},
      {"6 drift", criterion_drift},
      {"7 localization", criterion_localization},
      {"8 invariance suite", criterion_invariance},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = run();
    } catch (const std::exception& e) {
      std::printf("  error: %s\n", e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %s: %s (%.1f s)\n", name.c_str(), ok ? "PASS" : "FAIL", seconds);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
