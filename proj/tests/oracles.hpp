#pragma once

// Independent reference computations for the tests. Nothing here calls the
// coefficient-space code paths under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "covcpd/covtensor.hpp"
#include "covcpd/fbasis.hpp"

namespace oracle {

// Composite trapezoid rule on [0, 1] with n intervals.
inline double trapezoid(const std::function<double(double)>& f, int n) {
  double sum = 0.5 * (f(0.0) + f(1.0));
  for (int i = 1; i < n; ++i) sum += f(static_cast<double>(i) / n);
  return sum / n;
}

// Tensor trapezoid rule on [0, 1]^2 with n x n intervals, from sampled values
// v[i][j] = g(i / n, j / n).
inline double trapezoid2(const std::vector<std::vector<double>>& v) {
  const std::size_t n = v.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double wi = (i == 0 || i == n) ? 0.5 : 1.0;
    for (std::size_t j = 0; j <= n; ++j) {
      const double wj = (j == 0 || j == n) ? 0.5 : 1.0;
      sum += wi * wj * v[i][j];
    }
  }
  return sum / static_cast<double>(n * n);
}

// Fourier functions written out directly from their definition.
inline double fourier(int index, double t) {
  if (index == 1) return 1.0;
  const int k = index / 2;
  const double arg = 2.0 * std::numbers::pi * k * t;
  return index % 2 == 0 ? std::sqrt(2.0) * std::cos(arg) : std::sqrt(2.0) * std::sin(arg);
}

// Y_i(t) from its coefficients in a band starting at `start`.
inline double curve(const Eigen::Ref<const Eigen::VectorXd>& y, int start, double t) {
  double v = 0.0;
  for (Eigen::Index d = 0; d < y.size(); ++d) v += y(d) * fourier(start + static_cast<int>(d), t);
  return v;
}

// Kolmogorov distribution P(sup |B| <= x) by its alternating series.
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-300) break;
  }
  return 1.0 - 2.0 * sum;
}

// Quantile of sup B^2 = (Kolmogorov quantile)^2, by bisection.
inline double sup_bridge_sq_quantile(double prob) {
  double lo = 0.1;
  double hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < prob ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return x * x;
}

// Density of sup B^2 at q, from the derivative of the series.
inline double sup_bridge_sq_density(double q) {
  const double x = std::sqrt(q);
  double dk = 0.0;
  for (int k = 1; k <= 200; ++k) {
    dk += (k % 2 == 1 ? 1.0 : -1.0) * 8.0 * k * k * x * std::exp(-2.0 * k * k * x * x);
  }
  return dk / (2.0 * x);
}

// Panel with N(0, 1) coefficients from the standard library generator.
inline covcpd::CurvePanel gaussian_panel(Eigen::Index n, int p, std::uint64_t seed,
                                         covcpd::BasisSpec basis = {}) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  covcpd::CurvePanel panel;
  panel.basis = basis.length == p ? basis : covcpd::BasisSpec::fourier(p);
  panel.coeffs.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < p; ++d) panel.coeffs(i, d) = normal(gen);
  }
  return panel;
}

// Independent curves whose coefficients have sd `sigma_a` for rows before
// each break and alternate between sigma_a and sigma_b afterwards.
inline covcpd::CurvePanel regime_panel(const std::vector<Eigen::Index>& lengths, const std::vector<double>& sigma_a,
                                       const std::vector<double>& sigma_b, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const int p = static_cast<int>(sigma_a.size());
  Eigen::Index total = 0;
  for (auto len : lengths) total += len;
  covcpd::CurvePanel panel;
  panel.basis = covcpd::BasisSpec::band(2, p);
  panel.coeffs.resize(total, p);
  Eigen::Index row = 0;
  for (std::size_t regime = 0; regime < lengths.size(); ++regime) {
    const auto& sigma = regime % 2 == 0 ? sigma_a : sigma_b;
    for (Eigen::Index i = 0; i < lengths[regime]; ++i, ++row) {
      for (int d = 0; d < p; ++d) panel.coeffs(row, d) = sigma[static_cast<std::size_t>(d)] * normal(gen);
    }
  }
  return panel;
}

// T_N(k/N) by 2-D trapezoid quadrature of the reconstructed
// Delta_k(t,s) = sum_{i<=k} Y_i(t)Y_i(s) - (k/N) sum_i Y_i(t)Y_i(s).
inline double cusum_by_quadrature(const covcpd::CurvePanel& panel, Eigen::Index k, int grid) {
  const Eigen::Index n = panel.n();
  std::vector<std::vector<double>> y(static_cast<std::size_t>(n), std::vector<double>(grid + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int g = 0; g <= grid; ++g) {
      y[static_cast<std::size_t>(i)][static_cast<std::size_t>(g)] =
          curve(panel.coeffs.row(i).transpose(), panel.basis.start, static_cast<double>(g) / grid);
    }
  }
  const double frac = static_cast<double>(k) / static_cast<double>(n);
  std::vector<std::vector<double>> sq(grid + 1, std::vector<double>(grid + 1));
  for (int a = 0; a <= grid; ++a) {
    for (int b = 0; b <= grid; ++b) {
      double head = 0.0;
      double all = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& yi = y[static_cast<std::size_t>(i)];
        const double x = yi[static_cast<std::size_t>(a)] * yi[static_cast<std::size_t>(b)];
        if (i < k) head += x;
        all += x;
      }
      const double delta = head - frac * all;
      sq[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = delta * delta;
    }
  }
  return trapezoid2(sq) / static_cast<double>(n);
}

}  // namespace oracle
