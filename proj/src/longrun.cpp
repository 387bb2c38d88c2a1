#include "covcpd/longrun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covcpd/errors.hpp"

namespace covcpd {

double kernel_weight(Kernel kernel, double u) {
  const double a = std::abs(u);
  if (a > 1.0) return 0.0;
  switch (kernel) {
    case Kernel::bartlett:
      return 1.0 - a;
    case Kernel::parzen:
      if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
      return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
    case Kernel::truncated:
      return 1.0;
  }
  throw ArgumentError("unknown kernel");
}

std::string to_string(Kernel kernel) {
  switch (kernel) {
    case Kernel::bartlett:
      return "bartlett";
    case Kernel::parzen:
      return "parzen";
    case Kernel::truncated:
      return "truncated";
  }
  return "unknown";
}

Kernel kernel_from_string(const std::string& name) {
  if (name == "bartlett") return Kernel::bartlett;
  if (name == "parzen") return Kernel::parzen;
  if (name == "truncated" || name == "truncated-flat") return Kernel::truncated;
  throw ArgumentError("unknown kernel '" + name + "' (expected bartlett, parzen or truncated)");
}

int LongRunSpec::resolved_bandwidth(Eigen::Index n) const {
  if (iid) return 0;
  if (bandwidth) {
    if (*bandwidth < 0) throw ArgumentError("bandwidth must be nonnegative");
    if (*bandwidth >= n) throw ArgumentError("bandwidth must be smaller than the sequence length");
    return *bandwidth;
  }
  // Smallest l with l^3 >= n; cbrt alone is not exact on perfect cubes.
  auto rule = static_cast<Eigen::Index>(std::llround(std::cbrt(static_cast<double>(n))));
  while (rule * rule * rule < n) ++rule;
  while (rule > 1 && (rule - 1) * (rule - 1) * (rule - 1) >= n) --rule;
  return static_cast<int>(std::min(rule, n - 1));
}

Eigen::MatrixXd lag_cov_matrix(const CovCoeffSeq& seq, int h) {
  const Eigen::Index n = seq.n();
  const Eigen::Index lag = std::abs(h);
  if (lag >= n) throw ArgumentError("lag must be smaller than the sequence length");
  const RowMatrix z = seq.c.rowwise() - seq.xbar.transpose();
  const Eigen::Index m = n - lag;
  Eigen::MatrixXd out = z.bottomRows(m).transpose() * z.topRows(m);
  out /= static_cast<double>(m);
  if (h < 0) out.transposeInPlace();
  return out;
}

Eigen::MatrixXd longrun_matrix(const CovCoeffSeq& seq, const LongRunSpec& spec) {
  const int bw = spec.resolved_bandwidth(seq.n());
  Eigen::MatrixXd sigma = lag_cov_matrix(seq, 0);
  for (int h = 1; h <= bw; ++h) {
    const double w = kernel_weight(spec.kernel, static_cast<double>(h) / bw);
    if (w == 0.0) continue;
    const Eigen::MatrixXd lag = lag_cov_matrix(seq, h);
    sigma += w * lag;
    sigma += w * lag.transpose();
  }
  return sigma;
}

EigenSpectrum eigenvalues(const Eigen::MatrixXd& sigma_c, const SymTensorBasis& sym,
                          const TruncationRule& rule, bool with_vectors) {
  const Eigen::Index dim = sym.dim;
  if (sigma_c.rows() != dim || sigma_c.cols() != dim) {
    throw ArgumentError("long-run matrix does not match the symmetric basis dimension");
  }
  if (!sigma_c.allFinite()) throw NumericalError("long-run matrix has non-finite entries");

  Eigen::MatrixXd w_half;
  Eigen::MatrixXd w_inv_half;
  if (sym.diagonal) {
    if ((sym.gram_diag.array() <= 0.0).any()) throw BasisError("Gram matrix is not positive definite");
    w_half = sym.gram_diag.cwiseSqrt().asDiagonal();
    w_inv_half = sym.gram_diag.cwiseSqrt().cwiseInverse().asDiagonal();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(sym.gram);
    if (gram_eig.info() != Eigen::Success || gram_eig.eigenvalues().minCoeff() <= 0.0) {
      throw BasisError("Gram matrix is not positive definite");
    }
    w_half = gram_eig.operatorSqrt();
    w_inv_half = gram_eig.operatorInverseSqrt();
  }

  const Eigen::MatrixXd sym_sigma = 0.5 * (sigma_c + sigma_c.transpose());
  Eigen::MatrixXd m = w_half * sym_sigma * w_half;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      m, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigen decomposition did not converge");

  EigenSpectrum spec;
  spec.rule = rule;
  spec.rho.resize(static_cast<std::size_t>(dim));
  spec.rho_unclipped.resize(static_cast<std::size_t>(dim));
  // Eigen returns ascending order.
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double value = eig.eigenvalues()(dim - 1 - d);
    spec.rho_unclipped[static_cast<std::size_t>(d)] = value;
    spec.rho[static_cast<std::size_t>(d)] = std::max(value, 0.0);
  }

  const double total = std::accumulate(spec.rho.begin(), spec.rho.end(), 0.0);
  const double lead = spec.rho.empty() ? 0.0 : spec.rho.front();
  double kept_mass = 0.0;
  int kept = 0;
  if (lead > 0.0) {
    for (double value : spec.rho) {
      if (value < rule.relative_floor * lead) break;
      kept_mass += value;
      ++kept;
      if (kept_mass >= rule.mass_target * total) break;
    }
  }
  spec.d_kept = kept;

  if (with_vectors) {
    Eigen::MatrixXd u = eig.eigenvectors().rowwise().reverse();
    spec.eigvecs_b = w_inv_half * u;
  }
  return spec;
}

}  // namespace covcpd
