#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covcpd/covtensor.hpp"

namespace covcpd {

enum class Kernel { bartlett, parzen, truncated };

// Lag-window weight W(u): W(0) = 1, W(-u) = W(u), W(u) = 0 for |u| > 1.
double kernel_weight(Kernel kernel, double u);

std::string to_string(Kernel kernel);
Kernel kernel_from_string(const std::string& name);

struct LongRunSpec {
  Kernel kernel = Kernel::bartlett;
  std::optional<int> bandwidth;  // unset: ceil(N^(1/3)), capped at N - 1
  bool iid = false;              // lag-0 term only

  // Effective bandwidth for a sequence of length n. Throws if an explicit
  // bandwidth is not below n.
  int resolved_bandwidth(Eigen::Index n) const;
};

// Coefficient form of the lag-h autocovariance of X_i - xbar:
//   h >= 0: (1/(N-h)) sum_{i} Z_{i+h} Z_i',   h < 0: transpose of lag -h.
Eigen::MatrixXd lag_cov_matrix(const CovCoeffSeq& seq, int h);

// Sigma_C = sum_{|h| <= l} W(h / l) lag_cov_matrix(seq, h).
Eigen::MatrixXd longrun_matrix(const CovCoeffSeq& seq, const LongRunSpec& spec);

struct TruncationRule {
  double relative_floor = 1e-6;  // drop rho_d < floor * rho_1
  double mass_target = 0.9999;   // stop once this share of the total is kept
};

struct EigenSpectrum {
  std::vector<double> rho;            // clipped at 0, nonincreasing, length J
  std::vector<double> rho_unclipped;  // same order, before clipping
  int d_kept = 0;
  TruncationRule rule;
  std::optional<Eigen::MatrixXd> eigvecs_b;  // J x J, W-orthonormal columns

  std::span<const double> kept() const {
    return std::span<const double>(rho).first(static_cast<std::size_t>(d_kept));
  }
};

// Eigenvalues of the long-run operator from its coefficient matrix: solves
// W^{1/2} Sigma_sym W^{1/2} u = rho u and, if asked, returns b = W^{-1/2} u.
EigenSpectrum eigenvalues(const Eigen::MatrixXd& sigma_c, const SymTensorBasis& sym,
                          const TruncationRule& rule = {}, bool with_vectors = false);

}  // namespace covcpd
