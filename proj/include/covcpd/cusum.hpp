#pragma once

#include <span>
#include <vector>

#include "covcpd/covtensor.hpp"

namespace covcpd {

// T_N(k / N) for k = 1..N-1, where
//   T_N(k/N) = (1/N) || sum_{i<=k} X_i - (k/N) sum_{i<=N} X_i ||^2.
struct CusumCurve {
  std::vector<double> values;  // values[k - 1] = T_N(k / N)
  Eigen::Index n = 0;
  Eigen::Index argmax_k = 0;  // smallest maximiser
  double theta_hat = 0.0;     // argmax_k / n
  double t_max = 0.0;

  double at(Eigen::Index k) const { return values.at(static_cast<std::size_t>(k - 1)); }
};

// Sequence length above which the cumulative sums switch to compensated
// (Neumaier) summation.
inline constexpr Eigen::Index kCompensatedSumThreshold = 10'000;

CusumCurve cusum_curve(const CovCoeffSeq& seq);

struct Candidate {
  Eigen::Index k_hat = 0;
  double theta_hat = 0.0;
  double t_max = 0.0;
};

// Smallest k attaining the maximum of values (values[k-1] = T_N(k/N)).
Candidate candidate(std::span<const double> values, Eigen::Index n);
Candidate candidate(const CusumCurve& curve);

}  // namespace covcpd
