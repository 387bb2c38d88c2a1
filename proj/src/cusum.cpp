#include "covcpd/cusum.hpp"

#include <cmath>

#include "covcpd/errors.hpp"

namespace covcpd {

namespace {

// Column-wise running sum, optionally with Neumaier compensation.
class RunningSum {
 public:
  RunningSum(Eigen::Index dim, bool compensated)
      : sum_(Eigen::VectorXd::Zero(dim)), comp_(Eigen::VectorXd::Zero(dim)), compensated_(compensated) {}

  template <class Row>
  void add(const Row& row) {
    if (!compensated_) {
      sum_ += row.transpose();
      return;
    }
    for (Eigen::Index j = 0; j < sum_.size(); ++j) {
      const double x = row(j);
      const double t = sum_(j) + x;
      if (std::abs(sum_(j)) >= std::abs(x)) {
        comp_(j) += (sum_(j) - t) + x;
      } else {
        comp_(j) += (x - t) + sum_(j);
      }
      sum_(j) = t;
    }
  }

  Eigen::VectorXd value() const { return compensated_ ? Eigen::VectorXd(sum_ + comp_) : sum_; }

 private:
  Eigen::VectorXd sum_;
  Eigen::VectorXd comp_;
  bool compensated_;
};

}  // namespace

CusumCurve cusum_curve(const CovCoeffSeq& seq) {
  const Eigen::Index n = seq.n();
  if (n < 2) throw ArgumentError("CUSUM needs at least two observations");
  const Eigen::Index dim = seq.dim();
  const bool compensated = n > kCompensatedSumThreshold;

  // T_N is unchanged by subtracting a constant from every X_i; centring on
  // the first row keeps partial sums small and makes a constant sequence
  // produce exact zeros.
  const Eigen::RowVectorXd ref = seq.c.row(0);

  RunningSum total_sum(dim, compensated);
  for (Eigen::Index i = 0; i < n; ++i) total_sum.add(seq.c.row(i) - ref);
  const Eigen::VectorXd total = total_sum.value();

  CusumCurve curve;
  curve.n = n;
  curve.values.resize(static_cast<std::size_t>(n - 1));
  RunningSum partial(dim, compensated);
  const double nd = static_cast<double>(n);
  Eigen::VectorXd v(dim);
  for (Eigen::Index k = 1; k < n; ++k) {
    partial.add(seq.c.row(k - 1) - ref);
    v = partial.value() - (static_cast<double>(k) / nd) * total;
    curve.values[static_cast<std::size_t>(k - 1)] = sym_inner(seq.sym, v, v) / nd;
  }

  const Candidate best = candidate(curve.values, n);
  curve.argmax_k = best.k_hat;
  curve.theta_hat = best.theta_hat;
  curve.t_max = best.t_max;
  return curve;
}

Candidate candidate(std::span<const double> values, Eigen::Index n) {
  if (values.empty()) throw ArgumentError("empty CUSUM curve");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  Candidate c;
  c.k_hat = static_cast<Eigen::Index>(best) + 1;
  c.theta_hat = static_cast<double>(c.k_hat) / static_cast<double>(n);
  c.t_max = values[best];
  return c;
}

Candidate candidate(const CusumCurve& curve) { return candidate(curve.values, curve.n); }

}  // namespace covcpd
