#include "covcpd/covtensor.hpp"

#include <cmath>
#include <string>

#include "covcpd/errors.hpp"

namespace covcpd {

CurvePanel CurvePanel::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > n() || begin >= end) throw ArgumentError("invalid panel slice");
  CurvePanel out;
  out.coeffs = coeffs.middleRows(begin, end - begin);
  out.basis = basis;
  out.demeaned = demeaned;
  out.rescaled = rescaled;
  return out;
}

void validate(const CurvePanel& panel) {
  validate(panel.basis);
  if (panel.n() < 2) throw ArgumentError("a panel needs at least two curves");
  if (panel.p() != panel.basis.length) {
    throw ArgumentError("panel has " + std::to_string(panel.p()) + " coefficients per curve, basis has " +
                        std::to_string(panel.basis.length));
  }
  if (!panel.coeffs.allFinite()) throw ArgumentError("panel contains non-finite coefficients");
}

CurvePanel rescale_unit_norm(CurvePanel panel) {
  for (Eigen::Index i = 0; i < panel.n(); ++i) {
    const double norm = panel.coeffs.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateCurve(static_cast<std::size_t>(i),
                            "curve " + std::to_string(i) + " has zero norm and cannot be rescaled");
    }
    panel.coeffs.row(i) /= norm;
  }
  panel.rescaled = true;
  return panel;
}

CurvePanel demean_curves(CurvePanel panel) {
  if (panel.n() < 2) throw ArgumentError("demeaning needs at least two curves");
  const Eigen::RowVectorXd mean = panel.coeffs.colwise().mean();
  panel.coeffs.rowwise() -= mean;
  panel.demeaned = true;
  return panel;
}

CovCoeffSeq lift_to_cov(const CurvePanel& panel) {
  validate(panel);
  CovCoeffSeq seq;
  seq.sym = build_sym_basis(panel.basis);
  const Eigen::Index n = panel.n();
  seq.c.resize(n, seq.sym.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = panel.coeffs.row(i);
    for (int j = 0; j < seq.sym.dim; ++j) {
      const auto [a, b] = seq.sym.pairs[static_cast<std::size_t>(j)];
      seq.c(i, j) = y(a) * y(b);
    }
  }
  // Mean taken as first row plus mean deviation: exact on constant sequences.
  const Eigen::RowVectorXd first = seq.c.row(0);
  seq.xbar = (first + (seq.c.rowwise() - first).colwise().mean()).transpose();
  return seq;
}

double sym_inner(const SymTensorBasis& sym, const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (sym.diagonal) return (a.array() * sym.gram_diag.array() * b.array()).sum();
  return a.dot(sym.gram * b);
}

}  // namespace covcpd
