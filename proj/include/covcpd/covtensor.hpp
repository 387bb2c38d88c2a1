#pragma once

#include "covcpd/fbasis.hpp"

namespace covcpd {

// N curves stored by their coefficients (row i = curve i) in `basis`.
// Coefficient-space algebra is exact because the basis is orthonormal.
struct CurvePanel {
  RowMatrix coeffs;
  BasisSpec basis;
  bool demeaned = false;
  bool rescaled = false;

  Eigen::Index n() const noexcept { return coeffs.rows(); }
  int p() const noexcept { return static_cast<int>(coeffs.cols()); }

  // Rows [begin, end) with the same basis and flags.
  CurvePanel slice(Eigen::Index begin, Eigen::Index end) const;
};

// Throws ArgumentError unless N >= 2, the width matches the basis and every
// entry is finite.
void validate(const CurvePanel& panel);

// Divides every curve by its L2 norm. Throws DegenerateCurve on a zero curve.
CurvePanel rescale_unit_norm(CurvePanel panel);

// Subtracts the sample mean curve.
CurvePanel demean_curves(CurvePanel panel);

// Coefficients of X_i(t,s) = Y_i(t) Y_i(s) in the symmetric tensor basis.
struct CovCoeffSeq {
  RowMatrix c;  // N x J
  SymTensorBasis sym;
  Eigen::VectorXd xbar;  // column mean of c, computed once at construction

  Eigen::Index n() const noexcept { return c.rows(); }
  int dim() const noexcept { return static_cast<int>(c.cols()); }
};

// Exact lift: c(i, (a,b)) = y_ia * y_ib. No truncation is needed since the
// tensor basis spans every product of two basis curves.
CovCoeffSeq lift_to_cov(const CurvePanel& panel);

// <<A, B>> = a' W b for two symmetric functions in coefficient form.
double sym_inner(const SymTensorBasis& sym, const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace covcpd
