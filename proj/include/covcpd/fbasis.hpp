#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace covcpd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A contiguous run of the Fourier system on [0, 1]:
//   F_1 = 1,  F_{2k} = sqrt(2) cos(2 pi k t),  F_{2k+1} = sqrt(2) sin(2 pi k t).
// `start` is the F-index of the first member, `length` is p. The full system
// with p functions is {1, p}; the delta band used by the simulations is {2, 8}.
struct BasisSpec {
  int start = 1;
  int length = 9;

  static BasisSpec fourier(int p) { return {1, p}; }
  static BasisSpec band(int start, int length) { return {start, length}; }

  int size() const noexcept { return length; }
  bool operator==(const BasisSpec&) const = default;
};

void validate(const BasisSpec& spec);

// F_index(t) for the global Fourier numbering.
double fourier_function(int index, double t);

// The i-th member (1-based) of the basis described by `spec`.
double fourier_eval(const BasisSpec& spec, int i, double t);

// t_j = j / n, j = 0..n-1: the sampling grid of one epoch.
std::vector<double> uniform_grid(std::size_t n);

// n x p matrix of basis values at the grid points.
Eigen::MatrixXd design_matrix(const BasisSpec& spec, std::span<const double> grid);

Eigen::VectorXd evaluate_curve(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                               std::span<const double> grid);

// Least-squares projection of sampled curves onto a basis. The design is
// factorised once, so projecting many curves sharing a grid is cheap.
class CurveProjector {
 public:
  CurveProjector(const BasisSpec& spec, std::vector<double> grid);

  Eigen::VectorXd project(std::span<const double> values) const;

  const BasisSpec& spec() const noexcept { return spec_; }
  std::size_t grid_size() const noexcept { return grid_.size(); }

 private:
  BasisSpec spec_;
  std::vector<double> grid_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

Eigen::VectorXd project_curve(std::span<const double> grid, std::span<const double> values,
                              const BasisSpec& spec);

// Basis of symmetric two-way functions built from a one-way basis:
//   Phi_(a,b)(t,s) = phi_a(t) phi_b(s) + phi_b(t) phi_a(s)   for a < b,
//   Phi_(a,a)(t,s) = phi_a(t) phi_a(s).
// Elements are ordered row-major over the upper triangle: (1,1), (1,2), ...,
// (1,p), (2,2), ... Pair indices below are 0-based.
struct SymTensorBasis {
  int p = 0;
  int dim = 0;  // p (p + 1) / 2
  std::vector<std::pair<int, int>> pairs;
  Eigen::MatrixXd gram;       // W_ij = <<Phi_i, Phi_j>>
  Eigen::VectorXd gram_diag;  // diagonal of gram
  bool diagonal = true;       // gram has no off-diagonal entries

  int index_of(int a, int b) const;
};

SymTensorBasis build_sym_basis(const BasisSpec& spec);

// Phi_j(t, s) for the symmetric basis built over `spec`.
double eval_sym_element(const BasisSpec& spec, const SymTensorBasis& sym, int j, double t, double s);

// sum_j coeffs_j Phi_j(t, s).
double eval_sym_function(const BasisSpec& spec, const SymTensorBasis& sym,
                         const Eigen::Ref<const Eigen::VectorXd>& coeffs, double t, double s);

}  // namespace covcpd
