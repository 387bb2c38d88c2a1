#include "covcpd/fbasis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "covcpd/errors.hpp"

namespace covcpd {

void validate(const BasisSpec& spec) {
  if (spec.length < 1) throw ArgumentError("basis must contain at least one function");
  if (spec.start < 1) throw ArgumentError("basis start index must be positive");
}

double fourier_function(int index, double t) {
  if (index < 1) throw ArgumentError("Fourier index must be positive");
  if (index == 1) return 1.0;
  const int k = index / 2;
  const double arg = 2.0 * std::numbers::pi * k * t;
  return std::numbers::sqrt2 * ((index % 2 == 0) ? std::cos(arg) : std::sin(arg));
}

double fourier_eval(const BasisSpec& spec, int i, double t) {
  validate(spec);
  if (i < 1 || i > spec.length) {
    throw ArgumentError("basis index " + std::to_string(i) + " outside 1.." +
                        std::to_string(spec.length));
  }
  return fourier_function(spec.start + i - 1, t);
}

std::vector<double> uniform_grid(std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t j = 0; j < n; ++j) grid[j] = static_cast<double>(j) / static_cast<double>(n);
  return grid;
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, std::span<const double> grid) {
  validate(spec);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(grid.size()), spec.length);
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (int c = 0; c < spec.length; ++c) {
      x(static_cast<Eigen::Index>(r), c) = fourier_function(spec.start + c, grid[r]);
    }
  }
  return x;
}

Eigen::VectorXd evaluate_curve(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                               std::span<const double> grid) {
  if (coeffs.size() != spec.length) throw ArgumentError("coefficient count does not match basis size");
  return design_matrix(spec, grid) * coeffs;
}

CurveProjector::CurveProjector(const BasisSpec& spec, std::vector<double> grid)
    : spec_(spec), grid_(std::move(grid)) {
  validate(spec_);
  std::vector<double> sorted = grid_;
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < spec_.length) {
    throw IllPosedProjection("projection needs at least " + std::to_string(spec_.length) +
                             " distinct sample points, got " + std::to_string(distinct));
  }
  qr_.compute(design_matrix(spec_, grid_));
  if (qr_.rank() < spec_.length) {
    throw IllPosedProjection("basis design matrix is rank deficient on this grid");
  }
}

Eigen::VectorXd CurveProjector::project(std::span<const double> values) const {
  if (values.size() != grid_.size()) {
    throw ArgumentError("curve has " + std::to_string(values.size()) + " samples, grid has " +
                        std::to_string(grid_.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> y(values.data(), static_cast<Eigen::Index>(values.size()));
  return qr_.solve(y);
}

Eigen::VectorXd project_curve(std::span<const double> grid, std::span<const double> values,
                              const BasisSpec& spec) {
  return CurveProjector(spec, std::vector<double>(grid.begin(), grid.end())).project(values);
}

int SymTensorBasis::index_of(int a, int b) const {
  if (a > b) std::swap(a, b);
  if (a < 0 || b >= p) throw ArgumentError("symmetric basis pair out of range");
  return a * p - a * (a - 1) / 2 + (b - a);
}

SymTensorBasis build_sym_basis(const BasisSpec& spec) {
  validate(spec);
  SymTensorBasis sym;
  sym.p = spec.length;
  sym.dim = sym.p * (sym.p + 1) / 2;
  sym.pairs.reserve(static_cast<std::size_t>(sym.dim));
  sym.gram_diag.resize(sym.dim);
  for (int a = 0; a < sym.p; ++a) {
    for (int b = a; b < sym.p; ++b) {
      // ||phi_a x phi_b + phi_b x phi_a||^2 = 2 for an orthonormal phi, a != b.
      sym.gram_diag(static_cast<Eigen::Index>(sym.pairs.size())) = (a == b) ? 1.0 : 2.0;
      sym.pairs.emplace_back(a, b);
    }
  }
  sym.gram = sym.gram_diag.asDiagonal();
  sym.diagonal = true;
  return sym;
}

double eval_sym_element(const BasisSpec& spec, const SymTensorBasis& sym, int j, double t, double s) {
  const auto [a, b] = sym.pairs.at(static_cast<std::size_t>(j));
  const double at = fourier_eval(spec, a + 1, t);
  const double as = fourier_eval(spec, a + 1, s);
  if (a == b) return at * as;
  const double bt = fourier_eval(spec, b + 1, t);
  const double bs = fourier_eval(spec, b + 1, s);
  return at * bs + bt * as;
}

double eval_sym_function(const BasisSpec& spec, const SymTensorBasis& sym,
                         const Eigen::Ref<const Eigen::VectorXd>& coeffs, double t, double s) {
  double total = 0.0;
  for (int j = 0; j < sym.dim; ++j) total += coeffs(j) * eval_sym_element(spec, sym, j, t, s);
  return total;
}

}  // namespace covcpd
