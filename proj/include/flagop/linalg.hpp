#pragma once

#include "flagop/core.hpp"

#include <span>
#include <vector>

namespace flagop {

// phi(T) = sum_k c_k T^k by Horner. Empty coefficients give the zero matrix.
Matrix polynomial_of(const Matrix& T, std::span<const double> coeffs);

struct NullSpace {
  Matrix basis;             // orthonormal columns
  Vector singular_values;   // descending
  Index rank = 0;
};

// Right singular vectors of M with singular value <= tol * sigma_max.
NullSpace null_space(const Matrix& M, double tol);

double spectral_norm(const Matrix& M);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 0 when the response has no variance
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

Matrix block_diagonal(const std::vector<Matrix>& blocks);

}  // namespace flagop
