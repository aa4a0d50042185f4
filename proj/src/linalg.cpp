#include "flagop/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace flagop {

WeightError::WeightError(Index index, double value)
    : Error("weight w_" + std::to_string(index) + " = " + std::to_string(value) +
            " is not a finite positive number"),
      index_(index),
      value_(value) {}

SizeCapError::SizeCapError(Index requested, Index cap)
    : Error("matricized size " + std::to_string(requested) + " exceeds the cap of " +
            std::to_string(cap)),
      requested_(requested),
      cap_(cap) {}

Matrix polynomial_of(const Matrix& T, std::span<const double> coeffs) {
  if (T.rows() != T.cols()) throw DimensionError("polynomial_of needs a square matrix");
  const Index N = T.rows();
  Matrix acc = Matrix::Zero(N, N);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = T * acc;
    acc.diagonal().array() += *it;
  }
  return acc;
}

NullSpace null_space(const Matrix& M, double tol) {
  NullSpace out;
  const Index cols = M.cols();
  if (cols == 0) return out;
  if (M.rows() == 0) {
    out.basis = Matrix::Identity(cols, cols);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  out.singular_values = s;
  const double cut = s.size() > 0 ? tol * s(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++rank;
  out.rank = rank;
  out.basis = svd.matrixV().rightCols(cols - rank);
  return out;
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  Matrix out = Matrix::Zero(total, total);
  Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

}  // namespace flagop
