#include "flagop/sylvester.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace flagop {

SylvesterPair::SylvesterPair(Matrix a, Matrix b) : A(std::move(a)), B(std::move(b)) {
  if (A.rows() != A.cols() || B.rows() != B.cols())
    throw DimensionError("SylvesterPair needs square A and B");
}

namespace {

void check_shape(const SylvesterPair& pair, const Matrix& X) {
  if (X.rows() != pair.rows() || X.cols() != pair.cols())
    throw DimensionError("expected a " + std::to_string(pair.rows()) + "x" + std::to_string(pair.cols()) +
                         " matrix, got " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
}

}  // namespace

Matrix apply_tau(const SylvesterPair& pair, const Matrix& X) {
  check_shape(pair, X);
  return pair.A * X - X * pair.B;
}

Matrix apply_tau_power(const SylvesterPair& pair, const Matrix& X, int power) {
  if (power < 1) throw Error("tau power must be at least 1");
  Matrix Y = X;
  for (int i = 0; i < power; ++i) Y = apply_tau(pair, Y);
  return Y;
}

Matrix apply_tau_adjoint(const SylvesterPair& pair, const Matrix& Y) {
  check_shape(pair, Y);
  return pair.A.transpose() * Y - Y * pair.B.transpose();
}

Matrix apply_tau_adjoint_power(const SylvesterPair& pair, const Matrix& Y, int power) {
  if (power < 1) throw Error("tau power must be at least 1");
  Matrix X = Y;
  for (int i = 0; i < power; ++i) X = apply_tau_adjoint(pair, X);
  return X;
}

Matrix matricize(const SylvesterPair& pair) {
  const Index m = pair.rows(), k = pair.cols();
  Matrix M = Matrix::Zero(m * k, m * k);
  // vec(AX) = (I_k kron A) vec X, vec(XB) = (B^T kron I_m) vec X
  for (Index j = 0; j < k; ++j) M.block(j * m, j * m, m, m) += pair.A;
  for (Index j = 0; j < k; ++j)
    for (Index c = 0; c < k; ++c) {
      const double b = pair.B(c, j);
      if (b == 0.0) continue;
      for (Index i = 0; i < m; ++i) M(j * m + i, c * m + i) -= b;
    }
  return M;
}

NullSpace kernel_vectors(const SylvesterPair& pair, double tol) {
  if (tol <= 0) throw Error("kernel tolerance must be positive");
  const Index mk = pair.rows() * pair.cols();
  if (mk > kKernelSizeCap) throw SizeCapError(mk, kKernelSizeCap);
  return null_space(matricize(pair), tol);
}

std::vector<Matrix> kernel_basis(const SylvesterPair& pair, double tol) {
  const auto ns = kernel_vectors(pair, tol);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(ns.basis.cols()));
  for (Index c = 0; c < ns.basis.cols(); ++c)
    out.push_back(Eigen::Map<const Matrix>(ns.basis.col(c).data(), pair.rows(), pair.cols()));
  return out;
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::in_range: return "in-range";
    case Membership::not_in_range_unbounded: return "not-in-range-unbounded";
    case Membership::not_in_range_residual: return "not-in-range-residual";
    case Membership::inconclusive: return "inconclusive";
  }
  return "?";
}

MinNormSolve solve_min_norm(const SylvesterPair& pair, const Matrix& Z, int power,
                            const MembershipThresholds& t) {
  check_shape(pair, Z);
  MinNormSolve out;
  out.W = Matrix::Zero(Z.rows(), Z.cols());
  out.target_norm = Z.norm();
  if (out.target_norm == 0.0) {
    out.converged = true;
    return out;
  }
  const Index max_it = t.max_iterations > 0 ? t.max_iterations
                                            : std::max<Index>(2000, 4 * Z.rows() * Z.cols());
  Matrix r = Z;
  Matrix s = apply_tau_adjoint_power(pair, r, power);
  const double s0 = s.norm();
  // gradients below rounding level of tau^p* applied to Z carry no information
  const double op = std::pow(pair.A.norm() + pair.B.norm(), power);
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * op * out.target_norm;
  Matrix p = s;
  double gamma = s.squaredNorm();
  if (s0 <= floor) out.converged = true;  // Z is orthogonal to the range
  while (!out.converged && out.iterations < max_it) {
    const Matrix q = apply_tau_power(pair, p, power);
    const double qq = q.squaredNorm();
    if (qq == 0.0) {
      out.converged = true;
      break;
    }
    const double alpha = gamma / qq;
    out.W += alpha * p;
    r -= alpha * q;
    ++out.iterations;
    s = apply_tau_adjoint_power(pair, r, power);
    const double gamma_next = s.squaredNorm();
    if (std::sqrt(gamma_next) <= std::max(t.cg_tol * s0, floor) || r.norm() <= 1e-15 * out.target_norm) {
      out.converged = true;
      break;
    }
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  out.residual = (apply_tau_power(pair, out.W, power) - Z).norm() / out.target_norm;
  return out;
}

Membership classify(const std::vector<MembershipRecord>& ladder, const MembershipThresholds& t) {
  if (ladder.empty()) return Membership::inconclusive;
  for (const auto& r : ladder)
    if (!r.converged) return Membership::inconclusive;
  double lo = ladder.front().wnorm, hi = lo;
  bool all_small = true, all_large = true;
  for (const auto& r : ladder) {
    lo = std::min(lo, r.wnorm);
    hi = std::max(hi, r.wnorm);
    all_small = all_small && r.residual <= t.eps_mem;
    all_large = all_large && r.residual >= t.delta_res;
  }
  const double spread = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : INFINITY);
  const double first = ladder.front().wnorm, last = ladder.back().wnorm;
  const double growth = last == 0.0 ? 1.0 : (first > 0.0 ? last / first : INFINITY);
  if (ladder.back().residual <= t.eps_mem && spread <= t.growth) return Membership::in_range;
  if (all_small && growth >= t.growth) return Membership::not_in_range_unbounded;
  if (all_large) return Membership::not_in_range_residual;
  return Membership::inconclusive;
}

MembershipReport range_membership(const MembershipBuilder& builder, std::span<const Index> ladder, int power,
                                  const MembershipThresholds& thresholds) {
  if (power < 1) throw Error("tau power must be at least 1");
  if (ladder.empty()) throw Error("size ladder is empty");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] <= ladder[i - 1]) throw Error("ladder not increasing");
  MembershipReport rep;
  rep.power = power;
  rep.thresholds = thresholds;
  for (Index N : ladder) {
    const auto prob = builder(N);
    auto sol = solve_min_norm(prob.pair, prob.target, power, thresholds);
    MembershipRecord rec;
    rec.N = N;
    rec.residual = sol.residual;
    rec.wnorm = sol.W.norm();
    rec.target_norm = sol.target_norm;
    rec.converged = sol.converged;
    rec.iterations = sol.iterations;
    rep.ladder.push_back(rec);
    rep.target_norm = sol.target_norm;
    rep.witness = std::move(sol.W);
  }
  rep.classification = classify(rep.ladder, thresholds);
  return rep;
}

MembershipReport range_membership(const SylvesterPair& pair, const Matrix& Z, int power,
                                  const MembershipThresholds& thresholds) {
  const Index N = pair.rows();
  const Index sizes[] = {N};
  return range_membership([&](Index) { return MembershipProblem{pair, Z}; }, sizes, power, thresholds);
}

QuasinilpotencyDiagnostic quasinilpotency_diagnostic(const Matrix& P, int kmax) {
  if (kmax < 2) throw Error("quasinilpotency_diagnostic: kmax must be at least 2");
  if (P.rows() != P.cols()) throw DimensionError("quasinilpotency_diagnostic needs a square matrix");
  QuasinilpotencyDiagnostic d;
  Matrix Pk = P;
  for (int k = 1; k <= kmax; ++k) {
    if (k > 1) Pk = Pk * P;
    d.roots.push_back(std::pow(spectral_norm(Pk), 1.0 / k));
  }
  d.trend = d.roots.back();
  return d;
}

KerRanReport ker_ran_intersection_diagnostic(const PairBuilder& builder, std::span<const Index> ladder,
                                             const MembershipThresholds& thresholds, double tol) {
  if (ladder.empty()) throw Error("size ladder is empty");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] <= ladder[i - 1]) throw Error("ladder not increasing");

  KerRanReport rep;
  const auto first_pair = builder(ladder.front());
  const auto ns0 = kernel_vectors(first_pair, tol);
  const Index d = ns0.basis.cols();
  if (d == 0) return rep;

  // pivot coordinates chosen where the smallest kernel is best conditioned
  Eigen::ColPivHouseholderQR<Matrix> qr(ns0.basis.transpose());
  const Index m0 = first_pair.rows();
  std::vector<std::pair<Index, Index>> pivots;
  for (Index c = 0; c < d; ++c) {
    const Index idx = qr.colsPermutation().indices()(c);
    pivots.emplace_back(idx % m0, idx / m0);
  }

  // canonical families, one kernel computation per size
  std::map<Index, std::vector<Matrix>> families;
  std::map<Index, SylvesterPair> pairs;
  for (Index N : ladder) {
    auto pair = N == ladder.front() ? first_pair : builder(N);
    const auto ns = N == ladder.front() ? ns0 : kernel_vectors(pair, tol);
    const Index m = pair.rows();
    Matrix R(d, ns.basis.cols());
    for (Index p = 0; p < d; ++p) R.row(p) = ns.basis.row(pivots[static_cast<std::size_t>(p)].first +
                                                          pivots[static_cast<std::size_t>(p)].second * m);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(R);
    std::vector<Matrix> fam;
    for (Index p = 0; p < d; ++p) {
      const Vector c = cod.solve(Vector::Unit(d, p));
      const Vector x = ns.basis * c;
      fam.push_back(Eigen::Map<const Matrix>(x.data(), pair.rows(), pair.cols()));
    }
    families.emplace(N, std::move(fam));
    pairs.emplace(N, std::move(pair));
  }

  for (Index p = 0; p < d; ++p) {
    KernelElementReport el;
    el.pivot_row = pivots[static_cast<std::size_t>(p)].first;
    el.pivot_col = pivots[static_cast<std::size_t>(p)].second;
    el.membership = range_membership(
        [&](Index N) {
          return MembershipProblem{pairs.at(N), families.at(N)[static_cast<std::size_t>(p)]};
        },
        ladder, 1, thresholds);
    const Matrix& top = families.at(ladder.back())[static_cast<std::size_t>(p)];
    if (top.rows() == top.cols() && top.rows() >= 2)
      el.quasinilpotency = quasinilpotency_diagnostic(top, static_cast<int>(top.rows()));
    if (el.membership.classification == Membership::in_range) rep.property_h = false;
    rep.elements.push_back(std::move(el));
  }
  return rep;
}

IntertwinerStructureReport verify_intertwiner_structure(const WeightSequence& a, const WeightSequence& b,
                                                        Index N, double tol) {
  IntertwinerStructureReport rep;
  const Matrix A = truncate_shift(a, N).entries;
  const Matrix B = truncate_shift(b, N).entries;
  std::vector<double> la(static_cast<std::size_t>(N)), lb(static_cast<std::size_t>(N));
  for (Index k = 0; k < N; ++k) {
    la[static_cast<std::size_t>(k)] = a.log_weight(k);
    lb[static_cast<std::size_t>(k)] = b.log_weight(k);
  }
  auto sum = [](const std::vector<double>& v, Index from, Index to) {  // inclusive
    double s = 0.0;
    for (Index k = from; k <= to; ++k) s += v[static_cast<std::size_t>(k)];
    return s;
  };

  const auto ker = kernel_basis(SylvesterPair(A, B));
  rep.kernel_dim = static_cast<Index>(ker.size());
  for (const auto& X : ker) {
    const double nx = X.norm();
    for (Index i = 0; i < N; ++i)
      for (Index j = 0; j < i; ++j) rep.max_lower = std::max(rep.max_lower, std::abs(X(i, j)) / nx);
    // x_{n+1,n+j} = prod_{k=j-1}^{n+j-1} b_k / prod_{k=0}^{n} a_k * x_{0,j-1}
    for (Index n = 0; n + 1 < N; ++n)
      for (Index j = 1; n + j < N; ++j) {
        const double pred = std::exp(sum(lb, j - 1, n + j - 1) - sum(la, 0, n)) * X(0, j - 1);
        rep.max_recursion_deviation = std::max(rep.max_recursion_deviation, std::abs(X(n + 1, n + j) - pred) / nx);
      }
  }

  const auto adj = kernel_basis(SylvesterPair(A.transpose(), B.transpose()));
  rep.adjoint_kernel_dim = static_cast<Index>(adj.size());
  for (const auto& Y : adj) {
    const double ny = Y.norm();
    for (Index i = 0; i < N; ++i)
      for (Index j = i + 1; j < N; ++j) rep.max_adjoint_upper = std::max(rep.max_adjoint_upper, std::abs(Y(i, j)) / ny);
    // y_{n+j,n} = prod_{k=j}^{n+j-1} a_k / prod_{k=0}^{n-1} b_k * y_{j,0}
    for (Index j = 0; j < N; ++j)
      for (Index n = 1; n + j < N; ++n) {
        const double pred = std::exp(sum(la, j, n + j - 1) - sum(lb, 0, n - 1)) * Y(j, 0);
        rep.max_adjoint_deviation = std::max(rep.max_adjoint_deviation, std::abs(Y(n + j, n) - pred) / ny);
      }
  }

  if (rep.kernel_dim != N) rep.failures.push_back("kernel dimension " + std::to_string(rep.kernel_dim) + " != N");
  if (rep.max_lower > tol) rep.failures.push_back("kernel element not upper triangular");
  if (rep.max_recursion_deviation > tol) rep.failures.push_back("kernel entries violate the shift recursion");
  if (rep.adjoint_kernel_dim != N)
    rep.failures.push_back("adjoint kernel dimension " + std::to_string(rep.adjoint_kernel_dim) + " != N");
  if (rep.max_adjoint_upper > tol) rep.failures.push_back("adjoint kernel element not lower triangular");
  if (rep.max_adjoint_deviation > tol) rep.failures.push_back("adjoint kernel entries violate the diagonal formula");
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace flagop
