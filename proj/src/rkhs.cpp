#include "flagop/rkhs.hpp"

#include "flagop/linalg.hpp"
#include "flagop/quasisim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace flagop {

double power_kernel_weight(double lambda, Index n) {
  const double k = static_cast<double>(n);
  return std::sqrt((k + 1.0) / (lambda + k));
}

std::vector<double> kernel_coefficients(double lambda, Index N) {
  if (!(lambda > 0.0)) throw Error("kernel exponent lambda must be positive");
  if (N < 0) throw Error("kernel_coefficients: negative N");
  std::vector<double> a(static_cast<std::size_t>(N) + 1);
  double log_a = 0.0;
  a[0] = 1.0;
  for (Index n = 0; n < N; ++n) {
    const double k = static_cast<double>(n);
    log_a += std::log(lambda + k) - std::log(k + 1.0);
    a[static_cast<std::size_t>(n) + 1] = std::exp(log_a);
  }
  return a;
}

DiagonalKernel DiagonalKernel::power(double lambda) {
  if (!(lambda > 0.0)) throw Error("kernel exponent lambda must be positive");
  DiagonalKernel k;
  k.kind_ = Kind::power;
  k.lambda_ = lambda;
  std::ostringstream os;
  os.precision(12);
  os << "power(" << lambda << ")";
  k.label_ = os.str();
  return k;
}

DiagonalKernel DiagonalKernel::explicit_list(std::vector<double> coeffs) {
  if (coeffs.empty()) throw Error("explicit kernel needs at least one coefficient");
  for (std::size_t n = 0; n < coeffs.size(); ++n)
    if (!(coeffs[n] > 0.0 && std::isfinite(coeffs[n])))
      throw Error("kernel coefficient a_" + std::to_string(n) + " is not a finite positive number");
  DiagonalKernel k;
  k.kind_ = Kind::explicit_list;
  k.values_ = std::move(coeffs);
  k.label_ = "explicit";
  return k;
}

DiagonalKernel DiagonalKernel::with_label(std::string label) const {
  DiagonalKernel k = *this;
  k.label_ = std::move(label);
  return k;
}

double DiagonalKernel::log_coefficient(Index n) const {
  if (kind_ == Kind::explicit_list)
    return std::log(values_[static_cast<std::size_t>(std::min<Index>(n, static_cast<Index>(values_.size()) - 1))]);
  double s = 0.0;
  for (Index k = 0; k < n; ++k) s += std::log(lambda_ + double(k)) - std::log(double(k) + 1.0);
  return s;
}

double DiagonalKernel::coefficient(Index n) const {
  if (kind_ == Kind::explicit_list)
    return values_[static_cast<std::size_t>(std::min<Index>(n, static_cast<Index>(values_.size()) - 1))];
  return std::exp(log_coefficient(n));
}

double DiagonalKernel::ratio_sup(Index n) const {
  if (kind_ == Kind::power) return std::max((lambda_ + double(n)) / (double(n) + 1.0), 1.0);
  double r = 1.0;
  for (Index m = n; m + 1 < static_cast<Index>(values_.size()); ++m)
    r = std::max(r, values_[static_cast<std::size_t>(m) + 1] / values_[static_cast<std::size_t>(m)]);
  return r;
}

WeightSequence shift_from_kernel(const DiagonalKernel& kernel) {
  if (kernel.kind() == DiagonalKernel::Kind::power) return WeightSequence::kernel_power(kernel.lambda());
  const auto& a = kernel.values();
  if (a.size() == 1) return WeightSequence::constant(1.0);
  std::vector<double> w(a.size() - 1);
  for (std::size_t n = 0; n + 1 < a.size(); ++n) w[n] = std::sqrt(a[n] / a[n + 1]);
  return WeightSequence::explicit_list(std::move(w), ConstantTail{1.0});
}

KernelFlagExample build_example_3x3(const std::array<DiagonalKernel, 3>& kernels, std::vector<double> phi, Index N) {
  SymbolMap symbols;
  symbols[{0, 2}] = phi;
  KernelFlagExample ex{ratio_diagonal_spec({shift_from_kernel(kernels[0]), shift_from_kernel(kernels[1]),
                                            shift_from_kernel(kernels[2])},
                                           symbols),
                       kernels, std::move(phi)};
  if (!validate_flag(ex.spec, N).passed()) throw SpecError("kernel example fails the flag relations");
  if (!check_condition_a(ex.spec, N).passed) throw SpecError("kernel example fails the higher-block factorization");
  return ex;
}

double kernel_tail(const DiagonalKernel& kernel, double x, Index M) {
  const double ax = std::abs(x);
  if (ax == 0.0) return M == 0 ? kernel.coefficient(0) : 0.0;
  const double ratio = kernel.ratio_sup(M);
  if (ax * ratio >= 1.0) throw Error("kernel series tail does not converge at |x| = " + std::to_string(ax));
  return std::exp(kernel.log_coefficient(M) + double(M) * std::log(ax)) / (1.0 - ax * ratio);
}

KernelValue kernel_eval(const DiagonalKernel& kernel, double x, Index N) {
  if (!(std::abs(x) < 1.0)) throw Error("kernel_eval needs |x| < 1");
  KernelValue v;
  const double ax = std::abs(x);
  if (ax == 0.0) {
    v.value = kernel.coefficient(0);
    return v;
  }
  const double ratio = kernel.ratio_sup(N);
  if (ax * ratio >= 1.0) throw Error("kernel series tail does not converge at x = " + std::to_string(x));
  double s = 0.0;
  for (Index n = N; n >= 0; --n) s = s * x + kernel.coefficient(n);
  v.value = s;
  v.tail_bound = std::exp(kernel.log_coefficient(N) + double(N + 1) * std::log(ax)) * std::max(1.0, ratio) /
                 (1.0 - ax * ratio);
  return v;
}

namespace {

Index symbol_degree(const std::vector<double>& phi) { return std::max<Index>(1, static_cast<Index>(phi.size()) - 1); }

// l2 norm of the coordinates l >= M of the kernel vectors, worst kernel
double vector_tail(const KernelFlagExample& ex, double w, Index N) {
  const Index M = std::max<Index>(0, N - symbol_degree(ex.phi));
  double t = 0.0;
  for (const auto& k : ex.kernels) {
    // the geometric bound only kicks in once the coefficient ratios drop below 1/w^2
    if (w * w * k.ratio_sup(M) >= 1.0) return std::numeric_limits<double>::infinity();
    t = std::max(t, std::sqrt(kernel_tail(k, w * w, M)));
  }
  return t;
}

}  // namespace

Index required_size(const KernelFlagExample& example, double w, double bound) {
  Index hi = 2;
  while (vector_tail(example, w, hi) > bound) {
    hi *= 2;
    if (hi > (Index(1) << 24)) throw Error("no admissible truncation size for this sample");
  }
  Index lo = hi / 2;
  while (lo + 1 < hi) {
    const Index mid = (lo + hi) / 2;
    (vector_tail(example, w, mid) > bound ? lo : hi) = mid;
  }
  return hi;
}

KernelRelationReport verify_kernel_relations(const KernelFlagExample& ex, std::span<const double> samples, Index N,
                                             double tol) {
  const auto T = assemble(ex.spec, N);
  double wmax = 1.0;
  for (int i = 0; i < 3; ++i)
    for (Index k = 0; k + 1 < N; ++k) wmax = std::max(wmax, T.block(i, i)(k, k + 1));
  double growth = 1.0;
  for (std::size_t k = 1; k < ex.phi.size(); ++k) growth += std::abs(ex.phi[k]) * double(k) * std::pow(wmax, double(k));

  KernelRelationReport rep;
  rep.passed = true;
  for (double w : samples) {
    if (!(std::abs(w) <= 0.9))
      throw Error("sample w = " + std::to_string(w) + " is too close to the boundary (|w| <= 0.9 required)");
    const double tail = vector_tail(ex, w, N);
    if (tail > tol / 10)
      throw Error("sample w = " + std::to_string(w) + " needs N >= " +
                  std::to_string(required_size(ex, w, tol / 10)) + " for tolerance " + std::to_string(tol));
    std::array<Vector, 3> v;
    for (int i = 0; i < 3; ++i) {
      v[static_cast<std::size_t>(i)].resize(N);
      for (Index l = 0; l < N; ++l)
        v[static_cast<std::size_t>(i)](l) =
            std::sqrt(ex.kernels[static_cast<std::size_t>(i)].coefficient(l)) * std::pow(w, double(l));
    }
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      err = std::max(err, (T.block(i, i) * v[static_cast<std::size_t>(i)] - w * v[static_cast<std::size_t>(i)])
                              .lpNorm<Eigen::Infinity>());
    for (int i = 0; i < 2; ++i)
      err = std::max(err, (T.block(i, i + 1) * v[static_cast<std::size_t>(i + 1)] - v[static_cast<std::size_t>(i)])
                              .lpNorm<Eigen::Infinity>());
    double phi_w = 0.0;
    for (auto it = ex.phi.rbegin(); it != ex.phi.rend(); ++it) phi_w = phi_w * w + *it;
    err = std::max(err, (T.block(0, 2) * v[2] - phi_w * v[0]).lpNorm<Eigen::Infinity>());

    KernelSampleCheck c;
    c.w = w;
    c.max_error = err;
    c.allowance = tol + growth * tail;
    c.passed = err <= c.allowance;
    rep.passed = rep.passed && c.passed;
    rep.samples.push_back(c);
  }
  return rep;
}

QuasiSimilarityReport homogeneous_pair_check(double lambda, double lambda_tilde, Index N) {
  if (!(lambda > 0.0 && lambda_tilde > 0.0)) throw Error("kernel exponents must be positive");
  const auto pair = build_flag_pair(
      {shift_from_kernel(DiagonalKernel::power(lambda)), shift_from_kernel(DiagonalKernel::power(lambda + 2))},
      {shift_from_kernel(DiagonalKernel::power(lambda_tilde)),
       shift_from_kernel(DiagonalKernel::power(lambda_tilde + 2))},
      {}, {}, N);
  return quasi_similarity_verdict(pair.T, pair.T_tilde, N);
}

}  // namespace flagop
