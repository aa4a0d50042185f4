#include "flagop/weights.hpp"

#include "flagop/linalg.hpp"
#include "flagop/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace flagop {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

WeightSequence WeightSequence::constant(double c) {
  WeightSequence s;
  s.kind_ = WeightKind::constant;
  s.c_ = c;
  s.label_ = "constant(" + num(c) + ")";
  return s;
}

WeightSequence WeightSequence::explicit_list(std::vector<double> values, TailRule tail) {
  WeightSequence s;
  s.kind_ = WeightKind::explicit_list;
  if (values.empty() && std::holds_alternative<RepeatLast>(tail))
    throw SpecError("explicit weight list is empty and has no constant tail");
  s.values_ = std::move(values);
  s.tail_ = tail;
  std::string l = "explicit(";
  for (std::size_t i = 0; i < s.values_.size() && i < 4; ++i) l += (i ? "," : "") + num(s.values_[i]);
  if (s.values_.size() > 4) l += ",...";
  s.label_ = l + ")";
  return s;
}

WeightSequence WeightSequence::geometric(double c, double q) {
  WeightSequence s;
  s.kind_ = WeightKind::geometric;
  s.c_ = c;
  s.q_ = q;
  s.label_ = "geometric(" + num(c) + "," + num(q) + ")";
  return s;
}

WeightSequence WeightSequence::kernel_power(double lambda) {
  WeightSequence s;
  s.kind_ = WeightKind::kernel_power;
  s.lambda_ = lambda;
  s.label_ = "kernel-power(" + num(lambda) + ")";
  return s;
}

WeightSequence WeightSequence::ratio_of(double lambda_num, double lambda_den) {
  WeightSequence s;
  s.kind_ = WeightKind::ratio_of;
  s.lambda_ = lambda_num;
  s.lambda_den_ = lambda_den;
  s.label_ = "ratio-of(" + num(lambda_num) + "," + num(lambda_den) + ")";
  return s;
}

WeightSequence WeightSequence::with_label(std::string label) const {
  WeightSequence s = *this;
  s.label_ = std::move(label);
  return s;
}

double WeightSequence::raw_weight(Index k) const {
  switch (kind_) {
    case WeightKind::constant:
      return c_;
    case WeightKind::explicit_list:
      if (k < static_cast<Index>(values_.size())) return values_[static_cast<std::size_t>(k)];
      if (const auto* t = std::get_if<ConstantTail>(&tail_)) return t->c;
      return values_.back();
    case WeightKind::geometric:
      return c_ * std::pow(q_, static_cast<double>(k));
    case WeightKind::kernel_power:
      return power_kernel_weight(lambda_, k);
    case WeightKind::ratio_of:
      return power_kernel_weight(lambda_, k) / power_kernel_weight(lambda_den_, k);
  }
  return 0.0;
}

double WeightSequence::weight(Index k) const {
  if (kind_ == WeightKind::geometric) return std::exp(log_weight(k));
  const double w = raw_weight(k);
  if (!(std::isfinite(w) && w > 0.0)) throw WeightError(k, w);
  return w;
}

double WeightSequence::log_weight(Index k) const {
  if (kind_ == WeightKind::geometric) {
    if (!(c_ > 0.0 && q_ > 0.0 && std::isfinite(c_) && std::isfinite(q_)))
      throw WeightError(k, raw_weight(k));
    return std::log(c_) + static_cast<double>(k) * std::log(q_);
  }
  return std::log(weight(k));
}

std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::constant: return "constant";
    case WeightKind::explicit_list: return "explicit";
    case WeightKind::geometric: return "geometric";
    case WeightKind::kernel_power: return "kernel-power";
    case WeightKind::ratio_of: return "ratio-of";
  }
  return "?";
}

double BetaProducts::beta(Index n) const { return std::exp(log_beta.at(static_cast<std::size_t>(n))); }

BetaProducts beta(const WeightSequence& seq, Index N) {
  if (N < 0) throw Error("beta: negative horizon");
  BetaProducts b;
  b.log_beta.resize(static_cast<std::size_t>(N) + 1);
  b.log_beta[0] = 0.0;
  for (Index k = 0; k < N; ++k)
    b.log_beta[static_cast<std::size_t>(k) + 1] = b.log_beta[static_cast<std::size_t>(k)] + seq.log_weight(k);
  return b;
}

ShiftMatrix truncate_shift(const WeightSequence& seq, Index N) {
  if (N < 1) throw Error("truncate_shift: N must be at least 1");
  ShiftMatrix s;
  s.entries = Matrix::Zero(N, N);
  for (Index l = 1; l < N; ++l) s.entries(l - 1, l) = seq.weight(l - 1);
  s.source = seq.label();
  return s;
}

std::vector<double> ratio_sequence(const WeightSequence& a, const WeightSequence& b, Index N) {
  if (N < 1) throw Error("ratio_sequence: N must be at least 1");
  const auto ba = beta(a, N);
  const auto bb = beta(b, N);
  std::vector<double> rho(ba.log_beta.size());
  for (std::size_t l = 0; l < rho.size(); ++l) rho[l] = bb.log_beta[l] - ba.log_beta[l];
  return rho;
}

std::string to_string(ShieldsVerdict v) {
  switch (v) {
    case ShieldsVerdict::bounded_on_horizon: return "bounded-on-horizon";
    case ShieldsVerdict::diverging: return "diverging";
    case ShieldsVerdict::vanishing: return "vanishing";
  }
  return "?";
}

ShieldsReport shields_similarity_check(const WeightSequence& a, const WeightSequence& b, Index N,
                                       TrendThresholds thresholds) {
  if (N < 8) throw Error("shields_similarity_check: N must be at least 8");
  const auto rho = ratio_sequence(a, b, N);
  ShieldsReport r;
  r.horizon = N;
  r.sup = *std::max_element(rho.begin(), rho.end());
  r.inf = *std::min_element(rho.begin(), rho.end());
  std::vector<double> x, y;
  for (Index l = (N + 1) / 2; l <= N; ++l) {
    x.push_back(std::log(static_cast<double>(l + 1)));
    y.push_back(rho[static_cast<std::size_t>(l)]);
  }
  const auto fit = fit_line(x, y);
  r.slope = fit.slope;
  r.r_squared = fit.r_squared;
  if (std::abs(fit.slope) >= thresholds.slope && fit.r_squared >= thresholds.r_squared)
    r.verdict = fit.slope > 0 ? ShieldsVerdict::diverging : ShieldsVerdict::vanishing;
  return r;
}

LogBetaAsymptotics asymptotics(const WeightSequence& seq) {
  LogBetaAsymptotics out;
  switch (seq.kind()) {
    case WeightKind::constant:
      out.linear = std::log(seq.c());
      break;
    case WeightKind::explicit_list:
      if (const auto* t = std::get_if<ConstantTail>(&seq.tail()))
        out.linear = std::log(t->c);
      else
        out.linear = std::log(seq.values().back());
      break;
    case WeightKind::geometric:
      // sum_{k<l} (log c + k log q) = l log c + l(l-1)/2 log q
      out.quadratic = 0.5 * std::log(seq.q());
      out.linear = std::log(seq.c()) - 0.5 * std::log(seq.q());
      break;
    case WeightKind::kernel_power:
      // beta(l)^2 = 1/a_l and a_l ~ l^(lambda-1)/Gamma(lambda)
      out.logarithmic = 0.5 * (1.0 - seq.lambda());
      break;
    case WeightKind::ratio_of:
      out.logarithmic = 0.5 * (seq.lambda_den() - seq.lambda());
      break;
  }
  return out;
}

ShieldsVerdict analytic_ratio_limit(const WeightSequence& a, const WeightSequence& b) {
  const auto la = asymptotics(a);
  const auto lb = asymptotics(b);
  for (double d : {lb.quadratic - la.quadratic, lb.linear - la.linear, lb.logarithmic - la.logarithmic}) {
    if (d > 0) return ShieldsVerdict::diverging;
    if (d < 0) return ShieldsVerdict::vanishing;
  }
  return ShieldsVerdict::bounded_on_horizon;
}

DiagonalSimilarity diagonal_similarity(const WeightSequence& a, const WeightSequence& b, Index N) {
  const auto rho = ratio_sequence(a, b, N);
  DiagonalSimilarity d;
  d.diagonal.resize(N);
  double hi = rho[0], lo = rho[0];
  for (Index l = 0; l < N; ++l) {
    const double r = rho[static_cast<std::size_t>(l)];
    d.diagonal(l) = std::exp(r);
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  d.condition_estimate = std::exp(hi - lo);
  return d;
}

Matrix polynomial_of_shift(const WeightSequence& seq, std::span<const double> coeffs, Index N) {
  if (static_cast<Index>(coeffs.size()) > N + 1)
    throw Error("polynomial degree exceeds the truncation size");
  return polynomial_of(truncate_shift(seq, N).entries, coeffs);
}

Matrix multiplier_matrix(const WeightSequence& seq, std::span<const double> coeffs, Index N) {
  if (static_cast<Index>(coeffs.size()) > N + 1)
    throw Error("polynomial degree exceeds the truncation size");
  const auto b = beta(seq, N);
  Matrix M = Matrix::Zero(N, N);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == 0.0) continue;
    const Index kk = static_cast<Index>(k);
    for (Index n = 0; n + kk < N; ++n)
      M(n + kk, n) += coeffs[k] * std::exp(b.log_beta[static_cast<std::size_t>(n)] -
                                            b.log_beta[static_cast<std::size_t>(n + kk)]);
  }
  return M;
}

double spectral_radius_estimate(const WeightSequence& seq, Index N, std::optional<Index> window) {
  if (N < 4) throw Error("spectral_radius_estimate: N must be at least 4");
  const Index m = window.value_or(N / 2);
  if (m < 1 || m > N) throw Error("spectral_radius_estimate: window out of range");
  std::vector<double> lw(static_cast<std::size_t>(N));
  for (Index k = 0; k < N; ++k) lw[static_cast<std::size_t>(k)] = seq.log_weight(k);
  double best = -std::numeric_limits<double>::infinity();
  double best_exact = 0.0;
  bool best_is_exact = false;
  for (Index s = 0; s + m <= N; ++s) {
    double acc = 0.0;
    bool flat = true;
    for (Index k = s; k < s + m; ++k) {
      acc += lw[static_cast<std::size_t>(k)];
      flat = flat && lw[static_cast<std::size_t>(k)] == lw[static_cast<std::size_t>(s)];
    }
    const double mean = acc / static_cast<double>(m);
    if (mean > best) {
      best = mean;
      best_is_exact = flat;
      best_exact = flat ? seq.weight(s) : 0.0;
    }
  }
  return best_is_exact ? best_exact : std::exp(best);
}

}  // namespace flagop
