#pragma once

#include "flagop/core.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace flagop {

enum class WeightKind { constant, explicit_list, geometric, kernel_power, ratio_of };

struct RepeatLast {
  bool operator==(const RepeatLast&) const = default;
};
struct ConstantTail {
  double c = 1.0;
  bool operator==(const ConstantTail&) const = default;
};
using TailRule = std::variant<RepeatLast, ConstantTail>;

// Rule generating positive weights w_0, w_1, ... Weights are checked when
// generated, so a bad parameter surfaces as a WeightError at the first index
// that uses it.
class WeightSequence {
 public:
  static WeightSequence constant(double c);
  static WeightSequence explicit_list(std::vector<double> values, TailRule tail = RepeatLast{});
  // w_k = c q^k
  static WeightSequence geometric(double c, double q);
  // weights of the shift on the space with kernel (1 - z w)^-lambda
  static WeightSequence kernel_power(double lambda);
  // kernel_power(num) / kernel_power(den), weightwise
  static WeightSequence ratio_of(double lambda_num, double lambda_den);

  WeightSequence with_label(std::string label) const;

  WeightKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  double c() const { return c_; }
  double q() const { return q_; }
  double lambda() const { return lambda_; }
  double lambda_den() const { return lambda_den_; }
  const std::vector<double>& values() const { return values_; }
  const TailRule& tail() const { return tail_; }

  double weight(Index k) const;
  double log_weight(Index k) const;

  bool operator==(const WeightSequence&) const = default;

 private:
  WeightSequence() = default;
  double raw_weight(Index k) const;

  WeightKind kind_ = WeightKind::constant;
  double c_ = 1.0;
  double q_ = 1.0;
  double lambda_ = 1.0;
  double lambda_den_ = 1.0;
  std::vector<double> values_;
  TailRule tail_ = RepeatLast{};
  std::string label_;
};

std::string to_string(WeightKind kind);

struct BetaProducts {
  std::vector<double> log_beta;  // length N+1, log_beta[0] = 0

  double beta(Index n) const;
  Index horizon() const { return static_cast<Index>(log_beta.size()) - 1; }
};

BetaProducts beta(const WeightSequence& seq, Index N);

struct ShiftMatrix {
  Matrix entries;
  std::string source;
  Index dim() const { return entries.rows(); }
};

// T e_l = w_{l-1} e_{l-1}, T e_0 = 0, restricted to span{e_0..e_{N-1}}.
ShiftMatrix truncate_shift(const WeightSequence& seq, Index N);

// rho_l = log beta_B(l) - log beta_A(l), l = 0..N
std::vector<double> ratio_sequence(const WeightSequence& a, const WeightSequence& b, Index N);

enum class ShieldsVerdict { bounded_on_horizon, diverging, vanishing };
std::string to_string(ShieldsVerdict v);

struct TrendThresholds {
  double slope = 0.05;
  double r_squared = 0.9;
};

struct ShieldsReport {
  ShieldsVerdict verdict = ShieldsVerdict::bounded_on_horizon;
  double sup = 0.0;
  double inf = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  Index horizon = 0;
};

ShieldsReport shields_similarity_check(const WeightSequence& a, const WeightSequence& b, Index N,
                                       TrendThresholds thresholds = {});

// Leading behaviour log beta(l) ~ quadratic l^2 + linear l + logarithmic log l.
struct LogBetaAsymptotics {
  double quadratic = 0.0;
  double linear = 0.0;
  double logarithmic = 0.0;
};

LogBetaAsymptotics asymptotics(const WeightSequence& seq);

// Limit behaviour of rho_l = log beta_B(l) - log beta_A(l) from the closed forms.
ShieldsVerdict analytic_ratio_limit(const WeightSequence& a, const WeightSequence& b);

struct DiagonalSimilarity {
  Vector diagonal;
  double condition_estimate = 1.0;
  Matrix matrix() const { return diagonal.asDiagonal(); }
};

// X with T_a X = X T_b on the truncation, X = diag(exp(rho_l)).
DiagonalSimilarity diagonal_similarity(const WeightSequence& a, const WeightSequence& b, Index N);

Matrix polynomial_of_shift(const WeightSequence& seq, std::span<const double> coeffs, Index N);

// Multiplication by sum_k c_k z^k on H^2(beta), normalized basis.
Matrix multiplier_matrix(const WeightSequence& seq, std::span<const double> coeffs, Index N);

// Largest geometric mean of `window` consecutive weights among w_0..w_{N-1};
// window defaults to N/2.
double spectral_radius_estimate(const WeightSequence& seq, Index N,
                                std::optional<Index> window = std::nullopt);

}  // namespace flagop
