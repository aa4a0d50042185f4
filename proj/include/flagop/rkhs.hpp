#pragma once

#include "flagop/core.hpp"
#include "flagop/flag.hpp"
#include "flagop/weights.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace flagop {

struct QuasiSimilarityReport;

// w_n = sqrt((n+1)/(lambda+n)) = sqrt(a_n / a_{n+1}) for a_n the coefficients
// of (1-x)^-lambda. The weights module calls this for kernel-power sequences.
double power_kernel_weight(double lambda, Index n);

// a_0..a_N with a_n = prod_{k<n} (lambda+k)/(k+1)
std::vector<double> kernel_coefficients(double lambda, Index N);

// K(z,w) = sum_n a_n (z conj(w))^n
class DiagonalKernel {
 public:
  enum class Kind { power, explicit_list };

  static DiagonalKernel power(double lambda);
  // a_0..a_{L-1}, then a_n = a_{L-1}
  static DiagonalKernel explicit_list(std::vector<double> coeffs);
  DiagonalKernel with_label(std::string label) const;

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& values() const { return values_; }
  const std::string& label() const { return label_; }

  double coefficient(Index n) const;
  double log_coefficient(Index n) const;
  // sup over m >= n of a_{m+1} / a_m
  double ratio_sup(Index n) const;

  bool operator==(const DiagonalKernel&) const = default;

 private:
  Kind kind_ = Kind::power;
  double lambda_ = 1.0;
  std::vector<double> values_;
  std::string label_;
};

WeightSequence shift_from_kernel(const DiagonalKernel& kernel);

struct KernelFlagExample {
  FlagSpec spec;
  std::array<DiagonalKernel, 3> kernels;
  std::vector<double> phi;
};

// n = 3 ratio-diagonal spec over the shifts of three kernels with
// T_13 = phi(T_11) T_12 T_23. Validated at N.
KernelFlagExample build_example_3x3(const std::array<DiagonalKernel, 3>& kernels, std::vector<double> phi,
                                    Index N);

struct KernelValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

// sum_{n<=N} a_n x^n with a bound on the remainder.
KernelValue kernel_eval(const DiagonalKernel& kernel, double x, Index N);

// Bound on sum_{l>=M} a_l |x|^l.
double kernel_tail(const DiagonalKernel& kernel, double x, Index M);

struct KernelSampleCheck {
  double w = 0.0;
  double max_error = 0.0;
  double allowance = 0.0;
  bool passed = false;
};

struct KernelRelationReport {
  bool passed = false;
  std::vector<KernelSampleCheck> samples;
};

// Checks T_ii k_i = w k_i, T_{i,i+1} k_{i+1} = k_i and T_13 k_3 = phi(w) k_1 for
// k_i = (sqrt(a_l^(i)) w^l)_l, the kernel function at conj(w) in the e-basis.
// Samples need |w| <= 0.9 and a truncation tail below tol/10.
KernelRelationReport verify_kernel_relations(const KernelFlagExample& example, std::span<const double> samples,
                                             Index N, double tol = 1e-8);

// Smallest N whose truncation tail at w is below `bound` for all three kernels.
Index required_size(const KernelFlagExample& example, double w, double bound);

// Two-block pairs over (power(l), power(l+2)) and (power(lt), power(lt+2)).
QuasiSimilarityReport homogeneous_pair_check(double lambda, double lambda_tilde, Index N);

}  // namespace flagop
