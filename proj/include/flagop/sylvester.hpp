#pragma once

#include "flagop/core.hpp"
#include "flagop/linalg.hpp"
#include "flagop/weights.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flagop {

// tau(X) = A X - X B for X of size m x k.
struct SylvesterPair {
  Matrix A;
  Matrix B;

  SylvesterPair(Matrix a, Matrix b);
  Index rows() const { return A.rows(); }
  Index cols() const { return B.rows(); }
};

Matrix apply_tau(const SylvesterPair& pair, const Matrix& X);
Matrix apply_tau_power(const SylvesterPair& pair, const Matrix& X, int power);
// tau_{A^T, B^T}, the Frobenius adjoint of tau_{A,B}
Matrix apply_tau_adjoint(const SylvesterPair& pair, const Matrix& Y);
Matrix apply_tau_adjoint_power(const SylvesterPair& pair, const Matrix& Y, int power);

// Matrix of tau acting on column-major vec(X).
Matrix matricize(const SylvesterPair& pair);

inline constexpr Index kKernelSizeCap = 4096;
inline constexpr double kKernelTol = 1e-10;

// Null space of the matricized operator as columns vec(X).
NullSpace kernel_vectors(const SylvesterPair& pair, double tol = kKernelTol);
std::vector<Matrix> kernel_basis(const SylvesterPair& pair, double tol = kKernelTol);

enum class Membership { in_range, not_in_range_unbounded, not_in_range_residual, inconclusive };
std::string to_string(Membership m);

struct MembershipThresholds {
  double eps_mem = 1e-6;
  double delta_res = 1e-2;
  double growth = 4.0;
  double cg_tol = 1e-14;       // on the normal-equation gradient, relative
  Index max_iterations = 0;    // 0 picks max(2000, 4 m k)
  bool operator==(const MembershipThresholds&) const = default;
};

struct MinNormSolve {
  Matrix W;
  double residual = 0.0;  // ||tau^p(W) - Z|| / ||Z||
  double target_norm = 0.0;
  bool converged = false;
  Index iterations = 0;
};

// Conjugate gradients on the normal equations started from W = 0, so the
// iterate stays in the row space and converges to the minimal-norm solution.
MinNormSolve solve_min_norm(const SylvesterPair& pair, const Matrix& Z, int power,
                            const MembershipThresholds& thresholds = {});

struct MembershipRecord {
  Index N = 0;
  double residual = 0.0;
  double wnorm = 0.0;
  double target_norm = 0.0;
  bool converged = false;
  Index iterations = 0;
};

struct MembershipReport {
  int power = 1;
  double target_norm = 0.0;
  std::vector<MembershipRecord> ladder;
  Membership classification = Membership::inconclusive;
  MembershipThresholds thresholds;
  Matrix witness;  // minimal-norm W at the largest size
};

struct MembershipProblem {
  SylvesterPair pair;
  Matrix target;
};

using MembershipBuilder = std::function<MembershipProblem(Index N)>;
using PairBuilder = std::function<SylvesterPair(Index N)>;

Membership classify(const std::vector<MembershipRecord>& ladder, const MembershipThresholds& t);

MembershipReport range_membership(const MembershipBuilder& builder, std::span<const Index> ladder,
                                  int power, const MembershipThresholds& thresholds = {});
MembershipReport range_membership(const SylvesterPair& pair, const Matrix& Z, int power,
                                  const MembershipThresholds& thresholds = {});

struct QuasinilpotencyDiagnostic {
  std::vector<double> roots;  // ||P^k||^(1/k), k = 1..kmax
  double trend = 0.0;
};

QuasinilpotencyDiagnostic quasinilpotency_diagnostic(const Matrix& P, int kmax);

struct KernelElementReport {
  Index pivot_row = 0;
  Index pivot_col = 0;
  MembershipReport membership;
  std::optional<QuasinilpotencyDiagnostic> quasinilpotency;
};

struct KerRanReport {
  std::vector<KernelElementReport> elements;
  bool property_h = true;
};

// Each kernel element is followed across the ladder as the canonical element
// taking the value 1 at its pivot entry and 0 at the other pivots.
KerRanReport ker_ran_intersection_diagnostic(const PairBuilder& builder, std::span<const Index> ladder,
                                             const MembershipThresholds& thresholds = {},
                                             double tol = kKernelTol);

struct IntertwinerStructureReport {
  bool passed = false;
  Index kernel_dim = 0;
  Index adjoint_kernel_dim = 0;
  double max_lower = 0.0;
  double max_recursion_deviation = 0.0;
  double max_adjoint_upper = 0.0;
  double max_adjoint_deviation = 0.0;
  std::vector<std::string> failures;
};

// Kernel of tau for two truncated backward shifts against the closed-form
// recursion, and the lower-triangular form of the kernel for the transposes.
IntertwinerStructureReport verify_intertwiner_structure(const WeightSequence& a, const WeightSequence& b,
                                                        Index N, double tol = 1e-8);

}  // namespace flagop
