#pragma once

#include "flagop/core.hpp"
#include "flagop/flag.hpp"
#include "flagop/sylvester.hpp"
#include "flagop/weights.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flagop {

// two-block: T_12 outside ran tau_{T_11,T_22} (an equivalence for n = 2)
// superdiagonal-chain: every T_{i,i+1} outside its range (sufficient only)
// tau-squared: the Jordan-type 3x3 operator, T_12 in ran tau but not ran tau^2
enum class SICriterion { two_block, superdiagonal_chain, tau_squared };
enum class SIVerdict { si_evidence, reducible, inconclusive };

std::string to_string(SICriterion c);
std::string to_string(SIVerdict v);

struct SuperdiagonalMembership {
  int i = 0;
  int power = 1;
  MembershipReport report;
};

struct SIReport {
  SICriterion criterion = SICriterion::two_block;
  std::vector<SuperdiagonalMembership> memberships;
  SIVerdict verdict = SIVerdict::inconclusive;
  std::vector<std::string> assumptions;
  std::string note;
  std::optional<double> splitting_residual;
  std::optional<Matrix> splitting;  // block-diagonalizing conjugation or idempotent, largest size
};

SIReport si_test_2x2(const FlagSpec& spec, std::span<const Index> ladder, const MembershipThresholds& t = {});
SIReport si_test_nxn(const FlagSpec& spec, std::span<const Index> ladder, const MembershipThresholds& t = {});
// T = [[T11, I, 0], [0, T11, T12], [0, 0, T22]]
SIReport si_test_jordan3(const WeightSequence& t11, const WeightSequence& t22, const BlockSource& t12,
                         std::span<const Index> ladder, const MembershipThresholds& t = {});

KerRanReport property_h_diagnostic(const WeightSequence& a, const WeightSequence& b, std::span<const Index> ladder,
                                   const MembershipThresholds& t = {});
KerRanReport property_h_diagnostic(const PairBuilder& builder, std::span<const Index> ladder,
                                   const MembershipThresholds& t = {});

struct RatioDivergence {
  std::vector<double> log_values;  // log(n beta_B(n) / beta_A(n)), n = 1..N
  double slope = 0.0;              // against log n over the upper half
  double r_squared = 0.0;
  bool diverging = false;
  bool analytic_diverging = false;
};

// Whether n beta_B(n) / beta_A(n) tends to infinity.
RatioDivergence ratio_divergence_criterion(const WeightSequence& a, const WeightSequence& b, Index N,
                                           TrendThresholds thresholds = {});

struct IntertwiningCheck {
  std::string relation;
  double residual = 0.0;
  bool passed = false;
};

struct GalleryReport {
  std::string name;
  Index N = 0;
  std::vector<IntertwiningCheck> checks;
  std::optional<MembershipReport> growth;  // minimal-norm solution growth
  std::optional<SIVerdict> si_T;
  std::optional<SIVerdict> si_T_tilde;
  std::optional<bool> property_h;
  std::optional<bool> transported_si;  // SI of T inferred from T~ and Property (H)
  bool passed = false;
};

inline constexpr double kGalleryTol = 1e-12;

std::vector<std::string> gallery_names();
GalleryReport gallery_example(const std::string& name, Index N, std::span<const Index> ladder,
                              const MembershipThresholds& t = {});

}  // namespace flagop
