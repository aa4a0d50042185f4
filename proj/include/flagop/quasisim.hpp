#pragma once

#include "flagop/core.hpp"
#include "flagop/flag.hpp"
#include "flagop/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace flagop {

struct FlagPair {
  FlagSpec T;
  FlagSpec T_tilde;
};

// Two ratio-diagonal specs, checked for the flag relations and the
// higher-block factorization at N.
FlagPair build_flag_pair(std::vector<WeightSequence> diag, std::vector<WeightSequence> diag_tilde,
                         SymbolMap symbols, SymbolMap symbols_tilde, Index N);

enum class CertificateVerdict { certified_on_horizon, refuted, inconclusive };
std::string to_string(CertificateVerdict v);

struct BlockShields {
  int i = 0;
  ShieldsReport shields;
  ShieldsVerdict analytic_limit = ShieldsVerdict::bounded_on_horizon;
  double condition = 1.0;
};

struct SimilarityCertificate {
  BlockMatrix X;  // T X = X T_tilde
  double residual = 0.0;  // ||T X - X T_tilde|| / ||T||
  double condition_estimate = 1.0;
  CertificateVerdict verdict = CertificateVerdict::inconclusive;
  std::vector<BlockShields> blocks;
  bool bridged = false;  // composed through the reductions of both sides
  double reduction_residual = 0.0;
  double reduction_residual_tilde = 0.0;
};

inline constexpr double kCertificateTol = 1e-10;

SimilarityCertificate similarity_certificate(const FlagSpec& T, const FlagSpec& T_tilde, Index N);

struct QuasiSimilarityReport {
  CertificateVerdict verdict = CertificateVerdict::inconclusive;
  std::string rationale;
  std::vector<BlockShields> blocks;
  std::optional<SimilarityCertificate> certificate;  // present when certified
  double residual = 0.0;
  double condition = 1.0;
  std::vector<std::string> assumptions;
};

QuasiSimilarityReport quasi_similarity_verdict(const FlagSpec& T, const FlagSpec& T_tilde, Index N);

std::vector<std::string> standard_assumptions();

}  // namespace flagop
