#include "flagop/quasisim.hpp"

#include "flagop/linalg.hpp"

#include <algorithm>

namespace flagop {

FlagPair build_flag_pair(std::vector<WeightSequence> diag, std::vector<WeightSequence> diag_tilde, SymbolMap symbols,
                         SymbolMap symbols_tilde, Index N) {
  if (diag.size() != diag_tilde.size()) throw DimensionError("block counts differ");
  FlagPair p{ratio_diagonal_spec(std::move(diag), std::move(symbols)),
             ratio_diagonal_spec(std::move(diag_tilde), std::move(symbols_tilde))};
  for (const FlagSpec* s : {&p.T, &p.T_tilde}) {
    if (!validate_flag(*s, N).passed()) throw SpecError("pair member fails the flag relations");
    if (!check_condition_a(*s, N).passed) throw SpecError("pair member fails the higher-block factorization");
  }
  return p;
}

std::string to_string(CertificateVerdict v) {
  switch (v) {
    case CertificateVerdict::certified_on_horizon: return "certified-on-horizon";
    case CertificateVerdict::refuted: return "refuted";
    case CertificateVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<std::string> standard_assumptions() {
  return {
      "commutant of every diagonal atom is semi-simple (consumed, not checked)",
      "diagonal atoms are injective backward weighted shifts with positive weights",
      "every diagonal atom is strongly irreducible (backward shifts; not re-checked)",
      "higher blocks factor through polynomial symbols of the diagonal atoms",
      "verdicts are evidence on a finite horizon, not proofs of boundedness",
  };
}

SimilarityCertificate similarity_certificate(const FlagSpec& T, const FlagSpec& Tt, Index N) {
  if (T.n != Tt.n) throw DimensionError("block counts differ");
  if (!T.ratio_diagonal() || !Tt.ratio_diagonal())
    throw SpecError("similarity certificates need ratio-diagonal specs");
  SimilarityCertificate c;
  std::vector<Matrix> diag;
  bool refuted = false;
  for (int i = 0; i < T.n; ++i) {
    const auto& a = T.diagonal_sequence(i);
    const auto& b = Tt.diagonal_sequence(i);
    const auto ds = diagonal_similarity(a, b, N);
    BlockShields bs;
    bs.i = i;
    bs.shields = shields_similarity_check(a, b, N);
    bs.analytic_limit = analytic_ratio_limit(a, b);
    bs.condition = ds.condition_estimate;
    refuted = refuted || bs.shields.verdict != ShieldsVerdict::bounded_on_horizon;
    c.condition_estimate = std::max(c.condition_estimate, ds.condition_estimate);
    c.blocks.push_back(bs);
    diag.push_back(ds.matrix());
  }
  const Matrix D = block_diagonal(diag);
  const auto AT = assemble(T, N);
  const auto ATt = assemble(Tt, N);
  Matrix X = D;
  if (!is_of_form(T) || !is_of_form(Tt)) {
    // T = R S R^-1 and T~ = R~ S~ R~^-1 with S D = D S~, so R D R~^-1 intertwines
    const auto red = of_reduction(T, N);
    const auto red_t = of_reduction(Tt, N);
    c.bridged = true;
    c.reduction_residual = red.residual;
    c.reduction_residual_tilde = red_t.residual;
    X = red.X.data() * D * unitriangular_inverse(red_t.X).data();
  }
  c.X = BlockMatrix(X, T.n, N);
  const double nt = AT.data().norm();
  c.residual = (AT.data() * X - X * ATt.data()).norm() / (nt > 0 ? nt : 1.0);
  if (refuted)
    c.verdict = CertificateVerdict::refuted;
  else if (c.residual <= kCertificateTol)
    c.verdict = CertificateVerdict::certified_on_horizon;
  else
    c.verdict = CertificateVerdict::inconclusive;
  return c;
}

QuasiSimilarityReport quasi_similarity_verdict(const FlagSpec& T, const FlagSpec& Tt, Index N) {
  auto cert = similarity_certificate(T, Tt, N);
  QuasiSimilarityReport r;
  r.verdict = cert.verdict;
  r.blocks = cert.blocks;
  r.residual = cert.residual;
  r.condition = cert.condition_estimate;
  r.assumptions = standard_assumptions();
  std::string route = cert.bridged ? " Higher blocks were removed by reducing both operators first and composing "
                                     "the reductions with the diagonal similarity."
                                   : "";
  switch (cert.verdict) {
    case CertificateVerdict::certified_on_horizon:
      r.rationale = "For ratio-diagonal flag operators with factorized higher blocks, quasi-similarity is "
                    "equivalent to similarity, which holds iff every diagonal pair has bounded beta ratios. All "
                    "blocks are bounded on the horizon and the explicit similarity intertwines." + route;
      r.certificate = std::move(cert);
      break;
    case CertificateVerdict::refuted:
      r.rationale = "For ratio-diagonal flag operators with factorized higher blocks, quasi-similarity is "
                    "equivalent to similarity, which fails when a diagonal pair has unbounded beta ratios. At "
                    "least one block ratio diverges or vanishes on the horizon." + route;
      break;
    case CertificateVerdict::inconclusive:
      r.rationale = "Block ratios are bounded on the horizon but the composed similarity does not intertwine "
                    "to tolerance." + route;
      break;
  }
  return r;
}

}  // namespace flagop
