#include "flagop/irreducibility.hpp"

#include "flagop/linalg.hpp"
#include "flagop/quasisim.hpp"

#include <algorithm>
#include <cmath>

namespace flagop {

namespace {

constexpr double kSplitTol = 1e-8;

bool not_in_range(Membership m) {
  return m == Membership::not_in_range_residual || m == Membership::not_in_range_unbounded;
}

std::vector<std::string> si_assumptions() {
  return {
      "diagonal atoms are strongly irreducible (consumed, not checked)",
      "commutant of every diagonal atom is semi-simple (consumed, not checked)",
      "range membership is bounded-norm evidence on the size ladder, not a proof",
  };
}

Matrix stack2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  const Index N = a.rows();
  Matrix M(2 * N, 2 * N);
  M << a, b, c, d;
  return M;
}

}  // namespace

std::string to_string(SICriterion c) {
  switch (c) {
    case SICriterion::two_block: return "two-block";
    case SICriterion::superdiagonal_chain: return "superdiagonal-chain";
    case SICriterion::tau_squared: return "tau-squared";
  }
  return "?";
}

std::string to_string(SIVerdict v) {
  switch (v) {
    case SIVerdict::si_evidence: return "SI-evidence";
    case SIVerdict::reducible: return "reducible";
    case SIVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

SIReport si_test_2x2(const FlagSpec& spec, std::span<const Index> ladder, const MembershipThresholds& t) {
  if (spec.n != 2) throw SpecError("si_test_2x2 needs a two-block spec");
  SIReport rep;
  rep.criterion = SICriterion::two_block;
  rep.assumptions = si_assumptions();
  auto m = range_membership(
      [&](Index N) {
        const auto T = assemble(spec, N);
        return MembershipProblem{SylvesterPair(T.block(0, 0), T.block(1, 1)), T.block(0, 1)};
      },
      ladder, 1, t);
  const Membership cls = m.classification;
  if (cls == Membership::in_range) {
    const Index N = ladder.back();
    const auto T = assemble(spec, N);
    const Matrix I = Matrix::Identity(N, N), Z = Matrix::Zero(N, N);
    const Matrix& W = m.witness;
    const Matrix C = stack2(I, -W, Z, I);
    const Matrix Cinv = stack2(I, W, Z, I);
    const Matrix split = Cinv * T.data() * C;
    const Matrix D = block_diagonal({Matrix(T.block(0, 0)), Matrix(T.block(1, 1))});
    const double res = (split - D).norm() / T.data().norm();
    rep.splitting_residual = res;
    rep.splitting = C;
    if (res <= kSplitTol) {
      rep.verdict = SIVerdict::reducible;
      rep.note = "the witness conjugation block-diagonalizes T";
    } else {
      rep.verdict = SIVerdict::inconclusive;
      rep.note = "range witness found but the conjugation does not split T to tolerance";
    }
  } else if (not_in_range(cls)) {
    rep.verdict = SIVerdict::si_evidence;
    rep.note = cls == Membership::not_in_range_residual ? "T_12 keeps a residual against the range"
                                                        : "T_12 is approximated only by unbounded solutions";
  } else {
    rep.verdict = SIVerdict::inconclusive;
    rep.note = "membership ladder is inconclusive";
  }
  rep.memberships.push_back({0, 1, std::move(m)});
  return rep;
}

SIReport si_test_nxn(const FlagSpec& spec, std::span<const Index> ladder, const MembershipThresholds& t) {
  if (spec.n == 2) return si_test_2x2(spec, ladder, t);
  if (spec.n < 2) throw SpecError("block count n must be at least 2");
  SIReport rep;
  rep.criterion = SICriterion::superdiagonal_chain;
  rep.assumptions = si_assumptions();
  bool all_out = true;
  for (int i = 0; i + 1 < spec.n; ++i) {
    auto m = range_membership(
        [&](Index N) {
          const auto T = assemble(spec, N);
          return MembershipProblem{SylvesterPair(T.block(i, i), T.block(i + 1, i + 1)), T.block(i, i + 1)};
        },
        ladder, 1, t);
    all_out = all_out && not_in_range(m.classification);
    rep.memberships.push_back({i, 1, std::move(m)});
  }
  if (all_out) {
    rep.verdict = SIVerdict::si_evidence;
    rep.note = "every superdiagonal block lies outside its range (sufficient condition)";
  } else {
    rep.verdict = SIVerdict::inconclusive;
    rep.note = "inconclusive for this criterion: it is sufficient only and some superdiagonal is not excluded";
  }
  return rep;
}

SIReport si_test_jordan3(const WeightSequence& t11, const WeightSequence& t22, const BlockSource& t12,
                         std::span<const Index> ladder, const MembershipThresholds& t) {
  SIReport rep;
  rep.criterion = SICriterion::tau_squared;
  rep.assumptions = si_assumptions();
  auto builder = [&](Index N) {
    return MembershipProblem{SylvesterPair(truncate_shift(t11, N).entries, truncate_shift(t22, N).entries),
                             t12.at(N)};
  };
  auto m1 = range_membership(builder, ladder, 1, t);
  auto m2 = range_membership(builder, ladder, 2, t);
  const Membership c1 = m1.classification, c2 = m2.classification;
  if (c1 != Membership::in_range) {
    rep.verdict = SIVerdict::inconclusive;
    rep.note = not_in_range(c1) ? "T_12 is not in the range of tau; outside the tested hypotheses"
                                : "first-power membership is inconclusive";
  } else if (not_in_range(c2)) {
    rep.verdict = SIVerdict::si_evidence;
    rep.note = "T_12 is in the range of tau but not of tau squared";
  } else if (c2 == Membership::in_range) {
    const Index N = ladder.back();
    const Matrix A = truncate_shift(t11, N).entries, B = truncate_shift(t22, N).entries;
    const Matrix C = t12.at(N);
    const Matrix I = Matrix::Identity(N, N), Z = Matrix::Zero(N, N);
    const Matrix& W = m2.witness;
    const Matrix tW = apply_tau(SylvesterPair(A, B), W);
    Matrix T(3 * N, 3 * N), P(3 * N, 3 * N);
    T << A, I, Z, Z, A, C, Z, Z, B;
    P << I, Z, -W, Z, I, tW, Z, Z, Z;
    const double res = std::max((T * P - P * T).norm(), (P * P - P).norm()) / T.norm();
    rep.splitting_residual = res;
    rep.splitting = P;
    if (res <= kSplitTol) {
      rep.verdict = SIVerdict::reducible;
      rep.note = "reducible for this criterion: tau squared reaches T_12 and the idempotent commutes with T";
    } else {
      rep.verdict = SIVerdict::inconclusive;
      rep.note = "tau squared witness found but the idempotent does not commute to tolerance";
    }
  } else {
    rep.verdict = SIVerdict::inconclusive;
    rep.note = "second-power membership is inconclusive";
  }
  rep.memberships.push_back({0, 1, std::move(m1)});
  rep.memberships.push_back({0, 2, std::move(m2)});
  return rep;
}

KerRanReport property_h_diagnostic(const PairBuilder& builder, std::span<const Index> ladder,
                                   const MembershipThresholds& t) {
  return ker_ran_intersection_diagnostic(builder, ladder, t);
}

KerRanReport property_h_diagnostic(const WeightSequence& a, const WeightSequence& b, std::span<const Index> ladder,
                                   const MembershipThresholds& t) {
  return property_h_diagnostic(
      [&](Index N) { return SylvesterPair(truncate_shift(a, N).entries, truncate_shift(b, N).entries); }, ladder, t);
}

RatioDivergence ratio_divergence_criterion(const WeightSequence& a, const WeightSequence& b, Index N,
                                           TrendThresholds thresholds) {
  if (N < 8) throw Error("ratio_divergence_criterion: N must be at least 8");
  const auto rho = ratio_sequence(a, b, N);
  RatioDivergence r;
  std::vector<double> x, y;
  for (Index n = 1; n <= N; ++n) {
    const double v = std::log(double(n)) + rho[static_cast<std::size_t>(n)];
    r.log_values.push_back(v);
    if (n >= (N + 1) / 2) {
      x.push_back(std::log(double(n)));
      y.push_back(v);
    }
  }
  const auto fit = fit_line(x, y);
  r.slope = fit.slope;
  r.r_squared = fit.r_squared;
  r.diverging = fit.slope >= thresholds.slope && fit.r_squared >= thresholds.r_squared;
  const auto la = asymptotics(a), lb = asymptotics(b);
  for (double d : {lb.quadratic - la.quadratic, lb.linear - la.linear, lb.logarithmic - la.logarithmic + 1.0}) {
    if (d != 0.0) {
      r.analytic_diverging = d > 0;
      break;
    }
  }
  return r;
}

std::vector<std::string> gallery_names() { return {"shift-plus-identity", "generic-atom", "invertible-Z"}; }

namespace {

IntertwiningCheck relation(std::string name, const Matrix& lhs, const Matrix& rhs) {
  IntertwiningCheck c;
  c.relation = std::move(name);
  const double scale = lhs.norm();
  c.residual = (lhs - rhs).norm() / (scale > 0 ? scale : 1.0);
  c.passed = c.residual <= kGalleryTol;
  return c;
}

Matrix shift_plus_identity(Index N) {
  return Matrix::Identity(N, N) + truncate_shift(WeightSequence::constant(1.0), N).entries;
}

FlagSpec custom2(std::function<Matrix(Index)> d1, std::function<Matrix(Index)> d2, std::function<Matrix(Index)> s,
                 const std::string& label) {
  FlagSpec spec;
  spec.n = 2;
  spec.diagonals = {BlockSource::generated(d1, label + " T11"), BlockSource::generated(d2, label + " T22")};
  spec.superdiagonal = CustomSuperdiagonal{{BlockSource::generated(s, label + " T12")}};
  return spec;
}

}  // namespace

GalleryReport gallery_example(const std::string& name, Index N, std::span<const Index> ladder,
                              const MembershipThresholds& t) {
  if (N < 4) throw Error("gallery_example: N must be at least 4");
  GalleryReport rep;
  rep.name = name;
  rep.N = N;
  const Matrix I = Matrix::Identity(N, N), Z = Matrix::Zero(N, N);
  bool extra_ok = true;

  if (name == "shift-plus-identity") {
    const Matrix A = shift_plus_identity(N);
    const Matrix T = stack2(A, I, Z, A), Tt = stack2(A, A, Z, A);
    const Matrix X = block_diagonal({I, A}), Y = block_diagonal({A * A, A});
    rep.checks.push_back(relation("T X = X T~", T * X, X * Tt));
    rep.checks.push_back(relation("Y T = T~ Y", Y * T, Tt * Y));

    auto growth = range_membership(
        [](Index n) {
          const Matrix An = shift_plus_identity(n);
          return MembershipProblem{SylvesterPair(An, An), An};
        },
        ladder, 1, t);
    for (const auto& r : growth.ladder) extra_ok = extra_ok && r.converged && r.wnorm >= 0.5 * double(r.N);
    rep.growth = std::move(growth);

    const auto id = [](Index n) { return Matrix(Matrix::Identity(n, n)); };
    rep.si_T = si_test_2x2(custom2(shift_plus_identity, shift_plus_identity, id, "T"), ladder, t).verdict;
    rep.si_T_tilde =
        si_test_2x2(custom2(shift_plus_identity, shift_plus_identity, shift_plus_identity, "T~"), ladder, t).verdict;
    rep.property_h = property_h_diagnostic(
                         [](Index n) { return SylvesterPair(shift_plus_identity(n), shift_plus_identity(n)); },
                         ladder, t)
                         .property_h;
    rep.transported_si = *rep.si_T_tilde == SIVerdict::si_evidence && *rep.property_h;
    if (*rep.transported_si) extra_ok = extra_ok && *rep.si_T == SIVerdict::si_evidence;
  } else if (name == "generic-atom") {
    const Matrix A = I + truncate_shift(WeightSequence::kernel_power(2.0), N).entries;
    const Matrix T1 = stack2(A, I, Z, A), T2 = stack2(A, A, Z, A);
    const Matrix X = block_diagonal({I, A}), Y = block_diagonal({A * A, A});
    rep.checks.push_back(relation("T1 X = X T2", T1 * X, X * T2));
    rep.checks.push_back(relation("Y T1 = T2 Y", Y * T1, T2 * Y));
  } else if (name == "invertible-Z") {
    const Matrix S = truncate_shift(WeightSequence::constant(1.0), N).entries;
    const Matrix C = I + S;  // T~_12; the original T_12 is Z = I
    const Matrix T = stack2(S, I, Z, S), Tt = stack2(S, C, Z, S);
    const Matrix X = block_diagonal({C, I}), Y = block_diagonal({I, C});
    rep.checks.push_back(relation("X T = T~ X", X * T, Tt * X));
    rep.checks.push_back(relation("T Y = Y T~", T * Y, Y * Tt));
  } else {
    throw Error("unknown gallery example '" + name + "'");
  }
  rep.passed = extra_ok && std::all_of(rep.checks.begin(), rep.checks.end(),
                                       [](const IntertwiningCheck& c) { return c.passed; });
  return rep;
}

}  // namespace flagop
