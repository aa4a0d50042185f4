#include "flagop/irreducibility.hpp"
#include "flagop/sweep.hpp"

#include <doctest.h>

#include <cmath>

using namespace flagop;

namespace {

const std::vector<Index> kLadder{8, 16, 32};
const auto one = WeightSequence::constant(1.0);

Matrix shift(Index N) { return truncate_shift(one, N).entries; }

Matrix w0(Index N) {
  Rng rng(derive_seed(7, 1));
  return embed_corner(random_corner(rng, 4), N);
}

BlockSource tau_block(int p) {
  return BlockSource::generated([p](Index N) { return apply_tau_power(SylvesterPair(shift(N), shift(N)), w0(N), p); },
                                "tau(W0)");
}

BlockSource identity_block() {
  return BlockSource::generated([](Index N) { return Matrix(Matrix::Identity(N, N)); }, "I");
}

FlagSpec custom(std::vector<BlockSource> sup) {
  FlagSpec s;
  s.n = static_cast<int>(sup.size()) + 1;
  s.diagonals.assign(sup.size() + 1, one);
  s.superdiagonal = CustomSuperdiagonal{std::move(sup)};
  return s;
}

}  // namespace

TEST_CASE("two-block criterion") {
  const auto si = si_test_2x2(ratio_diagonal_spec({one, one}), kLadder);
  CHECK(si.verdict == SIVerdict::si_evidence);
  REQUIRE(si.memberships.size() == 1);
  CHECK(si.memberships[0].report.classification == Membership::not_in_range_residual);
  for (const auto& r : si.memberships[0].report.ladder) CHECK(std::abs(r.residual - 1.0) <= 1e-10);
  CHECK_FALSE(si.assumptions.empty());

  const auto red = si_test_2x2(custom({tau_block(1)}), kLadder);
  CHECK(red.verdict == SIVerdict::reducible);
  REQUIRE(red.splitting_residual.has_value());
  CHECK(*red.splitting_residual <= 1e-8);
  REQUIRE(red.splitting.has_value());

  const auto self = si_test_2x2(
      custom({BlockSource::generated([](Index N) { return shift(N); }, "T11")}), kLadder);
  CHECK(self.verdict == SIVerdict::si_evidence);
  CHECK(self.memberships[0].report.classification == Membership::not_in_range_unbounded);

  CHECK_THROWS(si_test_2x2(ratio_diagonal_spec({one, one, one}), kLadder));
}

TEST_CASE("the splitting block-diagonalizes") {
  const auto red = si_test_2x2(custom({tau_block(1)}), kLadder);
  REQUIRE(red.splitting.has_value());
  const Index N = kLadder.back();
  const Matrix T = assemble(custom({tau_block(1)}), N).data();
  const Matrix& X = *red.splitting;
  const Matrix C = X.inverse() * T * X;
  CHECK(C.topRightCorner(N, N).norm() <= 1e-8 * T.norm());
  CHECK(C.bottomLeftCorner(N, N).norm() <= 1e-8 * T.norm());
}

TEST_CASE("superdiagonal chain") {
  const auto three = si_test_nxn(ratio_diagonal_spec({one, one, one}), kLadder);
  CHECK(three.criterion == SICriterion::superdiagonal_chain);
  CHECK(three.verdict == SIVerdict::si_evidence);
  CHECK(three.memberships.size() == 2);

  const auto mixed = si_test_nxn(custom({identity_block(), tau_block(1)}), kLadder);
  CHECK(mixed.verdict == SIVerdict::inconclusive);
  CHECK_FALSE(mixed.note.empty());

  const auto two = si_test_nxn(ratio_diagonal_spec({one, one}), kLadder);
  const auto direct = si_test_2x2(ratio_diagonal_spec({one, one}), kLadder);
  CHECK(two.criterion == SICriterion::two_block);
  CHECK(two.verdict == direct.verdict);
  CHECK(two.memberships[0].report.ladder[2].residual == direct.memberships[0].report.ladder[2].residual);
}

TEST_CASE("tau-squared criterion") {
  const auto sq = si_test_jordan3(one, one, tau_block(2), kLadder);
  CHECK(sq.criterion == SICriterion::tau_squared);
  CHECK(sq.verdict == SIVerdict::reducible);
  bool p2 = false;
  for (const auto& m : sq.memberships)
    if (m.power == 2) p2 = m.report.classification == Membership::in_range;
  CHECK(p2);

  const auto id = si_test_jordan3(one, one, identity_block(), kLadder);
  CHECK(id.verdict == SIVerdict::inconclusive);
  REQUIRE_FALSE(id.memberships.empty());
  CHECK(id.memberships[0].report.classification == Membership::not_in_range_residual);

  // tau(E00): in range at p = 1 by construction
  const auto e00 = BlockSource::generated(
      [](Index N) {
        Matrix E = Matrix::Zero(N, N);
        E(0, 0) = 1.0;
        return apply_tau(SylvesterPair(shift(N), shift(N)), E);
      },
      "tau(E00)");
  const auto u = si_test_jordan3(one, one, e00, kLadder);
  REQUIRE_FALSE(u.memberships.empty());
  CHECK(u.memberships[0].report.classification == Membership::in_range);
  CHECK(u.verdict != SIVerdict::inconclusive);
}

TEST_CASE("Property (H)") {
  Matrix d1 = Matrix::Zero(3, 3), d2 = Matrix::Zero(3, 3);
  d1.diagonal() << 1, 2, 3;
  d2.diagonal() << 4, 5, 6;
  const std::vector<Index> small{3};
  const auto disjoint = property_h_diagnostic([&](Index) { return SylvesterPair(d1, d2); }, small);
  CHECK(disjoint.property_h);
  CHECK(disjoint.elements.empty());

  CHECK(property_h_diagnostic(one, WeightSequence::constant(2.0), kLadder).property_h);

  const auto same = property_h_diagnostic(one, one, kLadder);
  CHECK(same.property_h);
  for (const auto& e : same.elements) CHECK(e.membership.classification != Membership::in_range);
}

TEST_CASE("ratio divergence") {
  const auto k1 = WeightSequence::kernel_power(1), k2 = WeightSequence::kernel_power(2);
  const auto eq = ratio_divergence_criterion(k2, k2, 64);
  CHECK(eq.diverging);
  CHECK(eq.slope == doctest::Approx(1.0).epsilon(1e-6));
  for (Index n = 1; n <= 64; ++n) CHECK(eq.log_values[n - 1] == doctest::Approx(std::log(double(n))));

  const auto shrink = ratio_divergence_criterion(WeightSequence::constant(2.0), one, 64);
  CHECK_FALSE(shrink.diverging);
  CHECK_FALSE(shrink.analytic_diverging);

  const auto half = ratio_divergence_criterion(k1, k2, 256);
  CHECK(half.diverging);
  CHECK(half.analytic_diverging);
  CHECK(half.slope == doctest::Approx(0.5).epsilon(0.02));

  // the fitted verdict matches the closed form
  const std::vector<std::pair<WeightSequence, WeightSequence>> cases{
      {k1, k2}, {k2, k1}, {one, WeightSequence::constant(2.0)}, {WeightSequence::constant(3.0), one},
      {WeightSequence::geometric(1, 0.5), WeightSequence::geometric(1, 0.5)}};
  for (const auto& [a, b] : cases) {
    const auto r = ratio_divergence_criterion(a, b, 128);
    CHECK(r.diverging == r.analytic_diverging);
  }
}

TEST_CASE("gallery") {
  const std::vector<Index> ladder{8, 16, 32};
  for (const auto& name : gallery_names()) {
    const auto g = gallery_example(name, 16, ladder);
    CHECK(g.passed);
    for (const auto& c : g.checks) CHECK(c.residual <= kGalleryTol);
  }
  const auto spi = gallery_example("shift-plus-identity", 16, ladder);
  REQUIRE(spi.growth.has_value());
  for (const auto& r : spi.growth->ladder) CHECK(r.wnorm >= 0.5 * double(r.N));
  CHECK_THROWS(gallery_example("no-such-example", 16, ladder));
  CHECK_THROWS(gallery_example("invertible-Z", 3, ladder));
}

TEST_CASE("verdicts are stable under similarity and repeatable") {
  Rng rng(61);
  for (int t = 0; t < 3; ++t) {
    const auto p = random_bounded_pair(rng, 2, 4);
    CHECK(si_test_2x2(p.T, kLadder).verdict == si_test_2x2(p.T_tilde, kLadder).verdict);
  }
  const auto a = si_test_2x2(custom({tau_block(1)}), kLadder);
  const auto b = si_test_2x2(custom({tau_block(1)}), kLadder);
  CHECK(a.verdict == b.verdict);
  CHECK(*a.splitting_residual == *b.splitting_residual);
  CHECK(a.memberships[0].report.ladder[2].wnorm == b.memberships[0].report.ladder[2].wnorm);
}
