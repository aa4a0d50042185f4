#include "flagop/linalg.hpp"
#include "flagop/sweep.hpp"
#include "flagop/sylvester.hpp"
#include "flagop/weights.hpp"

#include <doctest.h>

#include <cmath>

using namespace flagop;

namespace {

const std::vector<Index> kLadder{8, 16, 32};

Matrix shift(Index N) { return truncate_shift(WeightSequence::constant(1), N).entries; }

Matrix random_matrix(Rng& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = uniform(rng, -1, 1);
  return m;
}

Matrix w0(Index N) {
  Rng rng(42);
  return embed_corner(random_corner(rng, 4), N);
}

MembershipReport shift_membership(const std::function<Matrix(const Matrix&, Index)>& target, int p = 1,
                                  MembershipThresholds t = {}) {
  return range_membership(
      [&](Index N) {
        const Matrix A = shift(N);
        return MembershipProblem{SylvesterPair(A, A), target(A, N)};
      },
      kLadder, p, t);
}

}  // namespace

TEST_CASE("tau application") {
  const Matrix A = shift(2);
  CHECK(apply_tau(SylvesterPair(A, A), Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(apply_tau(SylvesterPair(A, Matrix::Zero(2, 2)), Matrix::Identity(2, 2)) == A);

  Rng rng(1);
  const SylvesterPair p(random_matrix(rng, 4, 4), random_matrix(rng, 4, 4));
  const Matrix X = random_matrix(rng, 4, 4), Y = random_matrix(rng, 4, 4);
  CHECK((apply_tau(p, 2 * X + Y) - 2 * apply_tau(p, X) - apply_tau(p, Y)).norm() <= 1e-13);
  CHECK_THROWS_AS(apply_tau(p, Matrix::Zero(3, 4)), DimensionError);
  CHECK_THROWS_AS(SylvesterPair(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), DimensionError);
}

TEST_CASE("adjoint identity") {
  Rng rng(2);
  const SylvesterPair p(random_matrix(rng, 5, 5), random_matrix(rng, 3, 3));
  for (int t = 0; t < 5; ++t) {
    const Matrix X = random_matrix(rng, 5, 3), Y = random_matrix(rng, 5, 3);
    const double lhs = (apply_tau(p, X).array() * Y.array()).sum();
    const double rhs = (X.array() * apply_tau_adjoint(p, Y).array()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
  const Matrix X = random_matrix(rng, 5, 3);
  CHECK((matricize(p) * X.reshaped() - apply_tau(p, X).reshaped()).norm() <= 1e-13);
}

TEST_CASE("kernel bases") {
  const Matrix A = shift(2);
  const auto k = kernel_basis(SylvesterPair(A, A));
  REQUIRE(k.size() == 2);
  // span{I, A}: every element is a x I + b x A
  for (const auto& X : k) {
    CHECK(X(1, 0) == doctest::Approx(0.0));
    CHECK(X(0, 0) == doctest::Approx(X(1, 1)));
  }
  CHECK(std::abs((k[0].array() * k[1].array()).sum()) <= 1e-12);

  Matrix a(1, 1), b(1, 1);
  const auto two = kernel_basis(SylvesterPair(truncate_shift(WeightSequence::constant(0.7), 2).entries,
                                              truncate_shift(WeightSequence::constant(1.9), 2).entries));
  CHECK(two.size() == 2);

  Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Zero(2, 2);
  d1.diagonal() << 1, 2;
  d2.diagonal() << 3, 4;
  CHECK(kernel_basis(SylvesterPair(d1, d2)).empty());

  CHECK_THROWS_AS(kernel_vectors(SylvesterPair(Matrix::Zero(65, 65), Matrix::Zero(65, 65))), SizeCapError);
}

TEST_CASE("rank and nullity add up") {
  Rng rng(3);
  const auto a = random_weights(rng, 6, 0.5, 2), b = random_weights(rng, 6, 0.5, 2);
  const SylvesterPair p(truncate_shift(a, 6).entries, truncate_shift(b, 6).entries);
  const auto ns = kernel_vectors(p);
  CHECK(ns.rank + ns.basis.cols() == 36);
  CHECK(ns.basis.cols() == 6);
}

TEST_CASE("membership: identity is orthogonal to the range") {
  const auto r = shift_membership([](const Matrix&, Index N) { return Matrix(Matrix::Identity(N, N)); });
  CHECK(r.classification == Membership::not_in_range_residual);
  for (const auto& rec : r.ladder) CHECK(std::abs(rec.residual - 1.0) <= 1e-10);
}

TEST_CASE("membership: the shift itself needs unbounded solutions") {
  const auto r = shift_membership([](const Matrix& A, Index) { return A; });
  CHECK(r.classification == Membership::not_in_range_unbounded);
  for (const auto& rec : r.ladder) CHECK(rec.residual <= 1e-8);
  CHECK(r.ladder[1].wnorm / r.ladder[0].wnorm >= 1.8);
  CHECK(r.ladder[2].wnorm / r.ladder[1].wnorm >= 1.8);
}

TEST_CASE("membership: images of a fixed W are in range at every power") {
  for (int p : {1, 2}) {
    const auto r = shift_membership([p](const Matrix& A, Index N) { return apply_tau_power(SylvesterPair(A, A), w0(N), p); },
                                    p);
    CHECK(r.classification == Membership::in_range);
    for (const auto& rec : r.ladder) CHECK(rec.residual <= 1e-8);
  }
  // general pair
  Rng rng(4);
  const auto a = random_weights(rng, 40, 0.5, 2), b = random_weights(rng, 40, 0.5, 2);
  const auto r = range_membership(
      [&](Index N) {
        const SylvesterPair pair(truncate_shift(a, N).entries, truncate_shift(b, N).entries);
        return MembershipProblem{pair, apply_tau(pair, w0(N))};
      },
      kLadder, 1);
  CHECK(r.classification == Membership::in_range);
}

TEST_CASE("membership classification is scale invariant") {
  for (double c : {1e-3, 1.0, 250.0}) {
    CHECK(shift_membership([c](const Matrix& A, Index) { return Matrix(c * A); }).classification ==
          Membership::not_in_range_unbounded);
    CHECK(shift_membership([c](const Matrix&, Index N) { return Matrix(c * Matrix::Identity(N, N)); })
              .classification == Membership::not_in_range_residual);
  }
}

TEST_CASE("a stalled solve makes the ladder inconclusive") {
  MembershipThresholds t;
  t.max_iterations = 1;
  const auto r = shift_membership([](const Matrix& A, Index) { return A; }, 1, t);
  CHECK(r.classification == Membership::inconclusive);
  CHECK(r.ladder.size() == 3);
  CHECK_FALSE(r.ladder.back().converged);
}

TEST_CASE("ladders must increase") {
  const Matrix A = shift(4);
  const std::vector<Index> bad{16, 8};
  CHECK_THROWS_WITH(range_membership([&](Index N) { return MembershipProblem{SylvesterPair(shift(N), shift(N)), shift(N)}; },
                                     bad, 1),
                    doctest::Contains("ladder not increasing"));
}

TEST_CASE("classification rules") {
  MembershipThresholds t;
  auto rec = [](Index N, double res, double w) { return MembershipRecord{N, res, w, 1.0, true, 10}; };
  CHECK(classify({rec(8, 1e-9, 2), rec(16, 1e-9, 2.1), rec(32, 1e-9, 2.2)}, t) == Membership::in_range);
  CHECK(classify({rec(8, 1e-9, 2), rec(16, 1e-9, 5), rec(32, 1e-9, 9)}, t) == Membership::not_in_range_unbounded);
  CHECK(classify({rec(8, 0.5, 2), rec(16, 0.4, 5), rec(32, 0.3, 9)}, t) == Membership::not_in_range_residual);
  CHECK(classify({rec(8, 1e-3, 2), rec(16, 1e-4, 5), rec(32, 1e-5, 9)}, t) == Membership::inconclusive);
}

TEST_CASE("Property (H) diagnostics") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1, 2;
  const std::vector<Index> one{2};
  const auto diag = ker_ran_intersection_diagnostic([&](Index) { return SylvesterPair(d, d); }, one);
  CHECK(diag.property_h);
  CHECK(diag.elements.size() == 2);
  for (const auto& e : diag.elements) CHECK(e.membership.classification == Membership::not_in_range_residual);

  const auto sh = ker_ran_intersection_diagnostic([](Index N) { return SylvesterPair(shift(N), shift(N)); }, kLadder);
  CHECK(sh.property_h);
  CHECK(sh.elements.size() == 8);
  int residual = 0, unbounded = 0;
  for (const auto& e : sh.elements) {
    residual += e.membership.classification == Membership::not_in_range_residual;
    unbounded += e.membership.classification == Membership::not_in_range_unbounded;
  }
  CHECK(residual == 1);
  CHECK(unbounded == 7);

  const auto c1 = WeightSequence::constant(1), c2 = WeightSequence::constant(2);
  const auto growth = ker_ran_intersection_diagnostic(
      [&](Index N) { return SylvesterPair(truncate_shift(c1, N).entries, truncate_shift(c2, N).entries); }, kLadder);
  CHECK(growth.property_h);
}

TEST_CASE("intertwiner structure") {
  const auto c1 = WeightSequence::constant(1), c2 = WeightSequence::constant(2);
  const auto r = verify_intertwiner_structure(c1, c1, 4);
  CHECK(r.passed);
  CHECK(r.kernel_dim == 4);
  for (const auto& X : kernel_basis(SylvesterPair(shift(4), shift(4))))
    for (Index i = 1; i < 4; ++i)
      for (Index j = i; j < 4; ++j) CHECK(X(i, j) == doctest::Approx(X(i - 1, j - 1)).epsilon(1e-9));

  CHECK(verify_intertwiner_structure(c1, c2, 3).passed);
  const SylvesterPair p(truncate_shift(c1, 3).entries, truncate_shift(c2, 3).entries);
  for (const auto& X : kernel_basis(p)) {
    CHECK(X(1, 1) == doctest::Approx(2 * X(0, 0)).scale(1.0));
    CHECK(X(2, 2) == doctest::Approx(4 * X(0, 0)).scale(1.0));
  }

  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_weights(rng, 8, 0.5, 2.0), b = random_weights(rng, 8, 0.5, 2.0);
    const auto s = verify_intertwiner_structure(a, b, 8);
    CHECK(s.passed);
    CHECK(s.max_recursion_deviation <= 1e-8);
    CHECK(s.adjoint_kernel_dim == 8);
  }
}

TEST_CASE("quasi-nilpotency roots") {
  for (double x : quasinilpotency_diagnostic(Matrix::Zero(4, 4), 5).roots) CHECK(x == 0.0);
  for (double x : quasinilpotency_diagnostic(Matrix::Identity(4, 4), 5).roots) CHECK(x == doctest::Approx(1.0));
  const auto s = quasinilpotency_diagnostic(shift(16), 16);
  CHECK(s.roots.size() == 16);
  CHECK(s.trend == 0.0);
  CHECK_THROWS(quasinilpotency_diagnostic(shift(4), 1));
}
