#include "flagop/json_io.hpp"
#include "flagop/quasisim.hpp"
#include "flagop/rkhs.hpp"
#include "flagop/sweep.hpp"

#include <doctest.h>

#include <cmath>

using namespace flagop;

TEST_CASE("power kernel coefficients") {
  for (double a : kernel_coefficients(1, 20)) CHECK(a == doctest::Approx(1.0).epsilon(1e-14));
  const auto two = kernel_coefficients(2, 20);
  for (Index n = 0; n <= 20; ++n) CHECK(two[n] == doctest::Approx(n + 1.0).epsilon(1e-13));
  CHECK(kernel_coefficients(3, 2)[2] == doctest::Approx(6.0).epsilon(1e-14));
  CHECK_THROWS(kernel_coefficients(0, 4));
  CHECK_THROWS(kernel_coefficients(-1, 4));
  CHECK_THROWS(DiagonalKernel::power(0));

  const auto k = DiagonalKernel::power(2.7);
  CHECK(k.coefficient(0) == 1.0);
  for (Index n = 0; n < 60; ++n)
    CHECK(k.coefficient(n + 1) / k.coefficient(n) == doctest::Approx((2.7 + n) / (n + 1.0)).epsilon(1e-12));
}

TEST_CASE("shifts realized by kernels") {
  const auto one = shift_from_kernel(DiagonalKernel::power(1));
  for (Index n = 0; n < 30; ++n) CHECK(one.weight(n) == 1.0);
  const auto two = shift_from_kernel(DiagonalKernel::power(2));
  for (Index n = 0; n < 30; ++n) CHECK(two.weight(n) == doctest::Approx(std::sqrt((n + 1.0) / (n + 2.0))));

  for (double lam : {0.5, 1.0, 2.0, 3.3}) {
    const auto s = shift_from_kernel(DiagonalKernel::power(lam));
    const auto direct = WeightSequence::kernel_power(lam);
    for (Index n = 0; n < 40; ++n) CHECK(s.weight(n) == direct.weight(n));
    const auto b = beta(s, 40);
    const auto a = kernel_coefficients(lam, 40);
    for (Index l = 0; l <= 40; ++l) CHECK(b.beta(l) == doctest::Approx(std::sqrt(1.0 / a[l])).epsilon(1e-12));
  }

  const auto ex = shift_from_kernel(DiagonalKernel::explicit_list({1.0, 4.0, 9.0}));
  CHECK(ex.weight(0) == doctest::Approx(0.5));
  CHECK(ex.weight(1) == doctest::Approx(2.0 / 3.0));
  CHECK(ex.weight(5) == 1.0);
}

TEST_CASE("three-block kernel example") {
  const auto p = [](double l) { return DiagonalKernel::power(l); };
  const auto flat = build_example_3x3({p(1), p(1), p(1)}, {0.0}, 8);
  CHECK(is_of_form(flat.spec));
  const auto T = assemble(flat.spec, 8);
  CHECK(T.block(0, 1) == Matrix::Identity(8, 8));
  CHECK(T.block(1, 2) == Matrix::Identity(8, 8));

  const auto ex = build_example_3x3({p(1), p(2), p(3)}, {0.0, 1.0}, 16);
  const auto A = assemble(ex.spec, 16);
  for (Index l = 0; l < 16; ++l) CHECK(A.block(0, 1)(l, l) == doctest::Approx(std::sqrt(1.0 / (l + 1.0))));
  CHECK(validate_flag(ex.spec, 16).passed());

  Rng rng(31);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> phi{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const auto e = build_example_3x3({p(1), p(2.5), p(4)}, phi, 24);
    const auto c = check_condition_a(e.spec, 24);
    CHECK(c.passed);
    CHECK(c.max_deviation <= 1e-12);
  }
}

TEST_CASE("kernel evaluation") {
  const auto one = kernel_eval(DiagonalKernel::power(1), 0.5, 64);
  CHECK(std::abs(one.value - 2.0) <= 1e-9);
  CHECK(one.tail_bound <= 1e-9);
  CHECK(std::abs(kernel_eval(DiagonalKernel::power(2), 0.5, 64).value - 4.0) <= 1e-8);
  CHECK(kernel_eval(DiagonalKernel::power(3.5), 0.0, 10).value == 1.0);
  CHECK(kernel_eval(DiagonalKernel::explicit_list({1.0, 7.0}), 0.0, 10).value == 1.0);
  // the bound covers the true remainder
  const auto three = kernel_eval(DiagonalKernel::power(3), 0.7, 40);
  CHECK(std::abs(three.value - 1.0 / std::pow(0.3, 3)) <= three.tail_bound);
  CHECK_THROWS(kernel_eval(DiagonalKernel::power(1), 1.0, 10));
}

TEST_CASE("reproducing consistency") {
  Rng rng(32);
  const auto k = DiagonalKernel::power(2.5);
  const Index N = 200;
  for (int t = 0; t < 10; ++t) {
    const double w = uniform(rng, -0.8, 0.8), z = uniform(rng, -0.8, 0.8);
    double inner = 0.0;
    for (Index l = 0; l <= N; ++l) inner += k.coefficient(l) * std::pow(w * z, static_cast<double>(l));
    const auto v = kernel_eval(k, w * z, N);
    CHECK(std::abs(inner - v.value) <= v.tail_bound + 1e-12 * std::abs(v.value));
  }
}

TEST_CASE("kernel relations") {
  const auto p = [](double l) { return DiagonalKernel::power(l); };
  const auto ex = build_example_3x3({p(1), p(2), p(3)}, {0.0, 1.0}, 64);
  const std::vector<double> samples{0.0, 0.3, 0.5};
  const auto rep = verify_kernel_relations(ex, samples, 64, 1e-8);
  CHECK(rep.passed);
  REQUIRE(rep.samples.size() == 3);
  CHECK(rep.samples[0].max_error == 0.0);

  // T13 K3 = w K1 for phi(w) = w
  const Index N = 64;
  const auto T = assemble(ex.spec, N);
  const double w = 0.5;
  Vector k1(N), k3(N);
  const auto a1 = kernel_coefficients(1, N), a3 = kernel_coefficients(3, N);
  for (Index l = 0; l < N; ++l) {
    k1(l) = std::sqrt(a1[l]) * std::pow(w, static_cast<double>(l));
    k3(l) = std::sqrt(a3[l]) * std::pow(w, static_cast<double>(l));
  }
  const Vector lhs = T.block(0, 2) * k3;
  CHECK((lhs - 0.5 * k1).head(N - 4).norm() <= 1e-8);

  const std::vector<double> edge{0.95};
  CHECK_THROWS_WITH(verify_kernel_relations(ex, edge, 64), doctest::Contains("0.9"));
  const std::vector<double> needs_more{0.85};
  CHECK_THROWS_WITH(verify_kernel_relations(ex, needs_more, 64), doctest::Contains("N"));
}

TEST_CASE("homogeneous pairs") {
  const auto same = homogeneous_pair_check(1.0, 1.0, 32);
  CHECK(same.verdict == CertificateVerdict::certified_on_horizon);
  REQUIRE(same.certificate.has_value());
  const Matrix& X = same.certificate->X.data();
  CHECK(X == Matrix::Identity(X.rows(), X.cols()));

  CHECK(homogeneous_pair_check(1.0, 2.0, 32).verdict == CertificateVerdict::refuted);

  // bounded on the horizon while the closed-form ratio still tends to zero
  const auto near = homogeneous_pair_check(1.0, 1.0 + 1e-12, 64);
  CHECK(near.verdict == CertificateVerdict::certified_on_horizon);
  for (const auto& b : near.blocks) {
    CHECK(b.shields.verdict == ShieldsVerdict::bounded_on_horizon);
    CHECK(std::abs(b.shields.slope) < 1e-9);
    CHECK(b.analytic_limit == ShieldsVerdict::vanishing);
  }
}

TEST_CASE("kernel JSON") {
  for (const auto& k : {DiagonalKernel::power(2).with_label("K2"), DiagonalKernel::explicit_list({1, 2, 5})})
    CHECK(kernel_from_json(to_json(k)) == k);
  CHECK_THROWS_AS(kernel_from_json(Json::parse(R"({"kind": "power", "lambda": -1})")), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(Json::parse(R"({"kind": "power", "lambda": 1, "list": [1]})")), ConfigError);
}
