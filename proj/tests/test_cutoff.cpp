#include <gtest/gtest.h>

#include <cmath>

#include "addtwist/cutoff.hpp"

using namespace addtwist;

TEST(Cutoff, IndicatorMellin) {
  const auto ind = indicator_unit();
  EXPECT_NEAR(std::abs(mellin(ind, 2.0) - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(mellin(ind, 2.0, 1) + 0.25), 0, 1e-15);
  EXPECT_NEAR(std::abs(mellin(ind, 2.0, 2) - 0.25), 0, 1e-15);
  EXPECT_NEAR(std::abs(plateau_mellin(0.5, cplx(1, 1), 0) - std::pow(0.5, cplx(1, 1)) / cplx(1, 1)), 0, 1e-15);
  EXPECT_THROW(mellin(ind, cplx(0, 3)), std::domain_error);
  EXPECT_THROW(mellin(ind, 1.0, -1), std::invalid_argument);
}

TEST(Cutoff, BumpMellinReferenceValues) {
  // mpmath quadrature at 30 digits
  const auto psi = bump_test_function();
  EXPECT_NEAR(mellin(psi, 1.0).real(), 0.443993816168079437823, 1e-13);
  const cplx v = mellin(psi, cplx(2, 3));
  EXPECT_NEAR(v.real(), 0.228166697733118561234, 1e-12);
  EXPECT_NEAR(v.imag(), 0.128106927154715189835, 1e-12);
  EXPECT_NEAR(bump_normalization(), 0.443993816168079437823, 1e-13);
}

TEST(Cutoff, BumpMellinDecays) {
  // t^3 |psihat(1 + it)| stays bounded and the decay is faster than any power
  const auto psi = bump_test_function();
  auto scaled = [&](double t) { return std::abs(mellin(psi, cplx(1, t))) * t * t * t; };
  for (double t : {10.0, 40.0, 160.0, 640.0}) EXPECT_LT(scaled(t), 100.0) << t;
  EXPECT_LT(scaled(640) * 16, scaled(320));
}

TEST(Cutoff, MellinInversion) {
  // psi(y) = (1/pi) Re int_0^inf psihat(1 + it) y^{-1-it} dt
  const auto psi = bump_test_function();
  const auto& rule = gauss_legendre(16);
  for (double y : {0.5, 1.5}) {
    double acc = 0;
    for (double t0 = 0; t0 < 800; t0 += 4) {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = t0 + 2.0 + 2.0 * rule.nodes[i];
        const cplx s(1, t);
        acc += 2.0 * rule.weights[i] * (mellin(psi, s, 0, 1e-11) * std::exp(-s * std::log(y))).real();
      }
    }
    EXPECT_NEAR(acc / kPi, psi(y), 1e-6) << y;
  }
}

TEST(Cutoff, MollifierShape) {
  for (double delta : {0.05, 0.2, 0.45}) {
    const auto up = mollifier(delta, 1), down = mollifier(delta, -1);
    EXPECT_EQ(up(1.0), 1.0);
    EXPECT_EQ(up((1 + delta) / (1 - delta)), 0.0);
    EXPECT_EQ(down((1 - delta) / (1 + delta)), 1.0);
    EXPECT_EQ(down(1.0), 0.0);
    EXPECT_NEAR(up.plateau_end, 1.0, 1e-15);
    EXPECT_NEAR(down.support_end, 1.0, 1e-15);
    for (double y = 0.01; y < 2.5; y += 0.013) {
      const double ind = y <= 1 ? 1.0 : 0.0;
      EXPECT_LE(down(y), ind + 1e-15);
      EXPECT_GE(up(y), ind - 1e-15);
      EXPECT_GE(down(y), 0.0);
      EXPECT_LE(up(y), 1.0);
    }
  }
  EXPECT_THROW(mollifier(0.5, 1), std::invalid_argument);
  EXPECT_THROW(mollifier(0.0, 1), std::invalid_argument);
  EXPECT_THROW(mollifier(0.1, 0), std::invalid_argument);
  EXPECT_THROW(bump_test_function()(-1.0), std::domain_error);
}

TEST(Cutoff, BumpCdf) {
  EXPECT_EQ(bump_cdf(-2), 0.0);
  EXPECT_EQ(bump_cdf(1.5), 1.0);
  EXPECT_NEAR(bump_cdf(0.0), 0.5, 1e-14);
  EXPECT_NEAR(bump_cdf(0.3) + bump_cdf(-0.3), 1.0, 1e-14);
  // Phi' = phi
  EXPECT_NEAR((bump_cdf(0.2 + 1e-5) - bump_cdf(0.2 - 1e-5)) / 2e-5, bump(0.2), 1e-8);
}

TEST(Cutoff, SandwichOfSmoothAndSharpSums) {
  const auto p = zeta2_problem();
  for (double X : {100.0, 1000.0}) {
    const double sharp = sharp_sum(p, X);
    for (double delta : {0.1, 0.3}) {
      EXPECT_LE(smooth_sum(p, mollifier(delta, -1), X), sharp);
      EXPECT_GE(smooth_sum(p, mollifier(delta, 1), X), sharp);
    }
  }
}

TEST(Cutoff, SmoothSumsMatchMainTerms) {
  // psihat is entire for the bump, so only the poles contribute and the
  // remainder is O(X^-N)
  const auto psi = bump_test_function();
  for (double X : {300.0, 3000.0, 30000.0}) {
    const double z1 = smooth_sum(zeta_problem(), psi, X) - smooth_main_term(zeta_problem(), psi, X).real();
    EXPECT_LT(std::abs(z1), 1e-15 * X * X) << X;
  }
  auto z2 = [&](double X) {
    return std::abs(smooth_sum(zeta2_problem(), psi, X) - smooth_main_term(zeta2_problem(), psi, X).real());
  };
  EXPECT_LT(z2(300), 1e-3);
  EXPECT_LT(z2(3000), 1e-5);
  EXPECT_LT(z2(30000), 1e-9);
}

TEST(Cutoff, SharpSums) {
  EXPECT_EQ(sharp_sum(zeta2_problem(), 100), 482.0);
  EXPECT_EQ(sharp_sum(zeta_problem(), 100.5), 100.0);
  for (double X : {10.5, 1000.0, 12345.6}) {
    const auto est = sharp_cutoff_estimate(zeta_problem(), X);
    EXPECT_LE(std::abs(sharp_sum(zeta_problem(), X) - est.main.real()), 1.0) << X;
  }
  // Dirichlet: sum_{n <= X} d(n) = X log X + (2 gamma - 1) X + O(sqrt X)
  const auto est = sharp_cutoff_estimate(zeta2_problem(), 1e4);
  ASSERT_EQ(est.polynomial.size(), 2u);
  EXPECT_NEAR(est.polynomial[0].real(), 2 * kEulerGamma - 1, 1e-15);
  EXPECT_NEAR(est.polynomial[1].real(), 1.0, 1e-15);
  EXPECT_LT(std::abs(sharp_sum(zeta2_problem(), 1e4) - est.main.real()), 4 * std::sqrt(1e4));
  EXPECT_NEAR(est.exponent, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(est.delta, std::pow(1e4, -1.0 / 3.0), 1e-15);
}

TEST(Cutoff, MomentProblemExponent) {
  const auto p = moment_problem(1, 0.38, kPi / 3);
  EXPECT_NEAR(sharp_cutoff_estimate(p, 100).exponent, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.poles[0].b[1], 4 * 0.38 / (kPi * kPi / 3), 1e-15);
  EXPECT_THROW(moment_problem(1, 1, 1, {1.0}, {}), std::invalid_argument);
  const auto q = moment_problem(2, 0.5, 1.0, {1.0, 2.0}, {3.0, 5.0});
  EXPECT_EQ(sharp_sum(q, 4), 1.0);
  EXPECT_EQ(smooth_moment({1.0, 2.0}, {3.0, 5.0}, indicator_unit(), 4, 2), 1.0);
  EXPECT_THROW(smooth_moment({1.0}, {}, indicator_unit(), 4, 1), std::invalid_argument);
}

TEST(Cutoff, EmptyPolesAndSignedCoefficients) {
  auto p = zeta_problem();
  p.poles.clear();
  EXPECT_EQ(smooth_main_term(p, bump_test_function(), 100), cplx(0));
  EXPECT_THROW(sharp_cutoff_estimate(p, 100), std::invalid_argument);
  auto s = zeta_problem();
  s.nonnegative = false;
  EXPECT_THROW(sharp_cutoff_estimate(s, 100), std::invalid_argument);
  EXPECT_NO_THROW(sharp_cutoff_estimate(s, 100, true));
}

TEST(Cutoff, FixtureRoundTrip) {
  const auto p = zeta2_problem();
  const auto back = parse_cutoff_problem(write_cutoff_problem(p));
  EXPECT_EQ(back.name, "zeta2");
  EXPECT_EQ(back.coefficients, "divisor");
  ASSERT_EQ(back.poles.size(), 1u);
  EXPECT_EQ(back.poles[0].b, p.poles[0].b);
  EXPECT_EQ(back.sigma0, 1.0);
  EXPECT_EQ(sharp_sum(back, 100), 482.0);
  EXPECT_THROW(write_cutoff_problem(moment_problem(1, 1, 1)), std::invalid_argument);
}

TEST(Cutoff, FixtureErrors) {
  EXPECT_THROW(parse_cutoff_problem("name x\n"), std::invalid_argument);
  EXPECT_THROW(parse_cutoff_problem("coefficients primes\n"), std::invalid_argument);
  EXPECT_THROW(parse_cutoff_problem("coefficients one\ncolour red\n"), std::invalid_argument);
  EXPECT_THROW(parse_cutoff_problem("coefficients one\npole 1 0 2 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_cutoff_problem("coefficients one\nsigma0\n"), std::invalid_argument);
  // poles out of order, and a floor right of a pole
  EXPECT_THROW(parse_cutoff_problem("coefficients one\npole 0.5 0 1 1\npole 1 0 1 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_cutoff_problem("coefficients one\na 1.5\npole 1 0 1 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_cutoff_problem("coefficients one\nsigma0 2\npole 1 0 1 1\n"), std::invalid_argument);
  const auto ok = parse_cutoff_problem("# zeta\ncoefficients one\npole 1 0 1 1  # residue 1\n");
  EXPECT_EQ(ok.poles.size(), 1u);
}
