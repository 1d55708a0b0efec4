#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "addtwist/core/arith.hpp"
#include "addtwist/core/numeric.hpp"
#include "addtwist/core/parallel.hpp"

using namespace addtwist;

TEST(Numeric, NeumaierSumRecoversCancellation) {
  NeumaierSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(Numeric, GammaMatchesReference) {
  // reference values from mpmath at 30 digits
  const cplx g = gamma(cplx(3.7, 2.2));
  EXPECT_NEAR(g.real(), -1.8850260130418728658, 1e-13);
  EXPECT_NEAR(g.imag(), 0.84979094159458942350, 1e-13);
  EXPECT_NEAR(gamma(cplx(5, 0)).real(), 24.0, 1e-12);
}

TEST(Numeric, UpperGammaMatchesReference) {
  struct Case {
    cplx s;
    double x;
    cplx want;
  };
  const Case cases[] = {
      {{2, 1}, 1.5, {0.28889947085002149640, 0.42964732110111136592}},
      {{6.5, -0.3}, 12, {6.3608590343832500952, -6.3069335076604014837}},
      {{0.5, 0}, 1, {0.27880558528066197650, 0}},
      {{0.3, 2}, 0.2, {0.057207488838806222380, -0.33664717714830373582}},
  };
  for (const auto& c : cases) {
    const cplx got = upper_gamma(c.s, c.x);
    EXPECT_NEAR(std::abs(got - c.want) / std::abs(c.want), 0.0, 1e-12) << c.s << " " << c.x;
  }
}

TEST(Numeric, UpperGammaIntegerIsElementary) {
  // Gamma(3, 2) = 2! e^{-2} (1 + 2 + 2^2/2)
  EXPECT_NEAR(upper_gamma_int(3, 2.0), 10.0 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(upper_gamma(3.0, 2.0), 10.0 * std::exp(-2.0), 1e-13);
  for (double x : {0.1, 1.0, 7.5, 40.0})
    EXPECT_NEAR(upper_gamma_int(6, x) / upper_gamma(6.0, x), 1.0, 1e-12) << x;
}

TEST(Numeric, GaussLegendreIsExactForPolynomials) {
  const auto& r = gauss_legendre(10);
  double s = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 18);
  EXPECT_NEAR(s, 2.0 / 19.0, 1e-15);
}

TEST(Numeric, AdaptiveQuadrature) {
  const auto r = integrate_adaptive([](double x) { return std::exp(-x * x); }, -6.0, 6.0, 1e-14);
  EXPECT_NEAR(r.value, std::sqrt(kPi), 1e-13);
  const auto c = integrate_adaptive([](double x) { return std::exp(cplx(0, x)); }, 0.0, kPi, 1e-14);
  EXPECT_NEAR(std::abs(c.value - cplx(0, 2)), 0.0, 1e-13);
}

TEST(Arith, ModularInverseAndGcd) {
  EXPECT_EQ(mod_inverse(3, 7), 5);
  EXPECT_EQ(mod_inverse(-3, 7), 2);
  EXPECT_THROW(mod_inverse(4, 8), std::invalid_argument);
  EXPECT_EQ(floor_mod(-13, 5), 2);
}

TEST(Arith, MultiplicativeFunctionsAgainstBruteForce) {
  for (i64 n = 1; n <= 300; ++n) {
    i64 phi = 0, d = 0;
    for (i64 a = 1; a <= n; ++a) {
      if (std::gcd(a, n) == 1) ++phi;
      if (n % a == 0) ++d;
    }
    EXPECT_EQ(euler_phi(n), phi) << n;
    EXPECT_EQ(i64(divisors(n).size()), d) << n;
  }
  EXPECT_EQ(mobius(30), -1);
  EXPECT_EQ(mobius(12), 0);
  EXPECT_EQ(gamma0_index(11), 12);
  EXPECT_EQ(gamma0_index(12), 24);
}

TEST(Arith, CompleteColumnGivesDeterminantOne) {
  for (i64 c = 1; c <= 40; ++c)
    for (i64 a = -c; a <= c; ++a) {
      if (std::gcd(a, c) != 1) continue;
      const Mat2 g = complete_column(a, c);
      EXPECT_EQ(g.det(), 1);
      EXPECT_EQ(g.a, a);
      EXPECT_EQ(g.c, c);
    }
}

TEST(Parallel, CoversEveryIndexOnceAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
