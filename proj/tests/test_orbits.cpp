#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "addtwist/forms.hpp"
#include "addtwist/orbits.hpp"

using namespace addtwist;

TEST(Orbits, LevelOneSmallCutoff) {
  const auto pts = enumerate({1, Orbit::Infinity, 10});
  EXPECT_EQ(pts.size(), 31u);
  EXPECT_EQ(pts.front().a, 1);
  EXPECT_EQ(pts.front().c, 2);
  EXPECT_EQ(count_points({1, Orbit::Infinity, 10}), 31u);
  EXPECT_TRUE(enumerate({1, Orbit::Infinity, 1}).empty());
  EXPECT_THROW(enumerate({1, Orbit::Infinity, 0.5}), std::invalid_argument);
}

TEST(Orbits, EnumerationMatchesDoubleLoop) {
  for (int q : {1, 5, 11})
    for (Orbit o : {Orbit::Infinity, Orbit::Zero})
      for (CutoffMode mode : {CutoffMode::PlainC, CutoffMode::ScaledC}) {
        if (q == 1 && o == Orbit::Zero) continue;
        const double X = 90;
        std::set<std::pair<i64, i64>> want;
        for (i64 c = 2; c <= 90; ++c) {
          const double cr = o == Orbit::Zero && mode == CutoffMode::ScaledC ? c * std::sqrt(double(q)) : c;
          if (cr > X) continue;
          if (o == Orbit::Infinity ? c % q != 0 : std::gcd(c, i64(q)) != 1) continue;
          for (i64 a = 1; a < c; ++a)
            if (std::gcd(a, c) == 1) want.insert({c, a});
        }
        const auto pts = enumerate({q, o, X, mode});
        ASSERT_EQ(pts.size(), want.size()) << q;
        EXPECT_EQ(count_points({q, o, X, mode}), want.size());
        std::set<std::pair<i64, i64>> got;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          got.insert({pts[i].c, pts[i].a});
          if (i) {
            EXPECT_TRUE(point_less(pts[i - 1], pts[i]));
          }
        }
        EXPECT_EQ(got, want);
      }
}

TEST(Orbits, PointFieldsAndInverse) {
  const auto p = make_point(3, 22, Orbit::Infinity, 11);
  EXPECT_EQ(floor_mod(p.a * p.d_inv, p.c), 1);
  EXPECT_DOUBLE_EQ(p.c_r, 22);
  const auto z = make_point(-4, 7, Orbit::Zero, 11);
  EXPECT_EQ(z.a, 3);
  EXPECT_EQ(floor_mod(z.a * 11 * z.d_inv, 7), 1);
  EXPECT_NEAR(z.c_r, 7 * std::sqrt(11.0), 1e-12);
  EXPECT_EQ(make_point_auto(2, 33, 11).orbit, Orbit::Infinity);
  EXPECT_EQ(make_point_auto(2, 9, 11).orbit, Orbit::Zero);
  EXPECT_TRUE(make_point(5, 0, Orbit::Infinity, 1).is_infinity());
}

TEST(Orbits, RejectsBadPoints) {
  EXPECT_THROW(make_point(2, 4, Orbit::Infinity, 1), std::invalid_argument);
  EXPECT_THROW(make_point(1, 7, Orbit::Infinity, 11), std::invalid_argument);
  EXPECT_THROW(make_point(1, 22, Orbit::Zero, 11), std::invalid_argument);
  EXPECT_THROW(make_point(1, -3, Orbit::Infinity, 1), std::invalid_argument);
  EXPECT_THROW(make_point(1, 3, Orbit::Infinity, 0), std::invalid_argument);
  EXPECT_THROW(parse_orbit("cusp"), std::invalid_argument);
  EXPECT_EQ(parse_orbit("zero"), Orbit::Zero);
  EXPECT_EQ(to_string(Orbit::Infinity), "inf");
}

TEST(Orbits, DualPointIsAnInvolution) {
  for (int q : {1, 5, 11})
    for (Orbit o : {Orbit::Infinity, Orbit::Zero}) {
      if (q == 1 && o == Orbit::Zero) continue;
      for (const auto& p : enumerate({q, o, 60})) {
        const auto d = dual_point(p);
        EXPECT_EQ(d.c, p.c);
        EXPECT_EQ(dual_point(d), p);
      }
    }
}

TEST(Orbits, CountRatioApproachesOne) {
  // #T(X) ~ X^2 / (pi vol)
  const auto r = count_asymptotic_check(1, Orbit::Infinity, {1000, 4000});
  EXPECT_NEAR(r[1].ratio, 1.0, 5e-3);
  EXPECT_LT(std::abs(r[1].ratio - 1), std::abs(r[0].ratio - 1) + 1e-3);
  const auto z = count_asymptotic_check(11, Orbit::Infinity, {20000});
  EXPECT_NEAR(z[0].ratio, 1.0, 1e-2);
}
