#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "addtwist/stats.hpp"

using namespace addtwist;

namespace {

std::vector<TwistSample> synthetic(double X, std::function<cplx(const TwistPoint&)> value) {
  std::vector<TwistSample> out;
  for (const auto& p : enumerate({1, Orbit::Infinity, X})) out.push_back({p, value(p), 0, 0});
  return out;
}

}  // namespace

TEST(Stats, MomentSumSmallCase) {
  const std::vector<cplx> v{1.0, cplx(0, 2)};
  EXPECT_EQ(moment_sum(v, 1, 1), cplx(5));
  EXPECT_EQ(moment_sum(v, 2, 0), cplx(-3));
  EXPECT_EQ(moment_sum(v, 0, 0), cplx(2));
  EXPECT_THROW(moment_sum(v, 5, 4), std::invalid_argument);
  EXPECT_THROW(moment_sum(v, -1, 0), std::invalid_argument);
}

TEST(Stats, ConjugateSymmetry) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<cplx> v;
  for (int i = 0; i < 300; ++i) v.emplace_back(g(rng), g(rng));
  for (int m = 0; m <= 4; ++m)
    for (int n = 0; n + m <= 8; ++n) {
      EXPECT_EQ(moment_sum(v, m, n), std::conj(moment_sum(v, n, m))) << m << n;
      if (m == n) {
        EXPECT_EQ(moment_sum(v, m, n).imag(), 0.0);
      }
    }
}

TEST(Stats, SyntheticGaussianMoments) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  const double C = 0.7;
  const auto s = synthetic(180, [&](const TwistPoint& p) {
    return std::sqrt(C * std::log(p.c_r)) * cplx(g(rng), g(rng));
  });
  ASSERT_GT(s.size(), 9000u);
  const auto r = gaussian_report(s, C, 180);
  EXPECT_NEAR(r.mean_abs2, 2.0, 0.1);
  EXPECT_NEAR(r.mean_abs4, 8.0, 0.8);
  EXPECT_LT(r.ks_re, 0.03);
  EXPECT_LT(r.ks_im, 0.03);
  EXPECT_LT(r.mixed_ratio, 0.05);
  EXPECT_FALSE(r.degenerate);
  for (const auto& b : r.box_probs) EXPECT_NEAR(b.empirical, b.gaussian, 0.02);
}

TEST(Stats, DegenerateAndTooSmallInputs) {
  const auto zeros = synthetic(60, [](const TwistPoint&) { return cplx(0); });
  const auto r = gaussian_report(zeros, 1.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.ks_re, 1.0);
  const auto few = synthetic(10, [](const TwistPoint&) { return cplx(1); });
  EXPECT_THROW(gaussian_report(few, 1.0), std::invalid_argument);
}

TEST(Stats, LindelofFlagsPolynomialGrowth) {
  const auto grow = synthetic(256, [](const TwistPoint& p) { return cplx(std::pow(p.c_r, 0.5), 0); });
  EXPECT_TRUE(lindelof_scan(grow).growth_flagged);
  const auto tame = synthetic(256, [](const TwistPoint& p) { return cplx(std::sqrt(std::log(p.c_r)), 0); });
  const auto scan = lindelof_scan(tame);
  EXPECT_FALSE(scan.growth_flagged);
  // sqrt(log c) / c^0.1 still rises below c = e^5
  EXPECT_FALSE(scan.top3_nonincreasing.at(0.1));
  const auto flat = synthetic(256, [](const TwistPoint&) { return cplx(1); });
  EXPECT_TRUE(lindelof_scan(flat).top3_nonincreasing.at(0.1));
  EXPECT_EQ(scan.rows.front().lo, 2.0);
  std::size_t total = 0;
  for (const auto& row : scan.rows) total += row.count;
  EXPECT_EQ(total, tame.size());
}

TEST(Stats, DirichletPartialCountsTotients) {
  const auto ones = synthetic(50, [](const TwistPoint&) { return cplx(1); });
  double want = 0;
  for (i64 c = 2; c <= 40; ++c) want += double(euler_phi(c)) / std::pow(double(c), 4);
  EXPECT_NEAR(dirichlet_partial(ones, 0, 0, 2.0, 40).real(), want, 1e-15);
  EXPECT_NEAR(dirichlet_partial(ones, 1, 1, 2.0, 40).real(), want, 1e-15);
}

TEST(Stats, SlopeFitOfTheCountingFunction) {
  const auto ones = synthetic(400, [](const TwistPoint&) { return cplx(1); });
  const std::vector<double> grid{100, 200, 300, 400};
  const auto fit = slope_fit(ones, grid, 0, 1.0, 1, Orbit::Infinity);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(fit.M[i], double(count_points({1, Orbit::Infinity, grid[i]})));
  EXPECT_NEAR(fit.predicted_leading, 3 / (kPi * kPi), 1e-15);
  EXPECT_NEAR(fit.ratio, 1.0, 0.02);
  EXPECT_THROW(slope_fit(ones, {100, 200}, 1, 1.0, 1, Orbit::Infinity), std::invalid_argument);
  EXPECT_THROW(slope_fit(ones, {200, 100, 300}, 0, 1.0, 1, Orbit::Infinity), std::invalid_argument);
}

TEST(Stats, PredictedLeadingCoefficient) {
  // Infinity orbit: 2^n n! C^n / (pi vol); zero orbit with c <= X picks up a factor q
  EXPECT_NEAR(predicted_leading_coefficient(2, 0.5, 1, Orbit::Infinity, CutoffMode::PlainC), 2 * 3 / (kPi * kPi), 1e-14);
  const double inf11 = predicted_leading_coefficient(1, 0.3, 11, Orbit::Infinity, CutoffMode::PlainC);
  EXPECT_NEAR(predicted_leading_coefficient(1, 0.3, 11, Orbit::Zero, CutoffMode::PlainC), 11 * inf11, 1e-14);
  EXPECT_NEAR(predicted_leading_coefficient(1, 0.3, 11, Orbit::Zero, CutoffMode::ScaledC), inf11, 1e-14);
}

TEST(Stats, HistogramAndKs) {
  const auto h = histogram({-0.9, 0.1, 0.2, 0.99, 5.0}, -1, 1, 2);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].count, 1u);
  EXPECT_EQ(h[1].count, 3u);
  EXPECT_NE(histogram_csv(h).find("bin_center,count"), std::string::npos);
  EXPECT_THROW(histogram({}, 1, 1, 3), std::invalid_argument);
  EXPECT_NEAR(ks_statistic({0.0}), 0.5, 1e-15);
  EXPECT_EQ(ks_statistic({}), 1.0);
}
