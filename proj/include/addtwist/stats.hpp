#pragma once
// Moment sums over twist samples, normalization by (C_f log c_r)^{1/2},
// Gaussian diagnostics, log-polynomial slope fits and the dyadic max scan.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "addtwist/core/numeric.hpp"
#include "addtwist/forms.hpp"
#include "addtwist/orbits.hpp"
#include "addtwist/twist_eval.hpp"

namespace addtwist {

inline std::vector<cplx> sample_values(const std::vector<TwistSample>& s) {
  std::vector<cplx> v;
  v.reserve(s.size());
  for (const auto& x : s) v.push_back(x.value);
  return v;
}

/// x^m conj(x)^n, by repeated multiplication so that (n, m) is the exact conjugate of (m, n).
inline cplx mixed_power(cplx x, int m, int n) {
  const int common = std::min(m, n);
  const double r2 = std::norm(x);
  cplx out = 1.0;
  for (int i = 0; i < common; ++i) out *= r2;
  for (int i = common; i < m; ++i) out *= x;
  for (int i = common; i < n; ++i) out *= std::conj(x);
  return out;
}

/// sum_i v_i^m conj(v_i)^n with compensated summation.
inline cplx moment_sum(const std::vector<cplx>& values, int m, int n) {
  if (m < 0 || n < 0) throw std::invalid_argument("moment_sum: exponents must be nonnegative");
  if (m + n > 8) throw std::invalid_argument("moment_sum: m + n must not exceed 8");
  CompensatedSum<cplx> acc;
  for (const cplx& v : values) acc.add(mixed_power(v, m, n));
  return acc.value();
}

inline cplx moment_sum(const std::vector<TwistSample>& samples, int m, int n) {
  return moment_sum(sample_values(samples), m, n);
}

/// Cutoff coordinate of a sample: plain c, or c_r = c sqrt q on the scaled convention.
inline double cutoff_key(const TwistPoint& p, CutoffMode mode) {
  return mode == CutoffMode::ScaledC ? p.c_r : double(p.c);
}

/// L / (C_f log c_r)^{1/2} for samples with c_r > 2.
inline std::vector<cplx> normalized_values(const std::vector<TwistSample>& samples, double C_f) {
  if (!(C_f > 0)) throw std::invalid_argument("normalized_values: C_f must be positive");
  std::vector<cplx> out;
  for (const auto& s : samples)
    if (s.point.c_r > 2.0) out.push_back(s.value / std::sqrt(C_f * std::log(s.point.c_r)));
  return out;
}

// ---------------------------------------------------------------------------
// Slope fits

struct SlopeFit {
  int n = 0;
  std::vector<double> X;
  std::vector<double> M;       // M_{2n}(X) = sum |L|^{2n}
  std::vector<double> coeffs;  // beta_0 .. beta_n of M / X^2 = sum beta_i (log X)^i
  double residual = 0;         // rms relative misfit
  double predicted_leading = 0;
  double ratio = 0;            // coeffs[n] / predicted_leading
};

/// Leading coefficient of sum |L|^{2n} ~ lead X^2 (log X)^n.
/// Infinity orbit: 2^n n! C^n / (pi vol).  Zero orbit, plain c <= X: q (2C)^n n! / (pi vol);
/// with c_r <= X the factor q drops out.
inline double predicted_leading_coefficient(int n, double C_f, int q, Orbit orbit, CutoffMode mode) {
  const double base = std::pow(2.0 * C_f, n) * factorial(n) / (kPi * volume(q));
  if (orbit == Orbit::Zero && mode == CutoffMode::PlainC) return q * base;
  return base;
}

/// Least squares solution of the normal equations for a small dense system.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& A, const std::vector<double>& b) {
  const std::size_t p = A.front().size();
  std::vector<std::vector<double>> N(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < A.size(); ++r)
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) N[i][j] += A[r][i] * A[r][j];
      N[i][p] += A[r][i] * b[r];
    }
  for (std::size_t i = 0; i < p; ++i) {
    std::size_t piv = i;
    for (std::size_t r = i + 1; r < p; ++r)
      if (std::abs(N[r][i]) > std::abs(N[piv][i])) piv = r;
    std::swap(N[i], N[piv]);
    if (N[i][i] == 0) throw std::runtime_error("least_squares: singular system");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == i) continue;
      const double f = N[r][i] / N[i][i];
      for (std::size_t c = i; c <= p; ++c) N[r][c] -= f * N[i][c];
    }
  }
  std::vector<double> x(p);
  for (std::size_t i = 0; i < p; ++i) x[i] = N[i][p] / N[i][i];
  return x;
}

/**
 * Fits M_{2n}(X) / X^2 by a degree-n polynomial in log X over the grid and
 * compares the leading coefficient to its predicted value.  samples must
 * cover the largest X of the grid.
 */
inline SlopeFit slope_fit(const std::vector<TwistSample>& samples, const std::vector<double>& grid, int n,
                          double C_f, int q, Orbit orbit, CutoffMode mode = CutoffMode::PlainC) {
  if (n < 0) throw std::invalid_argument("slope_fit: n must be >= 0");
  if (grid.size() < std::size_t(n) + 2)
    throw std::invalid_argument("slope_fit: grid needs at least n + 2 = " + std::to_string(n + 2) + " points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("slope_fit: grid must be strictly increasing");
  SlopeFit fit;
  fit.n = n;
  fit.X = grid;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (double X : grid) {
    NeumaierSum acc;
    for (const auto& s : samples)
      if (cutoff_key(s.point, mode) <= X + 1e-9) acc.add(std::pow(std::norm(s.value), n));
    fit.M.push_back(acc.value());
    std::vector<double> row;
    for (int i = 0; i <= n; ++i) row.push_back(std::pow(std::log(X), i));
    A.push_back(row);
    b.push_back(acc.value() / (X * X));
  }
  fit.coeffs = least_squares(A, b);
  double ss = 0;
  for (std::size_t r = 0; r < A.size(); ++r) {
    double pred = 0;
    for (int i = 0; i <= n; ++i) pred += fit.coeffs[i] * A[r][i];
    const double rel = b[r] != 0 ? (pred - b[r]) / b[r] : pred;
    ss += rel * rel;
  }
  fit.residual = std::sqrt(ss / double(A.size()));
  fit.predicted_leading = predicted_leading_coefficient(n, C_f, q, orbit, mode);
  fit.ratio = fit.coeffs[n] / fit.predicted_leading;
  return fit;
}

// ---------------------------------------------------------------------------
// Gaussian diagnostics

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov statistic of the sample against N(0, 1).
inline double ks_statistic(std::vector<double> xs) {
  if (xs.empty()) return 1.0;
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = normal_cdf(xs[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

struct Box {
  double x1, x2, y1, y2;
};

inline std::vector<Box> default_boxes() {
  return {{-1, 1, -1, 1}, {0, 1e300, 0, 1e300}, {-0.5, 0.5, -2, 2}, {1, 2, -1, 0}};
}

struct BoxProb {
  Box box;
  double empirical = 0;
  double gaussian = 0;
};

struct MomentReport {
  double X = 0;
  std::size_t count = 0;             // all samples (raw moments)
  std::size_t count_normalized = 0;  // samples with c_r > 2
  std::map<std::pair<int, int>, cplx> raw_moments;
  std::map<std::pair<int, int>, cplx> normalized_moments;  // means over normalized samples
  double mean_abs2 = 0, mean_abs4 = 0, mean_abs6 = 0;
  double kurtosis_ratio = 0;  // M4 M0 / M2^2 of the raw values
  double mixed_ratio = 0;     // |M(2,0)| / M(1,1)
  double ks_re = 0, ks_im = 0;
  std::vector<BoxProb> box_probs;
  bool degenerate = false;
};

inline constexpr std::size_t kMinGaussianSamples = 500;

/**
 * Raw moments of the values and statistics of the normalized values
 * Z = L / (C_f log c_r)^{1/2} against the standard complex normal law, where
 * Re Z and Im Z are independent N(0, 1) so that E|Z|^{2n} = 2^n n!.
 */
inline MomentReport gaussian_report(const std::vector<TwistSample>& samples, double C_f, double X = 0,
                                    const std::vector<Box>& boxes = default_boxes()) {
  if (samples.size() < kMinGaussianSamples)
    throw std::invalid_argument("gaussian_report: need at least " + std::to_string(kMinGaussianSamples) +
                                " samples, got " + std::to_string(samples.size()));
  MomentReport r;
  r.X = X;
  r.count = samples.size();
  const auto raw = sample_values(samples);
  for (int m = 0; m <= 3; ++m)
    for (int n = 0; n <= 3; ++n) r.raw_moments[{m, n}] = moment_sum(raw, m, n);
  const auto z = normalized_values(samples, C_f);
  r.count_normalized = z.size();
  const double cnt = double(std::max<std::size_t>(z.size(), 1));
  for (int m = 0; m <= 3; ++m)
    for (int n = 0; n <= 3; ++n) r.normalized_moments[{m, n}] = moment_sum(z, m, n) / cnt;
  r.mean_abs2 = r.normalized_moments[{1, 1}].real();
  r.mean_abs4 = r.normalized_moments[{2, 2}].real();
  r.mean_abs6 = r.normalized_moments[{3, 3}].real();
  const double m2 = r.raw_moments[{1, 1}].real();
  const double m4 = r.raw_moments[{2, 2}].real();
  r.kurtosis_ratio = m2 > 0 ? m4 * double(r.count) / (m2 * m2) : 0.0;
  r.mixed_ratio = m2 > 0 ? std::abs(r.raw_moments[{2, 0}]) / m2 : 0.0;

  double spread = 0;
  for (const auto& v : z) spread = std::max(spread, std::abs(v));
  r.degenerate = z.empty() || spread == 0.0;
  std::vector<double> re, im;
  for (const auto& v : z) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  r.ks_re = r.degenerate ? 1.0 : ks_statistic(re);
  r.ks_im = r.degenerate ? 1.0 : ks_statistic(im);
  for (const auto& b : boxes) {
    BoxProb bp{b, 0, 0};
    std::size_t hit = 0;
    for (const auto& v : z)
      if (v.real() >= b.x1 && v.real() <= b.x2 && v.imag() >= b.y1 && v.imag() <= b.y2) ++hit;
    bp.empirical = double(hit) / cnt;
    bp.gaussian = (normal_cdf(b.x2) - normal_cdf(b.x1)) * (normal_cdf(b.y2) - normal_cdf(b.y1));
    r.box_probs.push_back(bp);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lindelof scan

struct DyadicRow {
  double lo = 0, hi = 0;  // range lo <= c_r < hi
  std::size_t count = 0;
  double max_abs = 0;
  double c_at_max = 0;
  std::map<double, double> ratio;  // theta -> max |L| / c_r^theta over the range
};

struct LindelofScan {
  std::vector<DyadicRow> rows;
  std::map<double, bool> top3_nonincreasing;  // theta -> verdict over the last three rows
  bool growth_flagged = false;                // the theta = 0.25 verdict failed
};

inline LindelofScan lindelof_scan(const std::vector<TwistSample>& samples,
                                  const std::vector<double>& thetas = {0.25, 0.1}) {
  LindelofScan out;
  std::map<int, DyadicRow> rows;
  for (const auto& s : samples) {
    if (s.point.is_infinity()) continue;
    const double c = s.point.c_r;
    const int j = int(std::floor(std::log2(c) + 1e-12));
    auto& row = rows[j];
    row.lo = std::ldexp(1.0, j);
    row.hi = std::ldexp(1.0, j + 1);
    ++row.count;
    const double a = std::abs(s.value);
    if (a > row.max_abs || row.count == 1) {
      row.max_abs = a;
      row.c_at_max = c;
    }
    for (double t : thetas) {
      const double v = a / std::pow(c, t);
      auto it = row.ratio.find(t);
      if (it == row.ratio.end() || v > it->second) row.ratio[t] = v;
    }
  }
  for (auto& [j, r] : rows) out.rows.push_back(r);
  for (double t : thetas) {
    bool ok = true;
    const std::size_t n = out.rows.size();
    for (std::size_t i = n >= 3 ? n - 2 : 1; i < n; ++i)
      if (out.rows[i].ratio[t] > out.rows[i - 1].ratio[t]) ok = false;
    out.top3_nonincreasing[t] = ok;
  }
  if (out.top3_nonincreasing.count(0.25)) out.growth_flagged = !out.top3_nonincreasing[0.25];
  return out;
}

// ---------------------------------------------------------------------------

/// sum over samples with c_r <= X of L^m conj(L)^n / c_r^{2s}.
inline cplx dirichlet_partial(const std::vector<TwistSample>& samples, int m, int n, cplx s, double X) {
  CompensatedSum<cplx> acc;
  for (const auto& x : samples) {
    if (x.point.is_infinity() || x.point.c_r > X + 1e-9) continue;
    acc.add(mixed_power(x.value, m, n) * std::exp(-2.0 * s * std::log(x.point.c_r)));
  }
  return acc.value();
}

struct HistogramBin {
  double center;
  std::size_t count;
};

inline std::vector<HistogramBin> histogram(const std::vector<double>& xs, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: bad range");
  std::vector<HistogramBin> out(bins);
  const double w = (hi - lo) / bins;
  for (int i = 0; i < bins; ++i) out[i] = {lo + (i + 0.5) * w, 0};
  for (double x : xs) {
    if (x < lo || x >= hi) continue;
    ++out[std::min(bins - 1, int((x - lo) / w))].count;
  }
  return out;
}

inline std::string histogram_csv(const std::vector<HistogramBin>& h) {
  std::ostringstream os;
  os.precision(17);
  os << "bin_center,count\n";
  for (const auto& b : h) os << b.center << ',' << b.count << '\n';
  return os.str();
}

}  // namespace addtwist
