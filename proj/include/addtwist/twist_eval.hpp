#pragma once
/**
 * @file twist_eval.hpp
 * @brief Additive twists L(f, a/c, s) through incomplete-gamma smoothed series.
 *
 * Splitting the period integral of f along the vertical line above a/c at
 * height 1/c_r and mapping the lower half with the matrix sending infinity to
 * a/c gives
 *
 *   Lambda(s) = sum a(n) e(na/c) (c_r/2 pi n)^s Gamma(s, 2 pi n/c_r)
 *             + (-1)^{k/2} eps sum a(n) e(-n d/c) (c_r/2 pi n)^{k-s} Gamma(k-s, 2 pi n/c_r)
 *
 * with Lambda(s) = Gamma(s) (c_r/2 pi)^s L(s).  On the infinity orbit eps = 1
 * and c_r = c.  On the zero orbit the matrix is the Atkin-Lehner element
 * (a sqrt q, B/sqrt q; c sqrt q, D sqrt q), a D q - B c = 1, so c_r = c sqrt q,
 * d = D = (a q)^{-1} mod c and eps is the Fricke eigenvalue.
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "addtwist/core/arith.hpp"
#include "addtwist/core/numeric.hpp"
#include "addtwist/core/parallel.hpp"
#include "addtwist/forms.hpp"
#include "addtwist/orbits.hpp"

namespace addtwist {

struct TwistSample {
  TwistPoint point;
  cplx value;
  double err_bound = 0;
  std::int64_t terms_used = 0;
};

namespace detail {

/// e(j/c) for j = 0..c-1, built so that entry c-j is the exact conjugate of entry j.
inline std::shared_ptr<const std::vector<cplx>> roots_of_unity(i64 c) {
  static std::mutex mu;
  static std::map<i64, std::shared_ptr<const std::vector<cplx>>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<std::vector<cplx>>(c);
  for (i64 j = 0; 2 * j <= c; ++j) {
    const double t = kTwoPi * double(j) / double(c);
    (*table)[j] = {std::cos(t), std::sin(t)};
    if (j > 0) (*table)[c - j] = std::conj((*table)[j]);
  }
  std::lock_guard lock(mu);
  if (cache.size() > 4096) cache.clear();
  return cache.emplace(c, std::move(table)).first->second;
}

/// Gamma(sigma, x) <= x^{sigma-1} e^{-x} * corr for x > sigma - 1; returns corr.
inline double incomplete_gamma_corr(double sigma, double x) {
  if (sigma <= 1) return 1.0;
  if (x <= sigma - 1) return HUGE_VAL;
  return 1.0 / (1.0 - (sigma - 1) / x);
}

}  // namespace detail

/**
 * Rigorous bound for the tail n > N of one smoothed sum of Lambda at real part
 * sigma when the incomplete gammas are taken at x = 2 pi n tau / c_r.  With
 * |a(n)| <= d(n) n^{(k-1)/2} <= 2 n^{k/2} and h = c_r / (2 pi tau) each term is
 * at most 2 h^{k/2} tau^sigma x^{k/2-1} e^{-x} corr, and the sum is dominated
 * by the integral while that majorant decreases.
 */
inline double lambda_tail_bound(int k, double c_r, double sigma, std::int64_t N, double tau = 1.0) {
  const double h = c_r / (kTwoPi * tau);
  const double x = double(N) / h;
  const double m = 0.5 * k;
  if (x <= std::max(m, sigma) + 1.0) return HUGE_VAL;
  const double corr = detail::incomplete_gamma_corr(sigma, x);
  return 2.0 * std::pow(h, m + 1.0) * std::pow(tau, sigma) * upper_gamma_int(int(m), x) * corr;
}

class TwistEvaluator;

/**
 * Coefficients needed for central values with c_r <= c_r_max at tolerance eps,
 * and for the split-1.3 functional-equation checks at the same height.
 */
std::int64_t coefficient_budget(int k, double c_r_max, double eps = 1e-12);

class TwistEvaluator {
 public:
  /// eps_f defaults to the numerically computed Fricke eigenvalue.  For q > 1
  /// the zero-orbit functional equation is checked once here; a residual above
  /// 1e-6 (wrong eigenvalue) throws std::logic_error.
  explicit TwistEvaluator(CuspForm f, std::optional<cplx> eps_f = std::nullopt) : f_(std::move(f)) {
    cplx e = eps_f ? *eps_f : fricke_eigenvalue(f_);
    if (std::abs(e - 1.0) < 1e-6) e = 1.0;
    if (std::abs(e + 1.0) < 1e-6) e = -1.0;
    eps_ = e;
    sign_ = (f_.weight() / 2) % 2 ? -1.0 : 1.0;
    if (f_.level() > 1) self_check();
  }

  const CuspForm& form() const { return f_; }
  cplx fricke() const { return eps_; }
  double sign() const { return sign_; }

  /// Multiplier of the dual sum: (-1)^{k/2}, times eps_f on the zero orbit.
  cplx root_number(const TwistPoint& p) const {
    return p.orbit == Orbit::Zero ? sign_ * eps_ : cplx(sign_);
  }

  /// Gamma(s) (c_r/2 pi)^{Re s}: the size of Lambda relative to L.
  static double lambda_scale(const TwistPoint& p, cplx s) {
    return std::abs(gamma(s)) * std::pow(p.c_r / kTwoPi, s.real());
  }

  /// Truncation length for absolute target eps on both sums.
  std::int64_t truncation(const TwistPoint& p, cplx s, double eps, double tau = 1.0) const {
    return truncation_for(f_.weight(), p, s, eps, tau);
  }

  static std::int64_t truncation_for(int k, const TwistPoint& p, cplx s, double eps, double tau = 1.0) {
    const double tmin = std::min(tau, 1.0 / tau);
    const double h = p.c_r / (kTwoPi * tmin);
    const double rel = std::max(eps / std::max(lambda_scale(p, s), 1e-300), 1e-300);
    double guess = h * (k * std::log(h * kTwoPi + 3.0) + std::max(0.0, std::log(1.0 / rel)) + 10.0);
    std::int64_t N = std::max<std::int64_t>(8, std::int64_t(std::ceil(guess)));
    const double s1 = s.real(), s2 = k - s.real();
    for (int it = 0; it < 200; ++it) {
      const double t =
          std::max(lambda_tail_bound(k, p.c_r, s1, N, tau), lambda_tail_bound(k, p.c_r, s2, N, 1.0 / tau));
      if (t < 0.5 * eps) return N;
      N = N + N / 4 + 8;
    }
    throw ConvergenceError("truncation: tail bound never reached eps", eps);
  }

  struct LambdaResult {
    cplx value;
    double err_bound = 0;
    std::int64_t terms = 0;
  };

  /**
   * Lambda(f, a/c, s) to absolute accuracy eps (plus the returned rounding
   * slack).  tau moves the split of the period integral to height tau / c_r;
   * the value is independent of tau exactly when d and eps_f are right.
   */
  LambdaResult completed_lambda(const TwistPoint& p, cplx s, double eps, double tau = 1.0) const {
    if (p.is_infinity()) return {};
    check_point(p);
    if (!(eps > 0)) throw std::invalid_argument("completed_lambda: eps must be positive");
    if (!(tau > 0)) throw std::invalid_argument("completed_lambda: tau must be positive");
    const int k = f_.weight();
    const std::int64_t N = truncation(p, s, eps, tau);
    f_.require(N);
    const auto roots = detail::roots_of_unity(p.c);
    const auto& a = f_.coeffs_d();
    const double h = p.c_r / kTwoPi;
    const cplx sd = double(k) - s;
    const cplx w = root_number(p);
    CompensatedSum<cplx> direct, dual;
    double mass = 0;
    i64 ia = 0, id = 0;
    const i64 step_a = p.a % p.c, step_d = floor_mod(-p.d_inv, p.c);
    for (std::int64_t n = 1; n <= N; ++n) {
      ia += step_a;
      if (ia >= p.c) ia -= p.c;
      id += step_d;
      if (id >= p.c) id -= p.c;
      if (a[n] == 0) continue;
      const double x = double(n) / h;
      const double lhn = std::log(h / double(n));
      const cplx t1 = a[n] * (*roots)[ia] * std::exp(s * lhn) * upper_gamma(s, x * tau);
      const cplx t2 = a[n] * (*roots)[id] * std::exp(sd * lhn) * upper_gamma(sd, x / tau);
      direct.add(t1);
      dual.add(t2);
      mass += std::abs(t1) + std::abs(t2);
    }
    LambdaResult r;
    r.value = direct.value() + w * dual.value();
    r.terms = N;
    r.err_bound = lambda_tail_bound(k, p.c_r, s.real(), N, tau) +
                  lambda_tail_bound(k, p.c_r, k - s.real(), N, 1.0 / tau) +
                  64.0 * 2.2e-16 * mass;
    return r;
  }

  /**
   * L(f, a/c, k/2) with the closed-form incomplete gamma.  eps is the
   * truncation target in L units; the infinity cusp (c = 0) gives 0.
   */
  TwistSample central_value(const TwistPoint& p, double eps = 1e-12) const {
    TwistSample out;
    out.point = p;
    if (p.is_infinity()) return out;
    check_point(p);
    const int k = f_.weight();
    const int m = k / 2;
    const cplx s(m, 0);
    const double scale = factorial(m - 1) * std::pow(p.c_r / kTwoPi, m);
    const std::int64_t N = truncation(p, s, eps * scale);
    f_.require(N);
    const auto roots = detail::roots_of_unity(p.c);
    const auto& a = f_.coeffs_d();
    const double inv_h = kTwoPi / p.c_r;
    const cplx w = root_number(p);
    CompensatedSum<cplx> sum;
    double mass = 0;
    i64 ia = 0, id = 0;
    const i64 step_a = p.a % p.c, step_d = floor_mod(-p.d_inv, p.c);
    for (std::int64_t n = 1; n <= N; ++n) {
      ia += step_a;
      if (ia >= p.c) ia -= p.c;
      id += step_d;
      if (id >= p.c) id -= p.c;
      if (a[n] == 0) continue;
      const double wt = a[n] * std::pow(double(n), -double(m)) * exp_partial(m, double(n) * inv_h);
      const cplx t = wt * ((*roots)[ia] + w * (*roots)[id]);
      sum.add(t);
      mass += std::abs(wt);
    }
    out.value = sum.value();
    out.terms_used = N;
    out.err_bound = 2.0 * lambda_tail_bound(k, p.c_r, m, N) / scale + 64.0 * 2.2e-16 * mass;
    return out;
  }

  /// L(f, a/c, j) for an integer 1 <= j <= k-1.
  cplx special_value(const TwistPoint& p, int j, double eps = 1e-13) const {
    const int k = f_.weight();
    if (j < 1 || j > k - 1)
      throw std::invalid_argument("special_value: j must lie in 1.." + std::to_string(k - 1));
    if (p.is_infinity()) return 0.0;
    if (j == k / 2) return central_value(p, eps).value;
    const double scale = factorial(j - 1) * std::pow(p.c_r / kTwoPi, j);
    return completed_lambda(p, cplx(j, 0), eps * scale).value / scale;
  }

 private:
  void check_point(const TwistPoint& p) const {
    if (p.q != f_.level())
      throw std::invalid_argument("twist point built for level " + std::to_string(p.q) + ", form has level " +
                                  std::to_string(f_.level()));
    if (p.orbit == Orbit::Infinity && p.c % p.q != 0)
      throw std::invalid_argument("infinity orbit requires q | c");
    if (p.orbit == Orbit::Zero && std::gcd(p.c, i64(p.q)) != 1)
      throw std::invalid_argument("zero orbit requires gcd(c, q) = 1");
  }

  void self_check() const {
    const int q = f_.level();
    i64 c = 2;
    while (std::gcd(c, i64(q)) != 1) ++c;
    const TwistPoint p = make_point(1, c, Orbit::Zero, q);
    const cplx s(0.5 * f_.weight(), 0.37);
    const double eps = 1e-12 * lambda_scale(p, s);
    const cplx lhs = completed_lambda(p, s, eps).value;
    const cplx rhs =
        root_number(p) * completed_lambda(dual_point(p), double(f_.weight()) - s, eps, kCheckSplit).value;
    const double res = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    if (res > 1e-6)
      throw std::logic_error("zero-orbit functional equation residual " + std::to_string(res) +
                             " exceeds 1e-6; Fricke eigenvalue is wrong");
  }

  static constexpr double kCheckSplit = 1.3;

  CuspForm f_;
  cplx eps_ = 1.0;
  double sign_ = 1.0;
};

/**
 * |Lambda(p, s) - w Lambda(dual p, k - s)| / (1 + |Lambda(p, s)|).  The two
 * sides use different splits of the period integral; with a common split the
 * identity would hold term by term for any sign w.
 */
inline double functional_equation_residual(const TwistEvaluator& ev, const TwistPoint& p, cplx s,
                                           double rel_eps = 1e-13, double dual_split = 1.3) {
  const double k = ev.form().weight();
  const double eps1 = rel_eps * std::max(1.0, TwistEvaluator::lambda_scale(p, s));
  const double eps2 = rel_eps * std::max(1.0, TwistEvaluator::lambda_scale(p, k - s));
  const cplx lhs = ev.completed_lambda(p, s, std::min(eps1, eps2)).value;
  const cplx rhs =
      ev.root_number(p) * ev.completed_lambda(dual_point(p), k - s, std::min(eps1, eps2), dual_split).value;
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

// ---------------------------------------------------------------------------
// Antiderivatives and the central-value formula through Gamma_0(q) elements

inline constexpr double kDefaultYMin = 5e-3;

/// I_n(z) = sum a(m) e(mz) / (2 pi i m)^n, the n-fold antiderivative vanishing at infinity.
inline cplx antiderivative(const CuspForm& f, int n, cplx z, double y_min = kDefaultYMin) {
  if (n < 0 || n > f.weight() - 1)
    throw std::invalid_argument("antiderivative: n must lie in 0..k-1");
  if (!(z.imag() >= y_min))
    throw std::domain_error("antiderivative: Im z = " + std::to_string(z.imag()) + " is below y_min = " +
                            std::to_string(y_min));
  if (n == 0) return evaluate(f, z);
  const double y = z.imag();
  const double decay = std::exp(-kTwoPi * y);
  const cplx step = std::exp(cplx(0, kTwoPi) * z);
  const double expo = 0.5 * f.weight() - n;
  const cplx inv_2pii = 1.0 / cplx(0, kTwoPi);
  cplx base = 1.0;
  for (int j = 0; j < n; ++j) base *= inv_2pii;
  const auto& a = f.coeffs_d();
  CompensatedSum<cplx> sum;
  double mass = 0;
  cplx qm = step;
  for (std::int64_t m = 1;; ++m) {
    if (m > f.coeff_count()) throw InsufficientCoefficients(f.form_id(), m, f.coeff_count());
    if (m % 64 == 0) qm = std::exp(cplx(0, kTwoPi * double(m)) * z);
    const cplx term = a[m] * std::pow(double(m), -double(n)) * qm;
    sum.add(term);
    mass += std::abs(term);
    if (m % 8 == 0) {
      const double next = double(m + 1);
      const double bound_next = 2.0 * std::exp(expo * std::log(next) - kTwoPi * y * next);
      const double ratio = std::pow((next + 1.0) / next, std::max(expo, 0.0)) * decay;
      if (ratio < 1.0 && bound_next / (1.0 - ratio) < 1e-17 * std::max(mass, 1e-300)) break;
    }
    qm *= step;
  }
  return base * sum.value();
}

/**
 * L(f, gamma infinity, k/2) through the antiderivatives:
 *   [(-1)^{k/2} sum_j m!/j! c^{-j} j(gamma,z)^{-j} I_{k/2-j}(gamma z)
 *    + sum_j (-1)^j m!/j! c^{-j} j(gamma,z)^j I_{k/2-j}(z)] (-2 pi i)^{k/2} / Gamma(k/2)
 * with m = (k-2)/2 and j = 0..m.  The value does not depend on z.
 */
inline cplx antiderivative_central_value(const CuspForm& f, const Mat2& g, cplx z, double y_min = kDefaultYMin) {
  const i64 q = f.level();
  if (g.det() != 1) throw std::invalid_argument("antiderivative_central_value: matrix must have determinant 1");
  if (g.c <= 0) throw std::invalid_argument("antiderivative_central_value: lower-left entry must be positive");
  if (g.c % q != 0) throw std::invalid_argument("antiderivative_central_value: matrix is not in Gamma_0(q)");
  const int k = f.weight();
  const int half = k / 2;
  const int m = half - 1;
  const cplx jz = double(g.c) * z + double(g.d);
  const cplx gz = mobius_apply(g, z);
  if (!(gz.imag() >= y_min))
    throw std::domain_error("antiderivative_central_value: Im(gamma z) = " + std::to_string(gz.imag()) + " is below y_min");
  const double c = double(g.c);
  cplx s1 = 0, s2 = 0;
  for (int j = 0; j <= m; ++j) {
    const double coef = factorial(m) / factorial(j) * std::pow(c, -j);
    s1 += coef * std::pow(jz, -j) * antiderivative(f, half - j, gz, y_min);
    s2 += (j % 2 ? -1.0 : 1.0) * coef * std::pow(jz, j) * antiderivative(f, half - j, z, y_min);
  }
  const double sgn = half % 2 ? -1.0 : 1.0;
  return (sgn * s1 + s2) * std::pow(cplx(0, -kTwoPi), half) / factorial(half - 1);
}

// ---------------------------------------------------------------------------
// Period moments and the period-polynomial cocycle

using Poly = std::vector<cplx>;  // coefficient of X^p at index p

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0)));
}

/**
 * int_{a/c}^{i infinity} f(z) z^l dz
 *   = sum_j binom(l,j) r^{l-j} j! / (-2 pi i)^{j+1} L(f, r, j+1),  r = a/c,
 * for the cusp a/c taken literally (not reduced mod 1).
 */
inline cplx period_moment(const TwistEvaluator& ev, i64 a, i64 c, int l) {
  const int k = ev.form().weight();
  if (l < 0 || l > k - 2) throw std::invalid_argument("period_moment: l must lie in 0..k-2");
  if (c == 0) return 0.0;
  if (c < 0) {
    a = -a;
    c = -c;
  }
  const TwistPoint p = make_point_auto(a, c, ev.form().level());
  const double r = double(a) / double(c);
  const cplx m2pii(0, -kTwoPi);
  cplx acc = 0;
  for (int j = 0; j <= l; ++j)
    acc += binomial(l, j) * std::pow(r, l - j) * factorial(j) / std::pow(m2pii, j + 1) *
           ev.special_value(p, j + 1);
  return acc;
}

/// int_{g infinity}^{i infinity} f(z) (X - z)^{k-2} dz as a polynomial in X.
inline Poly period_polynomial(const TwistEvaluator& ev, const Mat2& g) {
  const int w = ev.form().weight() - 2;
  Poly out(w + 1, 0.0);
  if (g.c == 0) return out;
  // (X - z)^w = sum_p binom(w,p) X^p (-z)^{w-p}
  for (int pw = 0; pw <= w; ++pw) {
    const int l = w - pw;
    out[pw] = binomial(w, pw) * (l % 2 ? -1.0 : 1.0) * period_moment(ev, g.a, g.c, l);
  }
  return out;
}

/// Parabolic cocycle rho(g) = integral from g^{-1} infinity, satisfying
/// rho(g1 g2) = rho(g1)|g2 + rho(g2).
inline Poly cocycle(const TwistEvaluator& ev, const Mat2& g) { return period_polynomial(ev, g.inverse()); }

inline Poly poly_mul(const Poly& x, const Poly& y) {
  Poly r(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) r[i + j] += x[i] * y[j];
  return r;
}

/// (P|g)(X) = (cX + d)^w P((aX + b)/(cX + d)) with w = deg bound of P.
inline Poly poly_slash(const Poly& P, const Mat2& g) {
  const int w = int(P.size()) - 1;
  Poly out(w + 1, 0.0);
  const Poly num{double(g.b), double(g.a)}, den{double(g.d), double(g.c)};
  for (int p = 0; p <= w; ++p) {
    Poly t{1.0};
    for (int i = 0; i < p; ++i) t = poly_mul(t, num);
    for (int i = p; i < w; ++i) t = poly_mul(t, den);
    for (int i = 0; i <= w; ++i) out[i] += P[p] * t[i];
  }
  return out;
}

/// max_p |rho(g1 g2)_p - (rho(g1)|g2 + rho(g2))_p| / (1 + max |rho(g1 g2)_p|).
inline double cocycle_residual(const TwistEvaluator& ev, const Mat2& g1, const Mat2& g2) {
  const Poly lhs = cocycle(ev, g1 * g2);
  const Poly a = poly_slash(cocycle(ev, g1), g2);
  const Poly b = cocycle(ev, g2);
  double worst = 0, size = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    worst = std::max(worst, std::abs(lhs[i] - a[i] - b[i]));
    size = std::max(size, std::abs(lhs[i]));
  }
  return worst / (1.0 + size);
}

// ---------------------------------------------------------------------------
// Batch evaluation

inline std::int64_t coefficient_budget(int k, double c_r_max, double eps) {
  TwistPoint p;
  p.a = 1;
  p.c = 2;
  p.c_r = std::max(c_r_max, 2.0);
  const cplx s(k / 2, 0);
  const double scale = factorial(k / 2 - 1) * std::pow(p.c_r / kTwoPi, k / 2);
  const auto central = TwistEvaluator::truncation_for(k, p, s, eps * scale);
  const auto split = TwistEvaluator::truncation_for(k, p, s, 1e-13 * scale, 1.3);
  return std::max(central, split) + 64;
}

struct BatchFailure {
  TwistPoint point;
  std::string message;
};

struct BatchResult {
  std::vector<TwistSample> samples;  // sorted by (c, a)
  std::vector<BatchFailure> failures;
};

/// Central values at every point; output order is (c, a) whatever the worker count.
inline BatchResult batch_central_values(const TwistEvaluator& ev, std::vector<TwistPoint> points, int workers,
                                        double eps = 1e-12) {
  std::sort(points.begin(), points.end(), point_less);
  std::vector<std::optional<TwistSample>> slots(points.size());
  std::vector<std::string> errors(points.size());
  parallel_for(points.size(), workers, [&](std::size_t i) {
    try {
      slots[i] = ev.central_value(points[i], eps);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  });
  BatchResult out;
  out.samples.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (slots[i])
      out.samples.push_back(*slots[i]);
    else
      out.failures.push_back({points[i], errors[i]});
  }
  return out;
}

}  // namespace addtwist
