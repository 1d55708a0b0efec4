#pragma once
/**
 * @file numeric.hpp
 * @brief Scalar special functions and quadrature shared by every module.
 *
 * Complex Gamma (Lanczos, g = 7), upper incomplete gamma for complex order
 * and positive real argument, Gauss-Legendre rules and an adaptive panel
 * integrator.  Everything here is double precision.
 */

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace addtwist {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kEulerGamma = 0.577215664901532860606512090082;

/// Raised when an iterative method does not reach the requested accuracy.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

// Neumaier compensated summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0, comp_ = 0;
};

template <class T>
class CompensatedSum;

template <>
class CompensatedSum<double> {
 public:
  void add(double x) { s_.add(x); }
  double value() const { return s_.value(); }

 private:
  NeumaierSum s_;
};

template <>
class CompensatedSum<cplx> {
 public:
  void add(cplx x) {
    re_.add(x.real());
    im_.add(x.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  NeumaierSum re_, im_;
};

namespace detail {
inline constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
}  // namespace detail

/// log Gamma(s) for complex s (principal branch away from the poles).
inline cplx log_gamma(cplx s) {
  if (s.real() < 0.5) {
    // reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
    return std::log(kPi) - std::log(std::sin(kPi * s)) - log_gamma(1.0 - s);
  }
  s -= 1.0;
  cplx x = detail::kLanczos[0];
  for (int i = 1; i < 9; ++i) x += detail::kLanczos[i] / (s + double(i));
  const cplx t = s + 7.5;
  return 0.5 * std::log(kTwoPi) + (s + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx gamma(cplx s) {
  if (s.imag() == 0.0) return std::tgamma(s.real());
  return std::exp(log_gamma(s));
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// e^{-x} * sum_{j<m} x^j / j!, the regularized upper incomplete gamma Q(m, x)
/// for a positive integer order m.
inline double exp_partial(int m, double x) {
  double term = 1.0, sum = 0.0;
  for (int j = 0; j < m; ++j) {
    sum += term;
    term *= x / (j + 1);
  }
  return std::exp(-x) * sum;
}

/// Gamma(m, x) for integer m >= 1 via the finite closed form.
inline double upper_gamma_int(int m, double x) { return factorial(m - 1) * exp_partial(m, x); }

/**
 * Upper incomplete gamma Gamma(s, x) for complex s with Re s > 0 and x > 0.
 *
 * Small x uses the lower-gamma power series, large x a Lentz continued
 * fraction.  Relative accuracy is about 1e-14 in the parameter range used by
 * the twist evaluators (|Im s| <= 10, Re s <= 20).
 */
inline cplx upper_gamma(cplx s, double x) {
  if (!(x > 0.0)) throw std::domain_error("upper_gamma: x must be positive");
  if (s.imag() == 0.0 && s.real() >= 1.0 && s.real() == std::floor(s.real()) && s.real() < 60)
    return upper_gamma_int(static_cast<int>(s.real()), x);
  const cplx log_prefactor = s * std::log(x) - x;
  if (x < s.real() + 1.0) {
    // gamma(s, x) = x^s e^{-x} sum_j x^j / (s (s+1) ... (s+j))
    cplx term = 1.0 / s;
    cplx sum = term;
    for (int j = 1; j < 2000; ++j) {
      term *= x / (s + double(j));
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return gamma(s) - std::exp(log_prefactor) * sum;
  }
  // Gamma(s, x) = x^s e^{-x} / (x + 1 - s - 1(1-s)/(x + 3 - s - 2(2-s)/(x + 5 - s - ...)))
  constexpr double tiny = 1e-300;
  cplx b = x + 1.0 - s;
  cplx c = 1.0 / tiny;
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 1; i < 5000; ++i) {
    const cplx an = -double(i) * (double(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const cplx delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return std::exp(log_prefactor) * h;
  }
  throw ConvergenceError("upper_gamma: continued fraction did not converge", std::abs(h));
}

/// Real-order convenience wrapper.
inline double upper_gamma(double s, double x) { return upper_gamma(cplx(s, 0.0), x).real(); }

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

inline GaussRule make_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

/// Cached rule of order n; thread-safe, initialize-once-then-read-only.
inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(make_gauss_legendre(n));
  return *slot;
}

/// Fixed-order Gauss-Legendre on [a, b].
template <class F>
auto gauss_panel(F&& f, double a, double b, int order = 20) {
  const GaussRule& r = gauss_legendre(order);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  using R = decltype(f(a));
  R acc{};
  for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(mid + half * r.nodes[i]);
  return R(acc * half);
}

template <class R>
struct QuadResult {
  R value{};
  double error = 0;
};

/**
 * Adaptive bisection driven by a 20-point rule compared against its two
 * halves.  Converges when |I_whole - I_halves| <= max(abs_tol, rel_tol |I|)
 * on every accepted panel (tolerance split proportional to panel length).
 */
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                        int max_depth = 40) {
  using R = decltype(f(a));
  QuadResult<R> out;
  if (a == b) return out;
  const double total_len = b - a;
  struct Panel {
    double lo, hi;
    R whole;
    int depth;
  };
  std::vector<Panel> stack;
  stack.push_back({a, b, gauss_panel(f, a, b), 0});
  R rough = stack.back().whole;
  double scale = std::abs(rough);
  CompensatedSum<std::conditional_t<std::is_same_v<R, cplx>, cplx, double>> acc;
  bool failed = false;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    const R left = gauss_panel(f, p.lo, mid);
    const R right = gauss_panel(f, mid, p.hi);
    const R both = left + right;
    const double err = std::abs(both - p.whole);
    const double tol = std::max(abs_tol, rel_tol * scale) * (p.hi - p.lo) / total_len;
    if (err <= tol || p.depth >= max_depth) {
      if (err > tol) failed = true;
      acc.add(both);
      out.error += err;
    } else {
      stack.push_back({mid, p.hi, right, p.depth + 1});
      stack.push_back({p.lo, mid, left, p.depth + 1});
    }
  }
  out.value = acc.value();
  if (failed)
    throw ConvergenceError("integrate_adaptive: maximum depth reached", std::abs(out.value));
  return out;
}

}  // namespace addtwist
