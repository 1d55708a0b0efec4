#pragma once
/**
 * @file cutoff.hpp
 * @brief Smooth and sharp cutoff sums of Dirichlet series with known poles.
 *
 * For D(s) = sum a_n c_n^{-s} with principal parts sum_j b_{m,j} (s - s_m)^{-j}
 * the smooth sum sum a_n psi(c_n / X) has main term
 *
 *   sum_m X^{s_m} sum_{k=0}^{d_m-1} (log X)^k / k! sum_{l=0}^{d_m-1-k} psihat^{(l)}(s_m) / l! b_{m,k+l+1},
 *
 * the residue of psihat(s) X^s D(s).  Replacing psihat^{(l)}(s)/l! by its
 * limit (-1)^l s^{-l-1} for the indicator of [0, 1] gives the sharp main term.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "addtwist/core/arith.hpp"
#include "addtwist/core/numeric.hpp"

namespace addtwist {

struct TestFunction {
  std::string name;
  std::function<double(double)> eval;
  double plateau_end = 0;   // psi = 1 on [0, plateau_end]
  double support_end = 1;   // psi = 0 beyond
  bool fd_derivatives = true;

  double operator()(double y) const {
    if (y < 0) throw std::domain_error("test function evaluated at a negative point");
    if (y <= plateau_end) return 1.0;
    if (y >= support_end) return 0.0;
    return eval(y);
  }

  /// Derivative of order 1..8 by an eighth-order central difference (fd_derivatives is set).
  double derivative(int order, double y, double h = 1e-3) const {
    if (order < 0 || order > 8) throw std::invalid_argument("derivative: order must lie in 0..8");
    if (order == 0) return (*this)(y);
    // differentiate the order-1 derivative recursively with a 9-point stencil
    static constexpr double w[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0, 4.0 / 5, -1.0 / 5, 4.0 / 105,
                                   -1.0 / 280};
    double acc = 0;
    for (int i = -4; i <= 4; ++i) {
      if (w[i + 4] == 0) continue;
      const double x = y + i * h;
      acc += w[i + 4] * (order == 1 ? (*this)(std::max(x, 0.0)) : derivative(order - 1, std::max(x, 0.0), h));
    }
    return acc / h;
  }
};

/// 1_{[0,1]}; not smooth, admitted as a reference input.
inline TestFunction indicator_unit() {
  return {"indicator", [](double) { return 0.0; }, 1.0, 1.0, false};
}

/// exp(-1 / (1 - (y-1)^2)) on (0, 2).
inline TestFunction bump_test_function() {
  return {"bump",
          [](double y) {
            const double t = y - 1.0;
            return std::abs(t) < 1 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
          },
          0.0, 2.0, true};
}

// ---------------------------------------------------------------------------
// The bump phi and the mollifiers psi_{delta, +-}

inline double bump_raw(double t) { return std::abs(t) < 1 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

inline double bump_normalization() {
  static const double z = integrate_adaptive(bump_raw, -1.0, 1.0, 1e-15).value;
  return z;
}

/// phi(t) = bump_raw(t) / int bump_raw, so that int phi = 1.
inline double bump(double t) { return bump_raw(t) / bump_normalization(); }

/// Phi(u) = int_{-1}^{u} phi(t) dt.
inline double bump_cdf(double u) {
  if (u <= -1) return 0.0;
  if (u >= 1) return 1.0;
  if (u > 0) return 1.0 - bump_cdf(-u);
  return integrate_adaptive(bump_raw, -1.0, u, 1e-16).value / bump_normalization();
}

/**
 * psi_{delta, +-}(y) = int 1_{[0, 1 +- delta]}(y t) phi_delta(t - 1) dt
 *                    = Phi(((1 +- delta)/y - 1) / delta).
 * psi_+ is 1 on [0, 1] and vanishes beyond (1+delta)/(1-delta); psi_- is 1
 * on [0, (1-delta)/(1+delta)] and vanishes beyond 1.
 */
inline TestFunction mollifier(double delta, int sign) {
  if (!(delta > 0 && delta < 0.5)) throw std::invalid_argument("mollifier: delta must lie in (0, 1/2)");
  if (sign != 1 && sign != -1) throw std::invalid_argument("mollifier: sign must be +1 or -1");
  const double top = 1.0 + sign * delta;
  TestFunction f;
  f.name = sign > 0 ? "mollifier+" : "mollifier-";
  f.eval = [top, delta](double y) { return bump_cdf((top / y - 1.0) / delta); };
  f.plateau_end = top / (1.0 + delta);
  f.support_end = top / (1.0 - delta);
  f.fd_derivatives = true;
  return f;
}

// ---------------------------------------------------------------------------

/// int_0^p y^{s-1} (log y)^l dy = p^s sum_{j<=l} (-1)^{l-j} l!/j! (log p)^j / s^{l-j+1}.
inline cplx plateau_mellin(double p, cplx s, int l) {
  if (p <= 0) return 0.0;
  const double lp = std::log(p);
  cplx acc = 0;
  for (int j = 0; j <= l; ++j)
    acc += ((l - j) % 2 ? -1.0 : 1.0) * factorial(l) / factorial(j) * std::pow(lp, j) / std::pow(s, l - j + 1);
  return std::exp(s * lp) * acc;
}

/// psihat^{(l)}(s) = int_0^inf psi(y) y^{s-1} (log y)^l dy, Re s > 0.
inline cplx mellin(const TestFunction& psi, cplx s, int l = 0, double tol = 1e-12) {
  if (!(s.real() > 0)) throw std::domain_error("mellin: Re s must be positive");
  if (l < 0) throw std::invalid_argument("mellin: derivative order must be >= 0");
  cplx out = plateau_mellin(psi.plateau_end, s, l);
  const double lo = psi.plateau_end, hi = psi.support_end;
  if (hi > lo) {
    auto g = [&](double y) -> cplx {
      if (y <= 0) return 0.0;
      const double ly = std::log(y);
      return psi(y) * std::exp((s - 1.0) * ly) * std::pow(ly, l);
    };
    out += integrate_adaptive(g, lo, hi, tol).value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cutoff problems

struct Pole {
  cplx s;
  std::vector<double> b;  // b[j-1] = b_j, j = 1..order
  bool leading_only = false;  // lower Laurent coefficients unknown and set to 0
  int order() const { return int(b.size()); }
};

struct CutoffProblem {
  std::string name;
  std::string coefficients;  // builtin source name, or "sequence"
  std::function<double(i64)> coeff;  // a_n, n >= 1
  std::function<double(i64)> scale;  // c_n, nondecreasing
  i64 count = 0;                     // number of terms; 0 when unbounded
  double sigma0 = 1, a = 0.5, A = 0.5;
  bool nonnegative = true;
  std::vector<Pole> poles;  // ordered by decreasing real part
};

namespace detail {
inline const std::vector<i64>& divisor_table(i64 N) {
  static std::mutex mu;
  static std::shared_ptr<std::vector<i64>> table;
  std::lock_guard lock(mu);
  if (!table || i64(table->size()) <= N) table = std::make_shared<std::vector<i64>>(divisor_count_table(std::max<i64>(N, 1 << 16) * 2));
  return *table;
}
}  // namespace detail

inline void validate(const CutoffProblem& p) {
  if (!p.coeff || !p.scale) throw std::invalid_argument("cutoff problem '" + p.name + "' has no coefficients");
  for (std::size_t i = 0; i < p.poles.size(); ++i) {
    if (p.poles[i].order() < 1) throw std::invalid_argument("pole without Laurent coefficients");
    if (!(p.a < p.poles[i].s.real())) throw std::invalid_argument("continuation floor a must lie left of every pole");
    if (i > 0 && p.poles[i].s.real() > p.poles[i - 1].s.real())
      throw std::invalid_argument("poles must be ordered by decreasing real part");
  }
  if (!p.poles.empty() && std::abs(p.poles[0].s.real() - p.sigma0) > 1e-12)
    throw std::invalid_argument("the first pole must lie on Re s = sigma0");
}

inline void set_builtin_coefficients(CutoffProblem& p, const std::string& source) {
  p.coefficients = source;
  p.scale = [](i64 n) { return double(n); };
  p.count = 0;
  if (source == "one") {
    p.coeff = [](i64) { return 1.0; };
  } else if (source == "divisor") {
    p.coeff = [](i64 n) { return double(detail::divisor_table(n)[n]); };
  } else {
    throw std::invalid_argument("unknown coefficient source '" + source + "' (expected one|divisor)");
  }
}

/// zeta(s): a_n = 1, simple pole at 1 with residue 1.
inline CutoffProblem zeta_problem() {
  CutoffProblem p;
  p.name = "zeta";
  set_builtin_coefficients(p, "one");
  p.sigma0 = 1;
  p.a = 0.5;
  p.A = 0.5;
  p.poles = {{cplx(1, 0), {1.0}}};
  return p;
}

/// zeta(s)^2: a_n = d(n), double pole at 1 with b_2 = 1, b_1 = 2 gamma_E.
inline CutoffProblem zeta2_problem() {
  CutoffProblem p;
  p.name = "zeta2";
  set_builtin_coefficients(p, "divisor");
  p.sigma0 = 1;
  p.a = 0.5;
  p.A = 0.5;
  p.poles = {{cplx(1, 0), {2.0 * kEulerGamma, 1.0}}};
  return p;
}

/**
 * sum |L|^{2n} c_r^{-s}: pole at s = 2 of order n + 1 with leading Laurent
 * coefficient 2^{n+1} (n!)^2 C_f^n / (pi vol), a = 1, A = 1/2, and the
 * placeholder secondary pole 2 s_1 = 1.  Lower Laurent coefficients are not
 * known in closed form and are set to zero.
 */
inline CutoffProblem moment_problem(int n, double C_f, double vol, std::vector<double> values = {},
                                    std::vector<double> c_r = {}) {
  CutoffProblem p;
  p.name = "moment" + std::to_string(n);
  p.sigma0 = 2;
  p.a = 1;
  p.A = 0.5;
  Pole lead{cplx(2, 0), std::vector<double>(n + 1, 0.0), true};
  lead.b[n] = std::pow(2.0, n + 1) * std::pow(factorial(n), 2) * std::pow(C_f, n) / (kPi * vol);
  p.poles = {lead, {cplx(1, 0), {0.0}, true}};
  p.coefficients = "sequence";
  auto vs = std::make_shared<std::vector<double>>(std::move(values));
  auto cs = std::make_shared<std::vector<double>>(std::move(c_r));
  if (vs->size() != cs->size()) throw std::invalid_argument("moment_problem: value/scale length mismatch");
  p.count = i64(vs->size());
  p.coeff = [vs](i64 i) { return (*vs)[i - 1]; };
  p.scale = [cs](i64 i) { return (*cs)[i - 1]; };
  return p;
}

/**
 * Plain-text fixture:
 *   name <id>
 *   coefficients one|divisor
 *   sigma0 <x>   a <x>   A <x>   nonnegative 0|1      (one key per line)
 *   pole <re> <im> <order> <b_1> .. <b_order>
 * Lines starting with '#' are comments.
 */
inline CutoffProblem parse_cutoff_problem(const std::string& text) {
  CutoffProblem p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_coeffs = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("cutoff fixture line " + std::to_string(lineno) + ": " + why);
    };
    if (key == "name") {
      ls >> p.name;
    } else if (key == "coefficients") {
      std::string src;
      ls >> src;
      set_builtin_coefficients(p, src);
      have_coeffs = true;
    } else if (key == "sigma0" || key == "a" || key == "A") {
      double v;
      if (!(ls >> v)) fail("missing value for " + key);
      (key == "sigma0" ? p.sigma0 : key == "a" ? p.a : p.A) = v;
    } else if (key == "nonnegative") {
      int v;
      if (!(ls >> v)) fail("missing value for nonnegative");
      p.nonnegative = v != 0;
    } else if (key == "pole") {
      double re, im;
      int order;
      if (!(ls >> re >> im >> order) || order < 1) fail("pole needs re im order");
      Pole pole{cplx(re, im), {}};
      for (int j = 0; j < order; ++j) {
        double b;
        if (!(ls >> b)) fail("pole of order " + std::to_string(order) + " needs " + std::to_string(order) +
                             " Laurent coefficients");
        pole.b.push_back(b);
      }
      p.poles.push_back(pole);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_coeffs) throw std::invalid_argument("cutoff fixture: missing 'coefficients'");
  validate(p);
  return p;
}

inline std::string write_cutoff_problem(const CutoffProblem& p) {
  if (p.coefficients == "sequence") throw std::invalid_argument("sequence-backed problems have no fixture form");
  std::ostringstream os;
  os.precision(17);
  os << "name " << p.name << "\ncoefficients " << p.coefficients << "\nsigma0 " << p.sigma0 << "\na " << p.a
     << "\nA " << p.A << "\nnonnegative " << (p.nonnegative ? 1 : 0) << '\n';
  for (const auto& pole : p.poles) {
    os << "pole " << pole.s.real() << ' ' << pole.s.imag() << ' ' << pole.order();
    for (double b : pole.b) os << ' ' << b;
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Main terms

/// Coefficients of P_m: entry k multiplies (log X)^k, with mellin_over_fact[l] = psihat^{(l)}(s_m)/l!.
inline std::vector<cplx> main_term_polynomial(const Pole& pole, const std::vector<cplx>& mellin_over_fact) {
  const int d = pole.order();
  std::vector<cplx> P(d, 0.0);
  for (int k = 0; k < d; ++k) {
    cplx inner = 0;
    for (int l = 0; l <= d - 1 - k; ++l) inner += mellin_over_fact[l] * pole.b[k + l];
    P[k] = inner / factorial(k);
  }
  return P;
}

inline cplx eval_log_poly(const std::vector<cplx>& P, double X) {
  const double lx = std::log(X);
  cplx acc = 0, pw = 1;
  for (const auto& c : P) {
    acc += c * pw;
    pw *= lx;
  }
  return acc;
}

/// sum_m P_m(log X) X^{s_m} for the smooth weight psi.
inline cplx smooth_main_term(const CutoffProblem& p, const TestFunction& psi, double X) {
  cplx total = 0;
  for (const auto& pole : p.poles) {
    if (pole.order() < 1) throw std::invalid_argument("smooth_main_term: missing Laurent coefficients");
    std::vector<cplx> m(pole.order());
    for (int l = 0; l < pole.order(); ++l) m[l] = mellin(psi, pole.s, l) / factorial(l);
    total += eval_log_poly(main_term_polynomial(pole, m), X) * std::exp(pole.s * std::log(X));
  }
  return total;
}

struct SharpEstimate {
  cplx main;
  std::vector<cplx> polynomial;  // P in powers of log X
  double exponent = 0;           // predicted error exponent
  double delta = 0;              // balanced mollifier width
};

/**
 * P(log X) X^{s_0} with P from the indicator limit of the smooth formula,
 * error exponent max((a + sigma0 A)/(1 + A), Re s_1) and delta = X^{-(sigma0 - a)/(1 + A)}.
 */
inline SharpEstimate sharp_cutoff_estimate(const CutoffProblem& p, double X, bool signed_ok = false) {
  if (!p.nonnegative && !signed_ok)
    throw std::invalid_argument("sharp_cutoff_estimate: signed coefficients need the extra short-interval assumption");
  if (p.poles.empty()) throw std::invalid_argument("sharp_cutoff_estimate: no leading pole");
  const Pole& lead = p.poles.front();
  std::vector<cplx> m(lead.order());
  for (int l = 0; l < lead.order(); ++l) m[l] = (l % 2 ? -1.0 : 1.0) / std::pow(lead.s, l + 1);
  SharpEstimate out;
  out.polynomial = main_term_polynomial(lead, m);
  out.main = eval_log_poly(out.polynomial, X) * std::exp(lead.s * std::log(X));
  out.exponent = (p.a + p.sigma0 * p.A) / (1.0 + p.A);
  if (p.poles.size() > 1) out.exponent = std::max(out.exponent, p.poles[1].s.real());
  out.delta = std::pow(X, -(p.sigma0 - p.a) / (1.0 + p.A));
  return out;
}

// ---------------------------------------------------------------------------
// Direct sums

/// sum a_n psi(c_n / X), terms with c_n beyond the support skipped.
inline double smooth_sum(const CutoffProblem& p, const TestFunction& psi, double X) {
  NeumaierSum acc;
  const double limit = psi.support_end * X;
  for (i64 n = 1; p.count == 0 || n <= p.count; ++n) {
    const double c = p.scale(n);
    if (c >= limit) {
      if (p.count == 0) break;
      continue;
    }
    const double w = psi(c / X);
    if (w != 0) acc.add(p.coeff(n) * w);
  }
  return acc.value();
}

/// sum_{c_n <= X} a_n.
inline double sharp_sum(const CutoffProblem& p, double X) {
  NeumaierSum acc;
  for (i64 n = 1; p.count == 0 || n <= p.count; ++n) {
    const double c = p.scale(n);
    if (c > X) {
      if (p.count == 0) break;
      continue;
    }
    acc.add(p.coeff(n));
  }
  return acc.value();
}

/// sum over samples of psi(c_r / X) |L|^{2n}.
inline double smooth_moment(const std::vector<double>& abs_values, const std::vector<double>& c_r,
                            const TestFunction& psi, double X, int n) {
  if (abs_values.size() != c_r.size()) throw std::invalid_argument("smooth_moment: length mismatch");
  NeumaierSum acc;
  for (std::size_t i = 0; i < c_r.size(); ++i) {
    const double w = psi(c_r[i] / X);
    if (w != 0) acc.add(w * std::pow(abs_values[i], 2 * n));
  }
  return acc.value();
}

}  // namespace addtwist
