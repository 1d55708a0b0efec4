#pragma once
// Identity suites shared by the CLI `verify` commands and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "addtwist/characters.hpp"
#include "addtwist/forms.hpp"
#include "addtwist/orbits.hpp"
#include "addtwist/twist_eval.hpp"

namespace addtwist {

using Rng = std::mt19937_64;

inline bool is_prime(i64 n) {
  const auto f = factorize(n);
  return n > 1 && f.size() == 1 && f[0].e == 1;
}

inline i64 uniform_int(Rng& rng, i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); }

/// Uniform random point of the orbit with 2 <= c <= cmax.
inline TwistPoint random_point(Rng& rng, int q, Orbit orbit, i64 cmax) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const i64 c = uniform_int(rng, 2, cmax);
    if (orbit == Orbit::Infinity && c % q != 0) continue;
    if (orbit == Orbit::Zero && std::gcd(c, i64(q)) != 1) continue;
    const i64 a = uniform_int(rng, 1, c - 1);
    if (std::gcd(a, c) != 1) continue;
    return make_point(a, c, orbit, q);
  }
  throw std::invalid_argument("random_point: no admissible denominator up to " + std::to_string(cmax));
}

// ---------------------------------------------------------------------------

struct SuiteResult {
  std::string name;
  std::size_t count = 0;
  double max_residual = 0;
  std::string worst = {};  // description of the worst case
  void record(double r, const std::string& what) {
    ++count;
    if (r > max_residual || count == 1) {
      max_residual = std::max(max_residual, r);
      worst = what;
    }
  }
};

inline std::string describe(const TwistPoint& p) {
  return std::to_string(p.a) + "/" + std::to_string(p.c) + " (" + to_string(p.orbit) + ")";
}

inline std::string describe(const Mat2& g) {
  return "(" + std::to_string(g.a) + "," + std::to_string(g.b) + ";" + std::to_string(g.c) + "," +
         std::to_string(g.d) + ")";
}

/// Functional-equation residuals at `trials` random points and s in {k/2, k/2 + 0.7i, (k+1)/2 + 1.3i}.
inline SuiteResult fe_suite(const TwistEvaluator& ev, Orbit orbit, int trials, i64 cmax, std::uint64_t seed) {
  const int k = ev.form().weight();
  const int q = ev.form().level();
  Rng rng(seed);
  SuiteResult r{"functional equation " + to_string(orbit)};
  const cplx ss[] = {cplx(0.5 * k, 0), cplx(0.5 * k, 0.7), cplx(0.5 * (k + 1), 1.3)};
  for (int t = 0; t < trials; ++t) {
    const auto p = random_point(rng, q, orbit, cmax);
    for (cplx s : ss) {
      const double res = functional_equation_residual(ev, p, s);
      r.record(res, describe(p) + " s=" + std::to_string(s.real()) + "+" + std::to_string(s.imag()) + "i");
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

/// Random element of Gamma_0(q) with 0 < c <= cmax_mult q and Im(gamma z) >= y_min for every z.
inline Mat2 random_gamma0(Rng& rng, int q, i64 cmax_mult, const std::vector<cplx>& zs, double y_min) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const i64 c = q * uniform_int(rng, 1, cmax_mult);
    const i64 d = uniform_int(rng, -c, c);
    if (std::gcd(c, d) != 1) continue;
    // a d - b c = 1
    const i64 a = mod_inverse(floor_mod(d, c), c);
    const Mat2 g{a, (a * d - 1) / c, c, d};
    bool ok = g.det() == 1;
    for (cplx z : zs) ok = ok && mobius_apply(g, z).imag() >= y_min;
    if (ok) return g;
  }
  throw std::runtime_error("random_gamma0: no admissible matrix found");
}

struct AntiderivativeResult {
  SuiteResult cross{"antiderivative vs series"};
  SuiteResult spread{"antiderivative z-spread"};
};

/// The antiderivative formula at three base points against the incomplete-gamma central value.
inline AntiderivativeResult antiderivative_suite(const TwistEvaluator& ev, int trials, std::uint64_t seed, double y_min = 1e-3,
                                   i64 cmax_mult = 6) {
  const auto& f = ev.form();
  const std::vector<cplx> zs = {cplx(0, 1), cplx(0.3, 0.8), cplx(-0.4, 1.7)};
  Rng rng(seed);
  AntiderivativeResult out;
  for (int t = 0; t < trials; ++t) {
    const Mat2 g = random_gamma0(rng, f.level(), cmax_mult, zs, y_min);
    const auto p = make_point(g.a, g.c, Orbit::Infinity, f.level());
    const cplx ref = ev.central_value(p, 1e-13).value;
    const double scale = 1.0 + std::abs(ref);
    std::vector<cplx> vals;
    for (cplx z : zs) {
      vals.push_back(antiderivative_central_value(f, g, z, y_min));
      out.cross.record(std::abs(vals.back() - ref) / scale, describe(g));
    }
    double spread = 0;
    for (const auto& v : vals)
      for (const auto& w : vals) spread = std::max(spread, std::abs(v - w));
    out.spread.record(spread / scale, describe(g));
  }
  return out;
}

// ---------------------------------------------------------------------------

inline Poly poly_derivative(const Poly& P) {
  Poly out(P.size() > 1 ? P.size() - 1 : 1, 0.0);
  for (std::size_t i = 1; i < P.size(); ++i) out[i - 1] = double(i) * P[i];
  return out;
}

inline cplx poly_eval(const Poly& P, cplx x) {
  cplx acc = 0;
  for (std::size_t i = P.size(); i-- > 0;) acc = acc * x + P[i];
  return acc;
}

/// int_w^{i infinity} f(u) P(u) du = sum_j (-1)^{j+1} I_{j+1}(w) P^{(j)}(w).
inline cplx polynomial_period(const CuspForm& f, const Poly& P, cplx w, double y_min) {
  cplx acc = 0;
  Poly D = P;
  for (std::size_t j = 0; j < P.size(); ++j) {
    acc += (j % 2 ? 1.0 : -1.0) * antiderivative(f, int(j) + 1, w, y_min) * poly_eval(D, w);
    D = poly_derivative(D);
  }
  return acc;
}

/**
 * int_{g infinity}^{i infinity} f(z) z^l dz by integration by parts, split at
 * z* = g w* with w* = (-d + i)/c, so that both pieces sit at height 1/c.
 * Independent of the incomplete-gamma special values behind period_moment.
 */
inline cplx period_moment_oracle(const CuspForm& f, const Mat2& g, int l) {
  const int k = f.weight();
  if (g.c <= 0 || g.c % f.level() != 0 || g.det() != 1)
    throw std::invalid_argument("period_moment_oracle: need g in Gamma_0(q) with c > 0");
  const double c = double(g.c);
  const cplx ws(-double(g.d) / c, 1.0 / c);
  const cplx zs = mobius_apply(g, ws);
  const double y_min = 0.5 / c;
  Poly zl(l + 1, 0.0);
  zl[l] = 1.0;
  // (a u + b)^l (c u + d)^{k-2-l}
  Poly Q{1.0};
  for (int i = 0; i < l; ++i) Q = poly_mul(Q, Poly{double(g.b), double(g.a)});
  for (int i = 0; i < k - 2 - l; ++i) Q = poly_mul(Q, Poly{double(g.d), c});
  return polynomial_period(f, zl, zs, y_min) - polynomial_period(f, Q, ws, y_min);
}

/// Period moments from special values against the integration-by-parts oracle; the residual is
/// relative to the largest moment of the matrix, or absolute when that is below 1.
inline SuiteResult eichler_shimura_suite(const TwistEvaluator& ev, int trials, std::uint64_t seed,
                                         i64 cmax_mult = 6) {
  const auto& f = ev.form();
  const int k = f.weight();
  Rng rng(seed);
  SuiteResult r{"period moments"};
  for (int t = 0; t < trials; ++t) {
    const Mat2 g = random_gamma0(rng, f.level(), cmax_mult, {}, 0.0);
    std::vector<cplx> lhs, rhs;
    double scale = 0;
    for (int l = 0; l <= k - 2; ++l) {
      lhs.push_back(period_moment(ev, g.a, g.c, l));
      rhs.push_back(period_moment_oracle(f, g, l));
      scale = std::max(scale, std::abs(rhs.back()));
    }
    for (int l = 0; l <= k - 2; ++l)
      r.record(std::abs(lhs[l] - rhs[l]) / std::max(scale, 1.0), describe(g) + " l=" + std::to_string(l));
  }
  return r;
}

/// Random SL_2(Z) word in S and T^n, |n| <= 3, of length 1..4.
inline Mat2 random_sl2(Rng& rng) {
  const Mat2 S{0, -1, 1, 0};
  Mat2 g{1, 0, 0, 1};
  const int len = int(uniform_int(rng, 1, 4));
  for (int i = 0; i < len; ++i) {
    const i64 n = uniform_int(rng, -3, 3);
    g = g * Mat2{1, n, 0, 1} * S;
  }
  return g;
}

inline constexpr i64 kCocycleMaxC = 60;

inline SuiteResult cocycle_suite(const TwistEvaluator& ev, int pairs, std::uint64_t seed) {
  if (ev.form().level() != 1) throw std::invalid_argument("cocycle_suite: needs a level 1 form");
  Rng rng(seed);
  SuiteResult r{"cocycle"};
  for (int t = 0; t < pairs; ++t) {
    Mat2 g1, g2;
    do {
      g1 = random_sl2(rng);
      g2 = random_sl2(rng);
    } while (std::abs(g1.c) > kCocycleMaxC || std::abs(g2.c) > kCocycleMaxC || std::abs((g1 * g2).c) > kCocycleMaxC);
    r.record(cocycle_residual(ev, g1, g2), describe(g1) + " " + describe(g2));
  }
  return r;
}

// ---------------------------------------------------------------------------

/// prod_j eta(m_j z)^{r_j} by direct truncated multiplication of (1 - q^n) factors.
inline std::vector<long double> naive_eta_product(const EtaRecipe& recipe, int N) {
  int w24 = 0;
  for (auto [m, r] : recipe) w24 += m * r;
  const int shift = w24 / 24;
  std::vector<long double> p(N + 1, 0.0L);
  p[0] = 1;
  for (auto [m, r] : recipe)
    for (int rep = 0; rep < std::abs(r); ++rep)
      for (int n = 1; m * n <= N; ++n) {
        const int s = m * n;
        if (r > 0) {
          for (int i = N; i >= s; --i) p[i] -= p[i - s];
        } else {
          for (int i = s; i <= N; ++i) p[i] += p[i - s];
        }
      }
  std::vector<long double> a(N + 1, 0.0L);
  for (int n = shift; n <= N; ++n) a[n] = p[n - shift];
  return a;
}

struct EtaCheck {
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  std::size_t hecke_checked = 0;
  std::size_t hecke_failures = 0;
};

/// Exact expansion against the naive product, plus a(mn) = a(m) a(n) for coprime m, n
/// and a(p^2) = a(p)^2 - p^{k-1} for p not dividing q.
inline EtaCheck eta_check(const CuspForm& f, int N = 400) {
  EtaCheck r;
  const auto naive = naive_eta_product(f.recipe(), N);
  for (int n = 1; n <= N; ++n) {
    ++r.compared;
    if (std::abs(double(naive[n]) - f.coeff_d(n)) > 1e-9 * (1.0 + std::abs(f.coeff_d(n)))) ++r.mismatches;
  }
  const int M = int(std::sqrt(double(std::min<std::int64_t>(f.coeff_count(), 4000))));
  for (int m = 2; m <= M; ++m)
    for (int n = m + 1; n <= M; ++n) {
      if (std::gcd(m, n) != 1) continue;
      ++r.hecke_checked;
      if (f.coeff(m * n) != f.coeff(m) * f.coeff(n)) ++r.hecke_failures;
    }
  for (int p = 2; p <= M; ++p) {
    if (!is_prime(p) || f.level() % p == 0) continue;
    ++r.hecke_checked;
    coeff_t pk = 1;
    for (int i = 0; i < f.weight() - 1; ++i) pk *= p;
    if (f.coeff(p * p) != f.coeff(p) * f.coeff(p) - pk) ++r.hecke_failures;
  }
  return r;
}

// ---------------------------------------------------------------------------

struct BirchStevensSuite {
  SuiteResult direct{"birch-stevens direct"};
  SuiteResult inversion{"birch-stevens inversion"};
  std::vector<BirchStevensResidual> rows;
};

/// Every character modulo every composite c <= cmax with (c, q) = 1.
inline BirchStevensSuite birch_stevens_suite(const TwistEvaluator& ev, i64 cmax, int workers) {
  const i64 q = ev.form().level();
  std::vector<i64> moduli, need;
  for (i64 c = 4; c <= cmax; ++c) {
    if (std::gcd(c, q) != 1 || is_prime(c)) continue;
    moduli.push_back(c);
    for (i64 d : divisors(c)) need.push_back(d);
  }
  AdditiveCache cache(ev);
  cache.fill(need, workers);
  BirchStevensSuite out;
  for (i64 c : moduli)
    for (const auto& r : birch_stevens_modulus(cache, c)) {
      out.rows.push_back(r);
      const std::string what = "c=" + std::to_string(c) + " chi#" + std::to_string(r.index);
      out.direct.record(r.direct, what);
      out.inversion.record(r.inversion, what);
    }
  return out;
}

}  // namespace addtwist
