#pragma once
// Twist points a/c and the sample sets T(X) for the two cusp orbits of
// Gamma_0(q): the orbit of infinity (q | c) and the orbit of 0 ((c, q) = 1).

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "addtwist/core/arith.hpp"
#include "addtwist/forms.hpp"

namespace addtwist {

enum class Orbit { Infinity, Zero };

inline std::string to_string(Orbit o) { return o == Orbit::Infinity ? "inf" : "zero"; }

inline Orbit parse_orbit(const std::string& s) {
  if (s == "inf" || s == "infinity") return Orbit::Infinity;
  if (s == "zero" || s == "0") return Orbit::Zero;
  throw std::invalid_argument("unknown orbit '" + s + "' (expected inf|zero)");
}

/**
 * A rational point a/c, reduced so that 0 <= a < c, tagged with its cusp orbit.
 * d_inv is the entry d of a Gamma_0(q)-type matrix sending infinity to a/c:
 * a^{-1} mod c on the infinity orbit and (a q)^{-1} mod c on the zero orbit.
 * c_r is the scaled denominator: c, respectively c sqrt(q).
 * c = 0 encodes the cusp infinity itself.
 */
struct TwistPoint {
  i64 a = 0;
  i64 c = 0;
  Orbit orbit = Orbit::Infinity;
  i64 d_inv = 0;
  double c_r = 0;
  int q = 1;

  bool is_infinity() const { return c == 0; }
  bool operator==(const TwistPoint& o) const { return a == o.a && c == o.c && orbit == o.orbit && q == o.q; }
};

inline TwistPoint infinity_point(int q = 1) { return {0, 0, Orbit::Infinity, 0, 0.0, q}; }

/// Validates and reduces (a, c); throws std::invalid_argument on a bad point.
inline TwistPoint make_point(i64 a, i64 c, Orbit orbit, int q) {
  if (q < 1) throw std::invalid_argument("make_point: level must be >= 1");
  if (c == 0) return infinity_point(q);
  if (c < 0) throw std::invalid_argument("make_point: denominator must be positive");
  TwistPoint p;
  p.q = q;
  p.c = c;
  p.a = floor_mod(a, c);
  p.orbit = orbit;
  if (std::gcd(p.a, c) != 1)
    throw std::invalid_argument("make_point: gcd(" + std::to_string(a) + "," + std::to_string(c) + ") != 1");
  if (orbit == Orbit::Infinity) {
    if (c % q != 0)
      throw std::invalid_argument("make_point: level " + std::to_string(q) + " does not divide c = " +
                                  std::to_string(c) + " (infinity orbit)");
    p.d_inv = mod_inverse(p.a, c);
    p.c_r = double(c);
  } else {
    if (std::gcd(c, i64(q)) != 1)
      throw std::invalid_argument("make_point: gcd(c, q) != 1 for c = " + std::to_string(c) + " (zero orbit)");
    p.d_inv = mod_inverse(floor_mod(p.a * q, c), c);
    p.c_r = double(c) * std::sqrt(double(q));
  }
  return p;
}

/// Point carrying the natural orbit for (c, q): infinity when q | c, zero when (c, q) = 1.
inline TwistPoint make_point_auto(i64 a, i64 c, int q) {
  if (c % q == 0) return make_point(a, c, Orbit::Infinity, q);
  return make_point(a, c, Orbit::Zero, q);
}

/// The point -d/c of the functional equation (same orbit).
inline TwistPoint dual_point(const TwistPoint& p) {
  if (p.is_infinity()) return p;
  return make_point(-p.d_inv, p.c, p.orbit, p.q);
}

inline bool point_less(const TwistPoint& x, const TwistPoint& y) {
  return std::tie(x.c, x.a) < std::tie(y.c, y.a);
}

// ---------------------------------------------------------------------------

enum class CutoffMode { PlainC, ScaledC };

struct OrbitQuery {
  int q = 1;
  Orbit orbit = Orbit::Infinity;
  double X = 1;
  // zero orbit only: cut at c <= X (default) or at c sqrt(q) <= X
  CutoffMode cutoff = CutoffMode::PlainC;
};

/// All reduced fractions 0 < a < c in the requested orbit with cutoff X, sorted by (c, a).
inline std::vector<TwistPoint> enumerate(const OrbitQuery& query) {
  if (query.X < 1) throw std::invalid_argument("enumerate: X must be >= 1");
  const i64 q = query.q;
  double cmax = query.X;
  if (query.orbit == Orbit::Zero && query.cutoff == CutoffMode::ScaledC) cmax = query.X / std::sqrt(double(q));
  const i64 C = static_cast<i64>(std::floor(cmax + 1e-9));
  std::vector<TwistPoint> out;
  for (i64 c = 2; c <= C; ++c) {
    if (query.orbit == Orbit::Infinity && c % q != 0) continue;
    if (query.orbit == Orbit::Zero && std::gcd(c, q) != 1) continue;
    for (i64 a = 1; a < c; ++a)
      if (std::gcd(a, c) == 1) out.push_back(make_point(a, c, query.orbit, int(q)));
  }
  return out;
}

inline std::size_t count_points(const OrbitQuery& query) {
  const i64 q = query.q;
  double cmax = query.X;
  if (query.orbit == Orbit::Zero && query.cutoff == CutoffMode::ScaledC) cmax = query.X / std::sqrt(double(q));
  const i64 C = static_cast<i64>(std::floor(cmax + 1e-9));
  std::size_t n = 0;
  for (i64 c = 2; c <= C; ++c) {
    if (query.orbit == Orbit::Infinity && c % q != 0) continue;
    if (query.orbit == Orbit::Zero && std::gcd(c, q) != 1) continue;
    n += std::size_t(euler_phi(c));
  }
  return n;
}

struct CountRatio {
  double X;
  std::size_t count;
  double ratio;  // #T(X) pi vol / X^2
};

/// #T(X) pi vol(Gamma_0(q)) / X^2 for each X of the sweep (infinity orbit, or
/// zero orbit under its configured cutoff).
inline std::vector<CountRatio> count_asymptotic_check(int q, Orbit orbit, const std::vector<double>& xs,
                                                      CutoffMode cutoff = CutoffMode::PlainC) {
  std::vector<CountRatio> out;
  const double vol = volume(q);
  for (double X : xs) {
    const std::size_t n = count_points({q, orbit, X, cutoff});
    out.push_back({X, n, double(n) * kPi * vol / (X * X)});
  }
  return out;
}

}  // namespace addtwist
