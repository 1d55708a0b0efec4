#pragma once
// Elementary number theory on 64-bit integers plus the integer 2x2 matrices
// used for Gamma_0(q) elements.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace addtwist {

using i64 = std::int64_t;

inline i64 floor_mod(i64 a, i64 m) {
  const i64 r = a % m;
  return r < 0 ? r + m : r;
}

/// Extended Euclid: returns (g, x, y) with a x + b y = g = gcd(a, b) >= 0.
struct EuclidResult {
  i64 g, x, y;
};
inline EuclidResult ext_gcd(i64 a, i64 b) {
  i64 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const i64 qt = old_r / r;
    old_r -= qt * r;
    std::swap(old_r, r);
    old_s -= qt * s;
    std::swap(old_s, s);
    old_t -= qt * t;
    std::swap(old_t, t);
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

/// Inverse of a modulo c, reduced to [0, c).  c = 1 gives 0.
inline i64 mod_inverse(i64 a, i64 c) {
  if (c < 1) throw std::invalid_argument("mod_inverse: modulus must be >= 1");
  const auto e = ext_gcd(floor_mod(a, c), c);
  if (e.g != 1)
    throw std::invalid_argument("mod_inverse: gcd(" + std::to_string(a) + "," + std::to_string(c) +
                                ") != 1");
  return floor_mod(e.x, c);
}

struct PrimePower {
  i64 p;
  int e;
};

inline std::vector<PrimePower> factorize(i64 n) {
  std::vector<PrimePower> out;
  for (i64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.push_back({p, e});
  }
  if (n > 1) out.push_back({n, 1});
  return out;
}

inline i64 ipow(i64 b, int e) {
  i64 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

inline i64 euler_phi(i64 n) {
  i64 r = n;
  for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
  return r;
}

inline int mobius(i64 n) {
  int m = 1;
  for (auto [p, e] : factorize(n)) {
    if (e > 1) return 0;
    m = -m;
  }
  return m;
}

inline std::vector<i64> divisors(i64 n) {
  std::vector<i64> lo, hi;
  for (i64 d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    lo.push_back(d);
    if (d * d != n) hi.push_back(n / d);
  }
  lo.insert(lo.end(), hi.rbegin(), hi.rend());
  return lo;
}

/// d(n) for 1 <= n <= N by sieve; index 0 unused.
inline std::vector<i64> divisor_count_table(i64 N) {
  std::vector<i64> d(N + 1, 0);
  for (i64 i = 1; i <= N; ++i)
    for (i64 j = i; j <= N; j += i) ++d[j];
  return d;
}

/// Index of Gamma_0(q) in SL2(Z): q prod_{p|q} (1 + 1/p).
inline i64 gamma0_index(i64 q) {
  i64 r = q;
  for (auto [p, e] : factorize(q)) r = r / p * (p + 1);
  return r;
}

/// Integer matrix (a b; c d).
struct Mat2 {
  i64 a = 1, b = 0, c = 0, d = 1;

  i64 det() const { return a * d - b * c; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  /// Inverse of a determinant-one matrix.
  Mat2 inverse() const { return {d, -b, -c, a}; }
  Mat2 negated() const { return {-a, -b, -c, -d}; }
  bool operator==(const Mat2&) const = default;
};

/// Completes the bottom row (c, d) or left column (a, c) of an SL2(Z) matrix:
/// returns (a b; c d) with a d - b c = 1 given coprime a, c.
inline Mat2 complete_column(i64 a, i64 c) {
  const auto e = ext_gcd(a, c);  // a x + c y = 1
  if (e.g != 1) throw std::invalid_argument("complete_column: entries not coprime");
  // a d - b c = 1 with d = x, b = -y
  return {a, -e.y, c, e.x};
}

}  // namespace addtwist
