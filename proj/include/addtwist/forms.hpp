#pragma once
/**
 * @file forms.hpp
 * @brief Cusp-form data: eta-quotient expansions, Hecke normalization,
 *        hyperbolic volumes, Petersson norms and Fricke eigenvalues.
 *
 * A CuspForm is an immutable value sharing its coefficient table.  Growing
 * the table goes through extend_coefficients(), which builds a new value and
 * leaves existing readers untouched.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "addtwist/core/arith.hpp"
#include "addtwist/core/numeric.hpp"

namespace addtwist {

/// Exact Fourier coefficient type.  Delta's coefficients pass 2^63 before
/// n = 2000, so 128 bits are used internally.
using coeff_t = __int128;

/// Thrown when an operation needs more Fourier coefficients than are cached.
class InsufficientCoefficients : public std::runtime_error {
 public:
  InsufficientCoefficients(const std::string& form_id, std::int64_t required, std::int64_t available)
      : std::runtime_error("insufficient coefficients for form '" + form_id + "': need " +
                           std::to_string(required) + ", have " + std::to_string(available)),
        required_(required) {}
  std::int64_t required() const noexcept { return required_; }

 private:
  std::int64_t required_;
};

struct EtaFactor {
  int multiplier;  // m_j
  int exponent;    // r_j
  bool operator==(const EtaFactor&) const = default;
};
using EtaRecipe = std::vector<EtaFactor>;

inline std::string to_string(coeff_t v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  while (u) {
    s.push_back(char('0' + int(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

inline std::string recipe_to_string(const EtaRecipe& r) {
  std::string out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(r[i].multiplier) + "^" + std::to_string(r[i].exponent);
  }
  return out;
}

namespace detail {

/// Exponents and signs of the pentagonal-number series prod (1 - q^n) up to degree N.
inline std::vector<std::pair<std::int64_t, int>> pentagonal_terms(std::int64_t N) {
  std::vector<std::pair<std::int64_t, int>> out{{0, 1}};
  for (std::int64_t k = 1;; ++k) {
    const std::int64_t g1 = k * (3 * k - 1) / 2, g2 = k * (3 * k + 1) / 2;
    if (g1 > N) break;
    const int sign = (k % 2) ? -1 : 1;
    out.push_back({g1, sign});
    if (g2 <= N) out.push_back({g2, sign});
  }
  return out;
}

inline coeff_t checked_add(coeff_t a, coeff_t b) {
  coeff_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("eta expansion: 128-bit overflow");
  return r;
}

}  // namespace detail

/**
 * Exact coefficients a(1..N) of prod_j eta(m_j z)^{r_j}; index n holds a(n),
 * index 0 is zero.  Each factor is applied by repeated multiplication (or
 * division, for negative exponents) by the sparse pentagonal series in q^{m_j}.
 */
inline std::vector<coeff_t> expand_eta_quotient(const EtaRecipe& recipe, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("expand_eta_quotient: N must be >= 1");
  if (recipe.empty()) throw std::invalid_argument("expand_eta_quotient: empty recipe");
  std::int64_t weight24 = 0;
  for (auto [m, r] : recipe) {
    if (m < 1) throw std::invalid_argument("expand_eta_quotient: multiplier must be positive");
    weight24 += std::int64_t(m) * r;
  }
  if (weight24 % 24 != 0)
    throw std::invalid_argument("expand_eta_quotient: sum m_j r_j = " + std::to_string(weight24) +
                                " is not divisible by 24");
  const std::int64_t shift = weight24 / 24;
  if (shift < 1) throw std::invalid_argument("expand_eta_quotient: recipe does not vanish at infinity");

  // P(q) = prod_j E(q^{m_j})^{r_j}, needed to degree N - shift.
  const std::int64_t deg = N - shift;
  std::vector<coeff_t> p(std::max<std::int64_t>(deg, 0) + 1, 0);
  if (deg >= 0) p[0] = 1;
  for (auto [m, r] : recipe) {
    const auto pent = detail::pentagonal_terms(deg / m);
    for (int rep = 0; rep < std::abs(r); ++rep) {
      if (r > 0) {
        // in place, descending: p[n] += sum_{g>0} sign * p[n - m g]
        for (std::int64_t n = deg; n >= 1; --n) {
          coeff_t acc = p[n];
          for (std::size_t t = 1; t < pent.size(); ++t) {
            const std::int64_t off = pent[t].first * m;
            if (off > n) break;
            acc = pent[t].second > 0 ? detail::checked_add(acc, p[n - off])
                                     : detail::checked_add(acc, -p[n - off]);
          }
          p[n] = acc;
        }
      } else {
        // in place, ascending: p[n] -= sum_{g>0} sign * p[n - m g]
        for (std::int64_t n = 1; n <= deg; ++n) {
          coeff_t acc = p[n];
          for (std::size_t t = 1; t < pent.size(); ++t) {
            const std::int64_t off = pent[t].first * m;
            if (off > n) break;
            acc = pent[t].second > 0 ? detail::checked_add(acc, -p[n - off])
                                     : detail::checked_add(acc, p[n - off]);
          }
          p[n] = acc;
        }
      }
    }
  }
  std::vector<coeff_t> a(N + 1, 0);
  for (std::int64_t n = shift; n <= N; ++n) a[n] = p[n - shift];
  return a;
}

// ---------------------------------------------------------------------------
// Registry

struct RegistryEntry {
  std::string form_id;
  int q;
  int k;
  EtaRecipe recipe;
};

/// The curated newforms: Delta, the level 11 weight 2 form and the level 5 weight 4 form.
inline const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries = {
      {"delta", 1, 12, {{1, 24}}},
      {"11.2.a", 11, 2, {{1, 2}, {11, 2}}},
      {"5.4.a", 5, 4, {{1, 4}, {5, 4}}},
  };
  return entries;
}

inline const RegistryEntry& registry_entry(const std::string& form_id) {
  for (const auto& e : registry())
    if (e.form_id == form_id) return e;
  throw std::invalid_argument("unknown form_id '" + form_id + "'");
}

/// Plain-text manifest: one "form_id q k m^r m^r ..." line per form, '#' comments.
inline std::string write_manifest(const std::vector<RegistryEntry>& entries) {
  std::ostringstream os;
  os << "# form_id q k recipe\n";
  for (const auto& e : entries) os << e.form_id << ' ' << e.q << ' ' << e.k << ' ' << recipe_to_string(e.recipe) << '\n';
  return os.str();
}

inline std::vector<RegistryEntry> parse_manifest(const std::string& text) {
  std::vector<RegistryEntry> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    RegistryEntry e;
    if (!(ls >> e.form_id)) continue;
    if (!(ls >> e.q >> e.k)) throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": expected q k");
    std::string tok;
    while (ls >> tok) {
      const auto caret = tok.find('^');
      if (caret == std::string::npos) throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": bad factor '" + tok + "'");
      e.recipe.push_back({std::stoi(tok.substr(0, caret)), std::stoi(tok.substr(caret + 1))});
    }
    if (e.recipe.empty()) throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": empty recipe");
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CuspForm

inline constexpr std::int64_t kDefaultCoeffCount = 200000;

class CuspForm {
 public:
  CuspForm(std::string form_id, int q, int k, EtaRecipe recipe, std::vector<coeff_t> coeffs) {
    if (k < 2 || k % 2) throw std::invalid_argument("CuspForm: weight must be even and >= 2");
    if (q < 1) throw std::invalid_argument("CuspForm: level must be positive");
    if (coeffs.size() < 2 || coeffs[1] != 1) throw std::invalid_argument("CuspForm: a(1) must equal 1");
    auto data = std::make_shared<Data>();
    auto& d = *data;
    d.form_id = std::move(form_id);
    d.q = q;
    d.k = k;
    d.recipe = std::move(recipe);
    d.exact = std::move(coeffs);
    d.approx.resize(d.exact.size());
    for (std::size_t n = 0; n < d.exact.size(); ++n) d.approx[n] = static_cast<double>(d.exact[n]);
    data_ = std::move(data);
  }

  /// Expands a registry recipe to N coefficients.
  static CuspForm from_registry(const std::string& form_id, std::int64_t N = kDefaultCoeffCount) {
    const auto& e = registry_entry(form_id);
    return CuspForm(e.form_id, e.q, e.k, e.recipe, expand_eta_quotient(e.recipe, N));
  }

  const std::string& form_id() const { return data_->form_id; }
  int level() const { return data_->q; }
  int weight() const { return data_->k; }
  const EtaRecipe& recipe() const { return data_->recipe; }
  std::int64_t coeff_count() const { return std::int64_t(data_->exact.size()) - 1; }

  coeff_t coeff(std::int64_t n) const {
    require(n);
    return data_->exact[n];
  }
  double coeff_d(std::int64_t n) const {
    require(n);
    return data_->approx[n];
  }
  /// Raw table, index n holds a(n) as double; index 0 is 0.
  const std::vector<double>& coeffs_d() const { return data_->approx; }

  void require(std::int64_t n) const {
    if (n > coeff_count()) throw InsufficientCoefficients(form_id(), n, coeff_count());
  }

 private:
  struct Data {
    std::string form_id;
    int q = 1, k = 2;
    EtaRecipe recipe;
    std::vector<coeff_t> exact;
    std::vector<double> approx;
  };
  std::shared_ptr<const Data> data_;
};

/// New form value with at least N coefficients; exclusive with respect to the
/// caller's own bookkeeping (the old value stays valid).
inline CuspForm extend_coefficients(const CuspForm& f, std::int64_t N) {
  if (N <= f.coeff_count()) return f;
  return CuspForm(f.form_id(), f.level(), f.weight(), f.recipe(), expand_eta_quotient(f.recipe(), N));
}

/// lambda_f(n) = a_f(n) / n^{(k-1)/2}.
inline double hecke_eigenvalue(const CuspForm& f, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("hecke_eigenvalue: n must be >= 1");
  return f.coeff_d(n) / std::pow(double(n), 0.5 * (f.weight() - 1));
}

/// vol(Gamma_0(q) \ H) = (pi / 3) [SL2(Z) : Gamma_0(q)].
inline double volume(i64 q) {
  if (q < 1) throw std::invalid_argument("volume: q must be >= 1");
  return kPi / 3.0 * double(gamma0_index(q));
}

// ---------------------------------------------------------------------------
// Fourier evaluation

/**
 * f(z) = sum a(n) e(nz), truncated once the Deligne-type majorant
 * 2 n^{k/2} e^{-2 pi n y} of the remaining tail drops below 1e-17 of the
 * absolute series mass.
 */
inline cplx evaluate(const CuspForm& f, cplx z) {
  const double y = z.imag();
  if (!(y > 0)) throw std::domain_error("evaluate: z must lie in the upper half-plane");
  const double decay = std::exp(-kTwoPi * y);
  const cplx step = std::exp(cplx(0, kTwoPi) * z);
  const double half_k = 0.5 * f.weight();
  const auto& a = f.coeffs_d();
  CompensatedSum<cplx> sum;
  double mass = 0;
  cplx qn = step;
  for (std::int64_t n = 1;; ++n) {
    if (n > f.coeff_count()) throw InsufficientCoefficients(f.form_id(), n, f.coeff_count());
    if (n % 64 == 0) qn = std::exp(cplx(0, kTwoPi * double(n)) * z);
    const cplx term = a[n] * qn;
    sum.add(term);
    mass += std::abs(term);
    if (n % 8 == 0) {
      const double bound_next = 2.0 * std::exp(half_k * std::log(double(n + 1)) - kTwoPi * y * double(n + 1));
      const double ratio = std::pow(double(n + 2) / double(n + 1), half_k) * decay;
      if (ratio < 1.0 && bound_next / (1.0 - ratio) < 1e-17 * std::max(mass, 1e-300)) break;
    }
    qn *= step;
  }
  return sum.value();
}

// ---------------------------------------------------------------------------
// Cosets and the Petersson norm

/// Right coset representatives of Gamma_0(q) \ SL2(Z) built from P^1(Z/q).
/// For prime q this is {I} together with (0 -1; 1 j), j = 0..q-1.
inline std::vector<Mat2> coset_representatives(i64 q) {
  if (q < 1) throw std::invalid_argument("coset_representatives: q must be >= 1");
  std::vector<Mat2> reps{Mat2{}};
  if (q == 1) return reps;
  const auto fac = factorize(q);
  if (fac.size() == 1 && fac[0].e == 1) {
    for (i64 j = 0; j < q; ++j) reps.push_back({0, -1, 1, j});
    return reps;
  }
  // (c : d) in P^1(Z/q), each class keyed by its smallest unit multiple
  auto normal_form = [q](i64 c, i64 d) {
    std::pair<i64, i64> best{q, q};
    for (i64 u = 1; u < q; ++u) {
      if (std::gcd(u, q) != 1) continue;
      best = std::min(best, std::pair<i64, i64>{floor_mod(u * c, q), floor_mod(u * d, q)});
    }
    return best;
  };
  std::vector<std::pair<i64, i64>> seen{{0, 1}};
  for (i64 c = 0; c < q; ++c)
    for (i64 d = 0; d < q; ++d) {
      if (std::gcd(std::gcd(c, d), q) != 1) continue;
      const auto nf = normal_form(c, d);
      if (std::find(seen.begin(), seen.end(), nf) != seen.end()) continue;
      seen.push_back(nf);
      // lift to a coprime integer pair and complete to SL2(Z)
      i64 cc = c == 0 ? q : c, dd = d;
      while (std::gcd(cc, dd) != 1) dd += q;
      const auto e = ext_gcd(cc, dd);  // cc x + dd y = 1
      reps.push_back({e.y, -e.x, cc, dd});
    }
  return reps;
}

/// g1 and g2 lie in the same right coset Gamma_0(q) g iff g1 g2^{-1} in Gamma_0(q).
inline bool same_gamma0_coset(const Mat2& g1, const Mat2& g2, i64 q) {
  return floor_mod((g1 * g2.inverse()).c, q) == 0;
}

inline cplx mobius_apply(const Mat2& g, cplx z) {
  return (double(g.a) * z + double(g.b)) / (double(g.c) * z + double(g.d));
}

struct PeterssonOptions {
  double tol = 1e-8;
  double y_max = 8.0;
};

namespace detail {
inline bool is_prime_or_one(i64 q) {
  if (q == 1) return true;
  auto fac = factorize(q);
  return fac.size() == 1 && fac[0].e == 1;
}

/// sum_n |a(n)|^2 Gamma(k-1, 4 pi n Y) / (4 pi n)^{k-1}: the exact value of
/// the integral of |f|^2 y^{k-2} over a width-one strip above height Y.
inline double strip_tail(const CuspForm& f, double Y) {
  const int k = f.weight();
  double sum = 0;
  for (std::int64_t n = 1; n <= f.coeff_count(); ++n) {
    const double x = 4 * kPi * n * Y;
    const double t = f.coeff_d(n) * f.coeff_d(n) * upper_gamma_int(k - 1, x) / std::pow(4 * kPi * n, k - 1);
    sum += t;
    if (x > 60 && t < 1e-30 * sum) break;
  }
  return sum;
}
}  // namespace detail

/**
 * ||f||^2 = integral over Gamma_0(q)\H of |f|^2 y^k dmu, as the sum over coset
 * representatives g_i of the integral over the standard fundamental domain F
 * of |f(g_i z)|^2 Im(g_i z)^k, truncated at y = y_max.  The part of F above
 * y_max is a width-one strip at the cusp infinity for the identity coset and a
 * width-q strip at the cusp 0 for the others; both are evaluated exactly by
 * Parseval.  Supports q = 1 and prime q.
 */
inline double petersson_norm_sq(const CuspForm& f, const PeterssonOptions& opt = {}) {
  const i64 q = f.level();
  if (!detail::is_prime_or_one(q))
    throw std::domain_error("petersson_norm_sq: only q = 1 or prime q supported");
  const auto reps = coset_representatives(q);
  if (i64(reps.size()) != gamma0_index(q)) throw std::logic_error("petersson_norm_sq: coset self-check failed");
  const int k = f.weight();
  auto integrand = [&](double x, double y) {
    const cplx z(x, y);
    double s = 0;
    for (const auto& g : reps) {
      const cplx w = mobius_apply(g, z);
      s += std::norm(evaluate(f, w)) * std::pow(w.imag(), k);
    }
    return s / (y * y);
  };
  auto column = [&](double x) {
    const double y0 = std::sqrt(1.0 - x * x);
    double total = 0;
    // dyadic breakpoints in y
    double lo = y0;
    for (double hi : {1.0, 2.0, 4.0, opt.y_max}) {
      if (hi <= lo) continue;
      hi = std::min(hi, opt.y_max);
      total += integrate_adaptive([&](double y) { return integrand(x, y); }, lo, hi, 0.0, 0.05 * opt.tol).value;
      lo = hi;
    }
    return total;
  };
  double body = 0;
  try {
    // the domain is symmetric in x for real coefficients, but integrate both halves for generality
    body = integrate_adaptive(column, -0.5, 0.0, 0.0, 0.2 * opt.tol).value +
           integrate_adaptive(column, 0.0, 0.5, 0.0, 0.2 * opt.tol).value;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("petersson_norm_sq: quadrature did not reach tol", e.estimate());
  }
  double tail = detail::strip_tail(f, opt.y_max);
  if (q > 1) tail += detail::strip_tail(f, opt.y_max / double(q));
  return body + tail;
}

/**
 * Fricke eigenvalue eps_f with f|_k W_q = eps_f f, estimated as
 * q^{k/2} (q z)^{-k} f(-1/(q z)) / f(z) at three sample points of height
 * about 2/sqrt(q).  Level one returns 1 (W_1 = S lies in SL2(Z)).
 */
inline cplx fricke_eigenvalue(const CuspForm& f) {
  const double q = f.level();
  if (f.level() == 1) return 1.0;
  const int k = f.weight();
  const double y = 2.0 / std::sqrt(q);
  std::vector<cplx> samples;
  for (double x : {0.1, 0.27, -0.33, 0.41, -0.12, 0.05}) {
    const cplx z(x, y);
    const cplx fz = evaluate(f, z);
    if (std::abs(fz) < 1e-12) continue;
    const cplx w = -1.0 / (q * z);
    const cplx val = std::pow(q, 0.5 * k) * std::pow(q * z, -k) * evaluate(f, w) / fz;
    samples.push_back(val);
    if (samples.size() == 3) break;
  }
  if (samples.size() < 3) throw std::runtime_error("fricke_eigenvalue: f vanishes at the sample points");
  for (const auto& s : samples)
    if (std::abs(s - samples[0]) > 1e-9) throw std::runtime_error("fricke_eigenvalue: inconsistent samples");
  cplx mean = (samples[0] + samples[1] + samples[2]) / 3.0;
  return mean;
}

struct FormConstants {
  double petersson_norm_sq = 0;
  double volume = 0;
  double variance_slope = 0;  // C_f
  cplx fricke_eigenvalue = 1.0;
};

/// C_f = (4 pi)^k ||f||^2 / ((k-1)! vol).
inline double variance_slope(int k, double norm_sq, double vol) {
  return std::pow(4 * kPi, k) * norm_sq / (factorial(k - 1) * vol);
}

inline FormConstants compute_constants(const CuspForm& f, const PeterssonOptions& opt = {}) {
  FormConstants c;
  c.petersson_norm_sq = petersson_norm_sq(f, opt);
  c.volume = volume(f.level());
  c.variance_slope = variance_slope(f.weight(), c.petersson_norm_sq, c.volume);
  c.fricke_eigenvalue = fricke_eigenvalue(f);
  return c;
}

// ---------------------------------------------------------------------------
// Binary coefficient cache: 8-byte magic, uint64 N, then N little-endian int64.

inline constexpr char kCoeffMagic[8] = {'A', 'T', 'C', 'O', 'E', 'F', '0', '1'};

namespace detail {
inline void put_le64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint64_t get_le64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("coefficient cache: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}
}  // namespace detail

/// Writes a(1..count).  Throws std::overflow_error if a coefficient does not fit in int64.
inline void write_coeff_cache(const std::string& path, const CuspForm& f, std::int64_t count) {
  count = std::min(count, f.coeff_count());
  for (std::int64_t n = 1; n <= count; ++n) {
    const coeff_t v = f.coeff(n);
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
      throw std::overflow_error("coefficient cache: a(" + std::to_string(n) + ") of '" + f.form_id() +
                                "' exceeds the 64-bit range");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("coefficient cache: cannot open " + path);
  os.write(kCoeffMagic, 8);
  detail::put_le64(os, std::uint64_t(count));
  for (std::int64_t n = 1; n <= count; ++n) detail::put_le64(os, std::uint64_t(std::int64_t(f.coeff(n))));
}

/// Reads a(1..N); result index n holds a(n).
inline std::vector<coeff_t> read_coeff_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("coefficient cache: cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCoeffMagic, 8) != 0)
    throw std::runtime_error("coefficient cache: bad magic in " + path);
  const std::uint64_t N = detail::get_le64(is);
  std::vector<coeff_t> a(N + 1, 0);
  for (std::uint64_t n = 1; n <= N; ++n) a[n] = static_cast<std::int64_t>(detail::get_le64(is));
  return a;
}

}  // namespace addtwist
