#pragma once
/**
 * @file characters.hpp
 * @brief Dirichlet characters, Gauss sums and the bridge between additive and
 *        multiplicative twists.
 *
 * The group of characters mod c is built from the prime-power decomposition
 * of (Z/cZ)^x.  Each cyclic component has a fixed generator: the smallest
 * primitive root for odd p^e, -1 for 4, and the pair (-1, 5) for 2^e with
 * e >= 3.  A character is labelled by its exponent tuple (k_1, .., k_r),
 * read as a mixed-radix index with the first component least significant,
 * and takes the value e(sum k_i log_i(a) / n_i).
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "addtwist/core/arith.hpp"
#include "addtwist/core/numeric.hpp"
#include "addtwist/core/parallel.hpp"
#include "addtwist/forms.hpp"
#include "addtwist/orbits.hpp"
#include "addtwist/twist_eval.hpp"

namespace addtwist {

inline constexpr i64 kMaxCharacterModulus = 10000;
inline constexpr i64 kMaxFamilyModulus = 100;

struct CyclicComponent {
  i64 modulus;            // p^e
  i64 generator;          // generator mod p^e
  i64 order;              // n_i
  std::vector<i64> log;   // discrete log mod p^e, -1 off the units
  i64 prime;
  bool two_power_sign = false;  // the -1 factor of (Z/2^e)^x, e >= 3
};

struct DirichletCharacter {
  i64 modulus = 1;
  i64 index = 0;
  std::vector<i64> exponents;
  std::vector<cplx> values;  // length modulus, 0 off the units
  i64 order = 1;
  i64 conductor = 1;
  int parity = 1;            // chi(-1)
  i64 primitive_index = 0;   // index of chi* in the table mod conductor

  cplx operator()(i64 a) const { return values[std::size_t(floor_mod(a, modulus))]; }
  bool is_principal() const { return order == 1; }
  bool is_primitive() const { return conductor == modulus; }
};

inline i64 crt_combine(const std::vector<i64>& residues, const std::vector<i64>& moduli) {
  i64 x = 0, m = 1;
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    // x + m t = r_i (mod m_i)
    const i64 mi = moduli[i];
    const i64 t = floor_mod((residues[i] - x) % mi * mod_inverse(m % mi, mi), mi);
    x += m * t;
    m *= mi;
    x = floor_mod(x, m);
  }
  return x;
}

namespace detail {

inline i64 mult_order(i64 g, i64 m) {
  i64 x = g % m, o = 1;
  while (x != 1) {
    x = x * g % m;
    ++o;
  }
  return o;
}

inline CyclicComponent make_component(i64 mod, i64 gen, i64 order, i64 p, bool sign) {
  CyclicComponent c{mod, gen, order, std::vector<i64>(mod, -1), p, sign};
  i64 x = 1;
  for (i64 k = 0; k < order; ++k) {
    if (c.log[x] < 0) c.log[x] = k;
    x = x * gen % mod;
  }
  return c;
}

}  // namespace detail

/// The full dual group of (Z/cZ)^x.  Immutable; obtain shared tables via character_table().
class CharacterTable {
 public:
  explicit CharacterTable(i64 c, i64 ceiling = kMaxCharacterModulus) : c_(c) {
    if (c < 1) throw std::invalid_argument("CharacterTable: modulus must be >= 1");
    if (c > ceiling)
      throw std::invalid_argument("CharacterTable: modulus " + std::to_string(c) + " exceeds the ceiling " +
                                  std::to_string(ceiling));
    for (auto [p, e] : factorize(c)) {
      const i64 pe = ipow(p, e);
      if (p == 2) {
        if (e == 1) continue;
        if (e == 2) {
          comps_.push_back(detail::make_component(4, 3, 2, 2, true));
          continue;
        }
        // (Z/2^e)^x = <-1> x <5>; logs built jointly
        CyclicComponent sgn{pe, pe - 1, 2, std::vector<i64>(pe, -1), 2, true};
        CyclicComponent five{pe, 5, pe / 4, std::vector<i64>(pe, -1), 2, false};
        i64 x = 1;
        for (i64 j = 0; j < pe / 4; ++j) {
          sgn.log[x] = 0;
          five.log[x] = j;
          sgn.log[pe - x] = 1;
          five.log[pe - x] = j;
          x = x * 5 % pe;
        }
        comps_.push_back(std::move(sgn));
        comps_.push_back(std::move(five));
        continue;
      }
      const i64 phi = pe / p * (p - 1);
      i64 g = 2;
      while (detail::mult_order(g, pe) != phi || g % p == 0) ++g;
      comps_.push_back(detail::make_component(pe, g, phi, p, false));
    }
    phi_ = 1;
    exponent_ = 1;
    for (const auto& k : comps_) {
      phi_ *= k.order;
      exponent_ = std::lcm(exponent_, k.order);
    }
    roots_ = detail::roots_of_unity(exponent_);
  }

  i64 modulus() const { return c_; }
  i64 size() const { return phi_; }
  i64 group_exponent() const { return exponent_; }
  const std::vector<CyclicComponent>& components() const { return comps_; }

  std::vector<i64> exponents(i64 index) const {
    check_index(index);
    std::vector<i64> e(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      e[i] = index % comps_[i].order;
      index /= comps_[i].order;
    }
    return e;
  }

  i64 index_of(const std::vector<i64>& e) const {
    i64 idx = 0, mult = 1;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      idx += floor_mod(e[i], comps_[i].order) * mult;
      mult *= comps_[i].order;
    }
    return idx;
  }

  i64 multiply(i64 i, i64 j) const {
    auto a = exponents(i), b = exponents(j);
    for (std::size_t t = 0; t < a.size(); ++t) a[t] += b[t];
    return index_of(a);
  }

  i64 inverse(i64 i) const {
    auto a = exponents(i);
    for (auto& x : a) x = -x;
    return index_of(a);
  }

  /// chi(a) = e(phase / exponent); -1 when gcd(a, c) > 1.
  i64 phase(i64 index, i64 a) const { return phase_of(exponents(index), a); }

  cplx value(i64 index, i64 a) const {
    const i64 ph = phase(index, a);
    return ph < 0 ? cplx(0) : (*roots_)[ph];
  }

  i64 order(i64 index) const {
    const auto e = exponents(index);
    i64 o = 1;
    for (std::size_t i = 0; i < comps_.size(); ++i) o = std::lcm(o, comps_[i].order / std::gcd(e[i], comps_[i].order));
    return o;
  }

  i64 conductor(i64 index) const {
    const auto e = exponents(index);
    i64 cond = 1;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const auto& k = comps_[i];
      const i64 ord = k.order / std::gcd(e[i], k.order);
      if (k.prime != 2) {
        if (ord > 1) {
          i64 f = k.prime;
          for (i64 o = ord; o % k.prime == 0; o /= k.prime) f *= k.prime;
          cond *= f;
        }
        continue;
      }
      if (k.two_power_sign) {
        // the 2-part is settled together with the 5-component when present
        const bool has_five = i + 1 < comps_.size() && comps_[i + 1].prime == 2;
        const i64 ord5 = has_five ? comps_[i + 1].order / std::gcd(e[i + 1], comps_[i + 1].order) : 1;
        if (ord5 > 1) {
          i64 f = 4;
          for (i64 o = ord5; o % 2 == 0; o /= 2) f *= 2;
          cond *= f;
        } else if (ord > 1) {
          cond *= 4;
        }
      }
    }
    return cond;
  }

  int parity(i64 index) const { return c_ <= 2 ? 1 : (phase(index, c_ - 1) == 0 ? 1 : -1); }

  /// Index of the primitive character mod conductor(index) that induces this one.
  i64 primitive_index(i64 index) const;

  DirichletCharacter character(i64 index) const {
    DirichletCharacter ch;
    ch.modulus = c_;
    ch.index = index;
    ch.exponents = exponents(index);
    ch.values.assign(c_, 0.0);
    for (i64 a = 0; a < c_; ++a) {
      const i64 ph = phase_of(ch.exponents, a);
      if (ph >= 0) ch.values[a] = (*roots_)[ph];
    }
    if (c_ == 1) ch.values[0] = 1.0;
    ch.order = order(index);
    ch.conductor = conductor(index);
    ch.parity = parity(index);
    ch.primitive_index = primitive_index(index);
    return ch;
  }

  i64 principal_index() const { return 0; }

 private:
  void check_index(i64 index) const {
    if (index < 0 || index >= phi_)
      throw std::out_of_range("character index " + std::to_string(index) + " outside 0.." +
                              std::to_string(phi_ - 1));
  }

  i64 phase_of(const std::vector<i64>& e, i64 a) const {
    a = floor_mod(a, c_);
    if (std::gcd(a, c_) != 1) return c_ == 1 ? 0 : -1;
    i64 ph = 0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const auto& k = comps_[i];
      const i64 lg = k.log[a % k.modulus];
      ph += e[i] * lg % k.order * (exponent_ / k.order);
    }
    return ph % exponent_;
  }

  i64 c_;
  std::vector<CyclicComponent> comps_;
  i64 phi_ = 1, exponent_ = 1;
  std::shared_ptr<const std::vector<cplx>> roots_;
};

/// Shared immutable table for modulus c.
inline std::shared_ptr<const CharacterTable> character_table(i64 c) {
  static std::mutex mu;
  static std::map<i64, std::shared_ptr<const CharacterTable>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
  }
  auto t = std::make_shared<const CharacterTable>(c);
  std::lock_guard lock(mu);
  return cache.emplace(c, std::move(t)).first->second;
}

inline i64 CharacterTable::primitive_index(i64 index) const {
  const i64 f = conductor(index);
  if (f == c_) return index;
  const auto target = character_table(f);
  const auto& tc = target->components();
  std::vector<i64> e(tc.size());
  for (std::size_t j = 0; j < tc.size(); ++j) {
    // the -1 and 5 generators share the modulus 2^e, so CRT runs over distinct moduli
    std::vector<i64> r2, m2;
    for (std::size_t t = 0; t < tc.size(); ++t) {
      if (std::find(m2.begin(), m2.end(), tc[t].modulus) != m2.end()) continue;
      r2.push_back(tc[t].modulus == tc[j].modulus ? tc[j].generator : 1);
      m2.push_back(tc[t].modulus);
    }
    i64 a = crt_combine(r2, m2);
    i64 M = 1;
    for (i64 m : m2) M *= m;
    while (std::gcd(a, c_) != 1) a += M;
    const i64 ph = phase(index, a);
    const i64 num = ph * tc[j].order;
    if (num % exponent_ != 0) throw std::logic_error("primitive_index: inconsistent phase");
    e[j] = num / exponent_;
  }
  return target->index_of(e);
}

inline DirichletCharacter primitive_character(const DirichletCharacter& chi) {
  return character_table(chi.conductor)->character(chi.primitive_index);
}

inline DirichletCharacter conj_character(const DirichletCharacter& chi) {
  return character_table(chi.modulus)->character(character_table(chi.modulus)->inverse(chi.index));
}

/// tau(chi) = sum_{a mod c} chi(a) e(a/c).
inline cplx gauss_sum(const DirichletCharacter& chi) {
  const auto roots = detail::roots_of_unity(chi.modulus);
  CompensatedSum<cplx> acc;
  for (i64 a = 0; a < chi.modulus; ++a)
    if (chi.values[a] != 0.0) acc.add(chi.values[a] * (*roots)[a]);
  return acc.value();
}

/**
 * nu(f, chi, n) = tau(conj chi) sum_{n1 n2 n3 = n, (n1, q) = 1}
 *                 chi(n1) mu(n1) conj chi(n2) mu(n2) lambda_f(n3) n3^{1/2}.
 */
inline cplx nu_weight(const CuspForm& f, const DirichletCharacter& chi, i64 n) {
  if (n < 1) throw std::invalid_argument("nu_weight: n must be >= 1");
  if (!chi.is_primitive()) throw std::invalid_argument("nu_weight: character must be primitive");
  f.require(n);
  const i64 q = f.level();
  cplx acc = 0;
  for (i64 n1 : divisors(n)) {
    if (std::gcd(n1, q) != 1) continue;
    const int mu1 = mobius(n1);
    if (mu1 == 0) continue;
    const cplx c1 = chi(n1) * double(mu1);
    if (c1 == 0.0) continue;
    for (i64 n2 : divisors(n / n1)) {
      const int mu2 = mobius(n2);
      if (mu2 == 0) continue;
      const cplx c2 = std::conj(chi(n2)) * double(mu2);
      if (c2 == 0.0) continue;
      const i64 n3 = n / n1 / n2;
      acc += c1 * c2 * hecke_eigenvalue(f, n3) * std::sqrt(double(n3));
    }
  }
  return gauss_sum(conj_character(chi)) * acc;
}

// ---------------------------------------------------------------------------
// Additive twists at a fixed denominator

/// L(f, a/c, k/2) for every unit a mod c (index a, zero off the units); c = 1 holds L(f, 0/1, k/2).
struct AdditiveRow {
  i64 c = 1;
  std::vector<cplx> L;
  std::vector<double> err;
};

inline AdditiveRow additive_row(const TwistEvaluator& ev, i64 c) {
  const int q = ev.form().level();
  AdditiveRow row;
  row.c = c;
  row.L.assign(c, 0.0);
  row.err.assign(c, 0.0);
  for (i64 a = 0; a < c; ++a) {
    if (std::gcd(a, c) != 1) continue;
    const auto s = ev.central_value(make_point_auto(a, c, q));
    row.L[a] = s.value;
    row.err[a] = s.err_bound;
  }
  return row;
}

/// Memo of additive rows keyed by denominator; filled explicitly, then read-only.
class AdditiveCache {
 public:
  explicit AdditiveCache(const TwistEvaluator& ev) : ev_(ev) {}
  const TwistEvaluator& evaluator() const { return ev_; }

  /// Computes the missing rows for the listed denominators.
  void fill(std::vector<i64> cs, int workers = 1) {
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    std::vector<i64> todo;
    for (i64 c : cs)
      if (!rows_.count(c)) todo.push_back(c);
    std::vector<AdditiveRow> out(todo.size());
    parallel_for(todo.size(), workers, [&](std::size_t i) { out[i] = additive_row(ev_, todo[i]); });
    for (std::size_t i = 0; i < todo.size(); ++i) rows_.emplace(todo[i], std::move(out[i]));
  }

  const AdditiveRow& row(i64 c) {
    auto it = rows_.find(c);
    if (it == rows_.end()) it = rows_.emplace(c, additive_row(ev_, c)).first;
    return it->second;
  }

 private:
  const TwistEvaluator& ev_;
  std::map<i64, AdditiveRow> rows_;
};

inline void check_coprime_level(const CuspForm& f, i64 c, const char* who) {
  if (std::gcd(c, i64(f.level())) != 1)
    throw std::invalid_argument(std::string(who) + ": modulus " + std::to_string(c) +
                                " is not coprime to the level " + std::to_string(f.level()));
}

struct TwistedValue {
  cplx value;
  double err_bound = 0;
};

/// L(f x chi, 1/2) = (1 / tau(conj chi)) sum_a conj chi(a) L(f, a/c, k/2) for primitive chi mod c.
inline TwistedValue twisted_central_value(AdditiveCache& cache, const DirichletCharacter& chi) {
  if (!chi.is_primitive()) throw std::invalid_argument("twisted_central_value: character must be primitive");
  check_coprime_level(cache.evaluator().form(), chi.modulus, "twisted_central_value");
  const cplx tau = gauss_sum(conj_character(chi));
  if (std::abs(tau) < 1e-9) throw std::logic_error("twisted_central_value: vanishing Gauss sum");
  const auto& row = cache.row(chi.modulus);
  CompensatedSum<cplx> acc;
  double err = 0;
  for (i64 a = 0; a < chi.modulus; ++a) {
    if (chi.values[a] == 0.0) continue;
    acc.add(std::conj(chi.values[a]) * row.L[a]);
    err += row.err[a];
  }
  return {acc.value() / tau, err / std::abs(tau)};
}

inline TwistedValue twisted_central_value(const TwistEvaluator& ev, const DirichletCharacter& chi) {
  AdditiveCache cache(ev);
  return twisted_central_value(cache, chi);
}

/// nu(f, chi*, c / c(chi)) L(f x chi*, 1/2): the multiplicative side of the Birch-Stevens identity.
inline cplx birch_stevens_rhs(AdditiveCache& cache, const DirichletCharacter& chi) {
  const auto star = primitive_character(chi);
  const cplx nu = nu_weight(cache.evaluator().form(), star, chi.modulus / chi.conductor);
  if (nu == 0.0) return 0.0;
  return nu * twisted_central_value(cache, star).value;
}

/// sum_{a unit} conj chi(a) L(f, a/c, k/2): the additive side.
inline cplx birch_stevens_lhs(AdditiveCache& cache, const DirichletCharacter& chi) {
  const auto& row = cache.row(chi.modulus);
  CompensatedSum<cplx> acc;
  for (i64 a = 0; a < chi.modulus; ++a)
    if (chi.values[a] != 0.0) acc.add(std::conj(chi.values[a]) * row.L[a]);
  return acc.value();
}

struct BirchStevensResidual {
  i64 modulus = 0;
  i64 index = 0;
  i64 conductor = 0;
  double direct = 0;     // character sum vs nu L*, relative to sum_a |L(a/c)|
  double inversion = 0;  // reconstruction of every L(a/c), relative to the mean |L(a/c)|
};

/// Both Birch-Stevens residuals for one character mod c, (c, q) = 1.
inline BirchStevensResidual birch_stevens_check(AdditiveCache& cache, const DirichletCharacter& chi) {
  check_coprime_level(cache.evaluator().form(), chi.modulus, "birch_stevens_check");
  const i64 c = chi.modulus;
  const auto& row = cache.row(c);
  double mass = 0;
  for (i64 a = 0; a < c; ++a) mass += std::abs(row.L[a]);
  BirchStevensResidual r{c, chi.index, chi.conductor, 0, 0};
  const cplx lhs = birch_stevens_lhs(cache, chi);
  const cplx rhs = birch_stevens_rhs(cache, chi);
  r.direct = std::abs(lhs - rhs) / std::max(mass, 1e-300);
  // inversion: L(a/c) = (1/phi(c)) sum_chi chi(a) nu L*, at every unit a
  const auto table = character_table(c);
  std::vector<cplx> B(table->size());
  for (i64 i = 0; i < table->size(); ++i) B[i] = birch_stevens_rhs(cache, table->character(i));
  double worst = 0;
  for (i64 a = 0; a < c; ++a) {
    if (std::gcd(a, c) != 1) continue;
    cplx rec = 0;
    for (i64 i = 0; i < table->size(); ++i) rec += table->value(i, a) * B[i];
    rec /= double(table->size());
    worst = std::max(worst, std::abs(rec - row.L[a]));
  }
  const double mean = mass / double(table->size());
  r.inversion = worst / std::max(mean, 1e-300);
  return r;
}

/// Direct residuals for every character mod c plus the shared inversion residual.
inline std::vector<BirchStevensResidual> birch_stevens_modulus(AdditiveCache& cache, i64 c) {
  check_coprime_level(cache.evaluator().form(), c, "birch_stevens_modulus");
  const auto table = character_table(c);
  const auto& row = cache.row(c);
  double mass = 0;
  for (i64 a = 0; a < c; ++a) mass += std::abs(row.L[a]);
  std::vector<cplx> B(table->size());
  std::vector<BirchStevensResidual> out;
  for (i64 i = 0; i < table->size(); ++i) {
    const auto chi = table->character(i);
    B[i] = birch_stevens_rhs(cache, chi);
    const cplx lhs = birch_stevens_lhs(cache, chi);
    out.push_back({c, i, chi.conductor, std::abs(lhs - B[i]) / std::max(mass, 1e-300), 0});
  }
  double worst = 0;
  for (i64 a = 0; a < c; ++a) {
    if (std::gcd(a, c) != 1) continue;
    cplx rec = 0;
    for (i64 i = 0; i < table->size(); ++i) rec += table->value(i, a) * B[i];
    rec /= double(table->size());
    worst = std::max(worst, std::abs(rec - row.L[a]));
  }
  const double inv = worst / std::max(mass / double(table->size()), 1e-300);
  for (auto& r : out) r.inversion = inv;
  return out;
}

// ---------------------------------------------------------------------------
// Family averages

struct FamilyAverageOptions {
  int workers = 1;
  double max_cost = 5e8;  // bound on sum_c phi(c)^{2n-1}
};

/**
 * sum_{c <= X, (c,q) = 1} phi(c)^{1-2n} sum_{chi_1 .. chi_2n mod c, prod = principal}
 *   chi_1(-1) .. chi_n(-1) prod_i nu(f, chi_i*, c/c(chi_i)) L(f x chi_i*, 1/2),
 * evaluated on the character side.  c runs from 1, where the only character is
 * trivial and the term is L(f, k/2)^n conj(...)^n.
 */
inline cplx family_average(const TwistEvaluator& ev, int n, double X, const FamilyAverageOptions& opt = {}) {
  if (n < 1) throw std::invalid_argument("family_average: n must be >= 1");
  const CuspForm& f = ev.form();
  const i64 q = f.level();
  const i64 C = i64(std::floor(X + 1e-9));
  if (C > kMaxFamilyModulus)
    throw std::invalid_argument("family_average: X exceeds the modulus ceiling " +
                                std::to_string(kMaxFamilyModulus));
  std::vector<i64> moduli;
  double cost = 0;
  for (i64 c = 1; c <= C; ++c) {
    if (std::gcd(c, q) != 1) continue;
    moduli.push_back(c);
    cost += std::pow(double(euler_phi(c)), 2 * n - 1);
  }
  if (cost > opt.max_cost)
    throw std::invalid_argument("family_average: estimated cost " + std::to_string(cost) +
                                " exceeds the configured limit");
  if (moduli.empty()) return 0.0;

  // every conductor divides some modulus in the list, so the rows below cover the character side
  AdditiveCache cache(ev);
  cache.fill(moduli, opt.workers);

  std::vector<cplx> per_c(moduli.size());
  // the memo is complete, so concurrent lookups only read
  parallel_for(moduli.size(), opt.workers, [&](std::size_t ci) {
    const i64 c = moduli[ci];
    const auto table = character_table(c);
    const i64 phi = table->size();
    std::vector<cplx> B(phi);
    std::vector<int> par(phi);
    for (i64 i = 0; i < phi; ++i) {
      const auto chi = table->character(i);
      B[i] = birch_stevens_rhs(cache, chi);
      par[i] = chi.parity;
    }
    std::vector<std::vector<i64>> mul(phi, std::vector<i64>(phi));
    for (i64 i = 0; i < phi; ++i)
      for (i64 j = 0; j < phi; ++j) mul[i][j] = table->multiply(i, j);
    std::vector<i64> inv(phi);
    for (i64 i = 0; i < phi; ++i) inv[i] = table->inverse(i);

    CompensatedSum<cplx> acc;
    const int depth = 2 * n - 1;
    // recursive walk over chi_1 .. chi_{2n-1}; chi_{2n} closes the product
    auto walk = [&](auto&& self, int level, i64 prod, cplx partial, int sign) -> void {
      if (level == depth) {
        acc.add(double(sign) * partial * B[inv[prod]]);
        return;
      }
      for (i64 i = 0; i < phi; ++i) {
        if (B[i] == 0.0) continue;
        const int s = level < n ? sign * par[i] : sign;
        self(self, level + 1, mul[prod][i], partial * B[i], s);
      }
    };
    walk(walk, 0, 0, cplx(1.0), 1);
    per_c[ci] = acc.value() / std::pow(double(phi), 2 * n - 1);
  });
  CompensatedSum<cplx> total;
  for (const auto& v : per_c) total.add(v);
  return total.value();
}

/// The additive side: sum over 0 <= a < c <= X, (qa, c) = 1, of |L(f, a/c, k/2)|^{2n}, with c from 1.
inline double additive_family_moment(const TwistEvaluator& ev, int n, double X, int workers = 1) {
  const i64 q = ev.form().level();
  const i64 C = i64(std::floor(X + 1e-9));
  std::vector<i64> moduli;
  for (i64 c = 1; c <= C; ++c)
    if (std::gcd(c, q) == 1) moduli.push_back(c);
  AdditiveCache cache(ev);
  cache.fill(moduli, workers);
  NeumaierSum acc;
  for (i64 c : moduli) {
    const auto& row = cache.row(c);
    for (i64 a = 0; a < c; ++a)
      if (std::gcd(a, c) == 1) acc.add(std::pow(std::norm(row.L[a]), n));
  }
  return acc.value();
}

// ---------------------------------------------------------------------------

/// CSV rows: modulus,index,conductor,parity,order,values with values "(re,im) (re,im) ...".
inline std::string characters_csv(i64 c) {
  const auto t = character_table(c);
  std::ostringstream os;
  os.precision(17);
  os << "modulus,index,conductor,parity,order,values\n";
  for (i64 i = 0; i < t->size(); ++i) {
    const auto chi = t->character(i);
    os << c << ',' << i << ',' << chi.conductor << ',' << chi.parity << ',' << chi.order << ",\"";
    for (i64 a = 0; a < c; ++a) os << (a ? " " : "") << '(' << chi.values[a].real() << ',' << chi.values[a].imag() << ')';
    os << "\"\n";
  }
  return os.str();
}

}  // namespace addtwist
