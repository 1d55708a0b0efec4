#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "addtwist/characters.hpp"

using namespace addtwist;

namespace {

const TwistEvaluator& evaluator(const std::string& id) {
  static std::map<std::string, TwistEvaluator> cache;
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, TwistEvaluator(CuspForm::from_registry(id, 20000))).first;
  return it->second;
}

// smallest d | c such that chi(a) = 1 for every unit a = 1 mod d
i64 brute_conductor(const DirichletCharacter& chi) {
  const i64 c = chi.modulus;
  for (i64 d : divisors(c)) {
    bool ok = true;
    for (i64 a = 1; a < c && ok; a += d)
      if (std::gcd(a, c) == 1 && std::abs(chi(a) - 1.0) > 1e-9) ok = false;
    if (c == 1 || ok) return d;
  }
  return c;
}

}  // namespace

TEST(Characters, TablesAreGroupsOfHomomorphisms) {
  for (i64 c = 1; c <= 64; ++c) {
    const auto t = character_table(c);
    ASSERT_EQ(t->size(), euler_phi(c)) << c;
    for (i64 i = 0; i < t->size(); ++i) {
      const auto chi = t->character(i);
      for (i64 j = 0; j < i; ++j) {
        double diff = 0;
        for (i64 a = 0; a < c; ++a) diff = std::max(diff, std::abs(chi(a) - t->value(j, a)));
        EXPECT_GT(diff, 1e-6) << "characters " << i << " and " << j << " mod " << c << " coincide";
      }
      for (i64 a = 1; a < c; ++a)
        for (i64 b = 1; b < c; b += 3) ASSERT_NEAR(std::abs(chi(a * b) - chi(a) * chi(b)), 0, 1e-12);
      cplx s = 0;
      for (i64 a = 0; a < c; ++a) s += chi(a);
      EXPECT_NEAR(std::abs(s), chi.is_principal() ? double(euler_phi(c)) : 0.0, 1e-9) << c << " " << i;
    }
  }
}

TEST(Characters, ConductorMatchesBruteForce) {
  for (i64 c : {5, 8, 12, 16, 20, 24, 27, 32, 45, 48, 60, 64, 96, 100}) {
    const auto t = character_table(c);
    for (i64 i = 0; i < t->size(); ++i) {
      const auto chi = t->character(i);
      EXPECT_EQ(chi.conductor, brute_conductor(chi)) << c << " " << i;
      // the induced primitive character agrees on units
      const auto star = primitive_character(chi);
      EXPECT_TRUE(star.is_primitive());
      for (i64 a = 1; a < c; ++a)
        if (std::gcd(a, c) == 1) {
          EXPECT_NEAR(std::abs(star(a) - chi(a)), 0, 1e-12);
        }
    }
  }
}

TEST(Characters, ModulusFiveOrders) {
  const auto t = character_table(5);
  std::multiset<i64> orders;
  for (i64 i = 0; i < t->size(); ++i) orders.insert(t->character(i).order);
  EXPECT_EQ(orders, (std::multiset<i64>{1, 2, 4, 4}));
  EXPECT_EQ(t->character(t->principal_index()).order, 1);
  EXPECT_THROW(t->character(4), std::out_of_range);
  EXPECT_THROW(CharacterTable(10001), std::invalid_argument);
}

TEST(Characters, GaussSumIdentities) {
  for (i64 c : {3, 5, 7, 8, 9, 12, 13, 15, 16, 21, 25}) {
    const auto t = character_table(c);
    for (i64 i = 0; i < t->size(); ++i) {
      const auto chi = t->character(i);
      if (!chi.is_primitive()) continue;
      const cplx tau = gauss_sum(chi);
      EXPECT_NEAR(std::norm(tau), double(c), 1e-9) << c;
      // tau(chi) tau(conj chi) = chi(-1) c
      EXPECT_NEAR(std::abs(tau * gauss_sum(conj_character(chi)) - double(chi.parity * c)), 0, 1e-9);
      EXPECT_EQ(chi.parity, chi(-1).real() > 0 ? 1 : -1);
    }
  }
}

TEST(Characters, BirchStevensSmallModuli) {
  for (const char* id : {"11.2.a", "5.4.a"}) {
    const auto& ev = evaluator(id);
    AdditiveCache cache(ev);
    for (i64 c : {2, 3, 4, 6, 7, 8, 9, 12}) {
      if (std::gcd(c, i64(ev.form().level())) != 1) continue;
      for (const auto& r : birch_stevens_modulus(cache, c)) {
        EXPECT_LT(r.direct, 1e-10) << id << " c=" << c << " chi=" << r.index;
        EXPECT_LT(r.inversion, 1e-10) << id << " c=" << c;
      }
    }
    EXPECT_THROW(birch_stevens_modulus(cache, ev.form().level()), std::invalid_argument);
  }
}

TEST(Characters, TwistedValueOfTheTrivialCharacterIsTheCentralValue) {
  // L(11.2.a, 1) = 0.2538418608559106843 (the real period over 5)
  const auto& ev = evaluator("11.2.a");
  const auto chi = character_table(1)->character(0);
  EXPECT_NEAR(std::abs(twisted_central_value(ev, chi).value - 0.2538418608559106843), 0, 1e-12);
  EXPECT_THROW(nu_weight(ev.form(), character_table(4)->character(0), 1), std::invalid_argument);
}

TEST(Characters, FamilyAverageMatchesAdditiveSide) {
  const auto& ev = evaluator("11.2.a");
  for (int n : {1, 2}) {
    const double X = n == 1 ? 30 : 12;
    const cplx fam = family_average(ev, n, X);
    const double add = additive_family_moment(ev, n, X);
    EXPECT_NEAR(std::abs(fam - add) / add, 0, 1e-10) << n;
    EXPECT_NEAR(fam.imag(), 0, 1e-10 * add);
  }
  EXPECT_THROW(family_average(ev, 1, 101), std::invalid_argument);
  EXPECT_THROW(family_average(ev, 0, 10), std::invalid_argument);
  EXPECT_THROW(family_average(ev, 3, 100, {1, 1e3}), std::invalid_argument);
}

TEST(Characters, CsvExport) {
  const auto csv = characters_csv(5);
  EXPECT_EQ(csv.rfind("modulus,index,conductor,parity,order,values\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find("5,0,1,1,1,\"(0,0) (1,0)"), std::string::npos);
}
