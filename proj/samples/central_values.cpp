// Central values L(f, a/c, k/2) for a few twists of the level 11 form, and the
// functional-equation residual at one point of each orbit.

#include <cstdio>

#include "addtwist/addtwist.hpp"

int main() {
  using namespace addtwist;
  const auto f = CuspForm::from_registry("11.2.a", coefficient_budget(2, 40 * std::sqrt(11.0)));
  const TwistEvaluator ev(f);
  std::printf("Fricke eigenvalue %+.0f\n", ev.fricke().real());

  for (const auto& p : enumerate({11, Orbit::Zero, 5})) {
    const auto s = ev.central_value(p);
    std::printf("L(f, %lld/%lld, 1) = %+.12f %+.12fi  (err <= %.1e, %lld terms)\n", (long long)p.a,
                (long long)p.c, s.value.real(), s.value.imag(), s.err_bound, (long long)s.terms_used);
  }

  for (const auto& p : {make_point(3, 22, Orbit::Infinity, 11), make_point(7, 40, Orbit::Zero, 11)})
    std::printf("functional equation residual at %lld/%lld (%s): %.2e\n", (long long)p.a, (long long)p.c,
                to_string(p.orbit).c_str(), functional_equation_residual(ev, p, cplx(1.0, 0.5)));
}
