#pragma once
// JSON views of the result structs.  Key order is fixed so reports compare byte for byte.

#include <string>
#include <vector>

#include <json.hpp>

#include "addtwist/cache.hpp"
#include "addtwist/characters.hpp"
#include "addtwist/cutoff.hpp"
#include "addtwist/stats.hpp"

namespace addtwist {

using Json = nlohmann::ordered_json;

inline Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const TwistPoint& p) {
  return Json{{"a", p.a}, {"c", p.c}, {"orbit", to_string(p.orbit)}, {"c_r", p.c_r}};
}

inline Json to_json(const TwistSample& s) {
  Json j = to_json(s.point);
  j["value"] = to_json(s.value);
  j["err_bound"] = s.err_bound;
  j["terms"] = s.terms_used;
  return j;
}

inline Json to_json(const FormConstants& c) {
  return Json{{"petersson_norm_sq", c.petersson_norm_sq},
              {"volume", c.volume},
              {"variance_slope", c.variance_slope},
              {"fricke_eigenvalue", to_json(c.fricke_eigenvalue)}};
}

inline Json to_json(const SlopeFit& f) {
  return Json{{"n", f.n},       {"X", f.X},
              {"M", f.M},       {"coeffs", f.coeffs},
              {"residual", f.residual}, {"predicted_leading", f.predicted_leading},
              {"ratio", f.ratio}};
}

inline Json moments_json(const std::map<std::pair<int, int>, cplx>& m) {
  Json out = Json::array();
  for (const auto& [mn, v] : m) out.push_back(Json{{"m", mn.first}, {"n", mn.second}, {"value", to_json(v)}});
  return out;
}

inline Json to_json(const MomentReport& r) {
  Json boxes = Json::array();
  for (const auto& b : r.box_probs)
    boxes.push_back(Json{{"box", {b.box.x1, b.box.x2, b.box.y1, b.box.y2}},
                         {"empirical", b.empirical},
                         {"gaussian", b.gaussian}});
  return Json{{"X", r.X},
              {"count", r.count},
              {"count_normalized", r.count_normalized},
              {"raw_moments", moments_json(r.raw_moments)},
              {"normalized_moments", moments_json(r.normalized_moments)},
              {"mean_abs2", r.mean_abs2},
              {"mean_abs4", r.mean_abs4},
              {"mean_abs6", r.mean_abs6},
              {"kurtosis_ratio", r.kurtosis_ratio},
              {"mixed_ratio", r.mixed_ratio},
              {"ks_re", r.ks_re},
              {"ks_im", r.ks_im},
              {"box_probs", boxes},
              {"degenerate", r.degenerate}};
}

inline Json to_json(const LindelofScan& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    Json ratios = Json::object();
    for (const auto& [t, v] : r.ratio) ratios[format_double(t)] = v;
    rows.push_back(Json{{"lo", r.lo},
                        {"hi", r.hi},
                        {"count", r.count},
                        {"max_abs", r.max_abs},
                        {"c_at_max", r.c_at_max},
                        {"ratio", ratios}});
  }
  Json verdict = Json::object();
  for (const auto& [t, v] : s.top3_nonincreasing) verdict[format_double(t)] = v;
  return Json{{"rows", rows}, {"top3_nonincreasing", verdict}, {"growth_flagged", s.growth_flagged}};
}

inline Json to_json(const BirchStevensResidual& r) {
  return Json{{"modulus", r.modulus},
              {"index", r.index},
              {"conductor", r.conductor},
              {"direct", r.direct},
              {"inversion", r.inversion}};
}

inline Json to_json(const SharpEstimate& e) {
  Json poly = Json::array();
  for (const auto& c : e.polynomial) poly.push_back(to_json(c));
  return Json{{"main", to_json(e.main)}, {"polynomial", poly}, {"exponent", e.exponent}, {"delta", e.delta}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace addtwist
