// addtwist: command-line driver for twist evaluation, verification suites and statistics.
//
// Exit codes: 0 ok, 1 verification failed (or corrupt cache), 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "addtwist/addtwist.hpp"

using namespace addtwist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Globals {
  std::string config_path;
  std::optional<int> workers;
  std::optional<double> tolerance;
  std::optional<std::int64_t> coeff_count;
  std::string cache_dir;
  bool no_cache = false;
  bool verify_cache = false;
  std::string out_path;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (workers) cfg.workers = *workers;
    if (tolerance) cfg.tolerance = *tolerance;
    if (coeff_count) cfg.coeff_count = *coeff_count;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (no_cache) cfg.use_cache = false;
    if (verify_cache) cfg.verify_cache = true;
    cfg.validate();
    return cfg;
  }
};

void emit(const Globals& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(g.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + g.out_path);
  out << text;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// Registry entry of a form, provided the configuration selects it.
const RegistryEntry& selected_entry(const std::string& form_id, const RunConfig& cfg) {
  const auto& e = registry_entry(form_id);
  if (!cfg.selected(form_id)) throw UsageError("form '" + form_id + "' is not selected by the configuration");
  return e;
}

/// Form with enough coefficients for denominators up to c_r_max, and its evaluator.
struct Loaded {
  std::unique_ptr<TwistEvaluator> ev;
  const CuspForm& form() const { return ev->form(); }
};

Loaded load(const std::string& form_id, double c_r_max, const RunConfig& cfg, std::int64_t floor = 0) {
  const auto& e = selected_entry(form_id, cfg);
  std::int64_t N = cfg.coeff_count;
  if (N == 0) {
    // the zero-orbit self check runs at the smallest admissible denominator
    const double need = std::max(c_r_max, 4.0 * std::sqrt(double(e.q)));
    N = std::max(floor, coefficient_budget(e.k, need, std::min(cfg.tolerance, 1e-12)) * 5 / 4);
  }
  Loaded out;
  out.ev = std::make_unique<TwistEvaluator>(CuspForm::from_registry(form_id, N));
  return out;
}

Orbit orbit_for(const std::string& name, int q) {
  const Orbit o = parse_orbit(name);
  if (o == Orbit::Zero && q == 1) throw UsageError("orbit 'zero' coincides with 'inf' at level 1; use --orbit inf");
  return o;
}

CutoffMode parse_cutoff(const std::string& s) {
  if (s == "plain") return CutoffMode::PlainC;
  if (s == "scaled") return CutoffMode::ScaledC;
  throw UsageError("unknown cutoff '" + s + "' (expected plain|scaled)");
}

/// Largest c_r among points of the orbit up to X.
double c_r_limit(int q, Orbit orbit, double X, CutoffMode mode) {
  if (orbit == Orbit::Infinity) return X;
  return mode == CutoffMode::ScaledC ? X : X * std::sqrt(double(q));
}

std::vector<TwistSample> samples_up_to(const Loaded& L, Orbit orbit, double X, CutoffMode mode,
                                       const RunConfig& cfg) {
  const int q = L.form().level();
  std::vector<TwistPoint> pts;
  if (X >= 2) pts = enumerate({q, orbit, X, mode});
  std::optional<SampleCache> cache;
  if (cfg.use_cache) cache.emplace(cfg.resolved_cache_dir());
  auto res = cached_central_values(*L.ev, pts, cfg.workers, cfg.tolerance, cache ? &*cache : nullptr,
                                   cfg.verify_cache);
  if (!res.failures.empty())
    throw std::runtime_error("evaluation failed at " + describe(res.failures.front().point) + ": " +
                             res.failures.front().message);
  return res.samples;
}

Json suite_json(const SuiteResult& r, double threshold) {
  return Json{{"name", r.name},
              {"count", r.count},
              {"max_residual", r.max_residual},
              {"threshold", threshold},
              {"worst", r.worst},
              {"pass", r.max_residual < threshold}};
}

int verdict(const Json& suites) {
  for (const auto& s : suites)
    if (!s["pass"].get<bool>()) return kExitFailed;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive twists of modular L-functions: evaluation, identities and statistics"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--workers", g.workers, "worker threads");
  app.add_option("--tolerance", g.tolerance, "absolute tolerance for central values");
  app.add_option("--coeff-count", g.coeff_count, "Fourier coefficients to expand (0: automatic)");
  app.add_option("--cache-dir", g.cache_dir, "sample cache directory (default $ADDTWIST_CACHE_DIR)");
  app.add_flag("--no-cache", g.no_cache, "do not read or write the sample cache");
  app.add_flag("--verify-cache", g.verify_cache, "recompute cached values as they are read");
  app.add_option("--out", g.out_path, "write the report here instead of stdout");

  std::string form_id = "delta", orbit_name = "inf", cutoff_name = "plain";
  double X = 0;
  int n = 1, trials = 0;
  std::int64_t cmax = 0;
  std::uint64_t seed = 20240611;

  // forms
  auto* forms = app.add_subcommand("forms", "registry of newforms");
  forms->require_subcommand(1);
  auto* forms_list = forms->add_subcommand("list", "print the registry manifest");
  auto* forms_show = forms->add_subcommand("show", "coefficients and constants of one form");
  std::int64_t show_coeffs = 20;
  bool show_constants = false;
  std::string coeff_path;
  forms_show->add_option("--form", form_id)->required();
  forms_show->add_option("--coeffs", show_coeffs, "leading coefficients to print");
  forms_show->add_flag("--constants", show_constants, "compute Petersson norm, C_f and Fricke eigenvalue");
  forms_show->add_option("--write-coeffs", coeff_path, "write a binary coefficient cache of --coeffs entries");

  // twists
  auto* twists = app.add_subcommand("twists", "central values");
  twists->require_subcommand(1);
  auto* twists_compute = twists->add_subcommand("compute", "central values on an orbit up to X");
  twists_compute->add_option("--form", form_id)->required();
  twists_compute->add_option("--orbit", orbit_name);
  twists_compute->add_option("--X", X)->required();
  twists_compute->add_option("--cutoff", cutoff_name, "zero orbit: plain (c <= X) or scaled (c sqrt q <= X)");

  // verify
  auto* verify = app.add_subcommand("verify", "identity suites");
  verify->require_subcommand(1);
  auto* v_fe = verify->add_subcommand("fe", "functional equation at random points");
  auto* v_anti = verify->add_subcommand("antiderivative", "central values through antiderivatives");
  auto* v_bs = verify->add_subcommand("bs", "Birch-Stevens duality for every character");
  auto* v_coc = verify->add_subcommand("cocycle", "period moments and the period cocycle");
  auto* v_eta = verify->add_subcommand("eta", "eta expansion and Hecke relations");
  for (auto* s : {v_fe, v_anti, v_bs, v_coc, v_eta}) s->add_option("--form", form_id)->required();
  for (auto* s : {v_fe, v_anti, v_coc}) {
    s->add_option("--trials", trials, "random cases");
    s->add_option("--seed", seed);
  }
  v_fe->add_option("--orbit", orbit_name);
  v_fe->add_option("--cmax", cmax, "largest denominator");
  v_bs->add_option("--cmax", cmax, "largest composite modulus");

  // statistics
  auto* moments = app.add_subcommand("moments", "moment sums and slope fit");
  std::string grid_text;
  moments->add_option("--form", form_id)->required();
  moments->add_option("--orbit", orbit_name);
  moments->add_option("--Xgrid", grid_text, "comma separated cutoffs (default: config x_grid)");
  moments->add_option("--n", n, "moment order 2n");
  moments->add_option("--cutoff", cutoff_name);

  auto* distribution = app.add_subcommand("distribution", "Gaussian diagnostics and Lindelof scan");
  std::string hist_prefix;
  int bins = 40;
  distribution->add_option("--form", form_id)->required();
  distribution->add_option("--orbit", orbit_name);
  distribution->add_option("--X", X)->required();
  distribution->add_option("--cutoff", cutoff_name);
  distribution->add_option("--histogram", hist_prefix, "write <prefix>_re.csv and <prefix>_im.csv");
  distribution->add_option("--bins", bins);

  auto* family = app.add_subcommand("family-average", "character-side family average against the additive side");
  family->add_option("--form", form_id)->required();
  family->add_option("--n", n);
  family->add_option("--X", X)->required();

  auto* cutoff_demo = app.add_subcommand("cutoff-demo", "smooth and sharp cutoff sums");
  cutoff_demo->require_subcommand(1);
  auto* cd_div = cutoff_demo->add_subcommand("divisor", "sharp divisor sum against the main term");
  auto* cd_zeta = cutoff_demo->add_subcommand("zeta", "smooth sums for zeta and zeta^2");
  auto* cd_mom = cutoff_demo->add_subcommand("moments", "smooth moment against the leading pole");
  std::string fixture;
  for (auto* s : {cd_div, cd_zeta, cd_mom}) s->add_option("--X", X);
  cd_div->add_option("--fixture", fixture, "plain-text cutoff problem (default: built-in zeta^2)");
  cd_mom->add_option("--form", form_id);
  cd_mom->add_option("--n", n);

  // cache
  auto* cache_cmd = app.add_subcommand("cache", "sample cache maintenance");
  cache_cmd->require_subcommand(1);
  auto* c_verify = cache_cmd->add_subcommand("verify", "recompute cached rows of a form");
  auto* c_export = cache_cmd->add_subcommand("export", "write all rows, sorted, to a file");
  auto* c_import = cache_cmd->add_subcommand("import", "append rows from an export file");
  auto* c_purge = cache_cmd->add_subcommand("purge", "delete all cache files");
  std::string file;
  c_verify->add_option("--form", form_id)->required();
  c_export->add_option("--file", file)->required();
  c_import->add_option("--file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = g.resolve();

    if (*forms_list) {
      std::vector<RegistryEntry> chosen;
      for (const auto& e : registry())
        if (cfg.selected(e.form_id)) chosen.push_back(e);
      emit(g, write_manifest(chosen));
      return kExitOk;
    }
    if (*forms_show) {
      const auto& e = selected_entry(form_id, cfg);
      if (show_coeffs < 1) throw UsageError("--coeffs must be >= 1");
      const CuspForm f = CuspForm::from_registry(form_id, std::max<std::int64_t>(show_coeffs, 2000));
      Json coeffs = Json::array();
      for (std::int64_t i = 1; i <= show_coeffs; ++i) coeffs.push_back(to_string(f.coeff(i)));
      Json j{{"form_id", e.form_id}, {"q", e.q}, {"k", e.k}, {"recipe", recipe_to_string(e.recipe)},
             {"coefficients", coeffs}};
      if (show_constants) j["constants"] = to_json(compute_constants(f));
      if (!coeff_path.empty()) write_coeff_cache(coeff_path, f, show_coeffs);
      emit(g, dump(j));
      return kExitOk;
    }

    if (*twists_compute) {
      const int q = registry_entry(form_id).q;
      const Orbit orbit = orbit_for(orbit_name, q);
      const CutoffMode mode = parse_cutoff(cutoff_name);
      if (X < 0) throw UsageError("--X must be nonnegative");
      if (X < 2) warn("X = " + format_double(X) + " is below the least denominator; no points");
      const auto L = load(form_id, c_r_limit(q, orbit, std::max(X, 2.0), mode), cfg);
      const auto samples = samples_up_to(L, orbit, X, mode, cfg);
      std::string out = std::string(kCacheHeader) + "\n";
      for (const auto& s : samples) out += format_row({form_id, L.form().weight(), s}) + "\n";
      emit(g, out);
      return kExitOk;
    }

    if (*v_fe) {
      const int q = registry_entry(form_id).q;
      const Orbit orbit = orbit_for(orbit_name, q);
      if (trials == 0) trials = 50;
      if (cmax == 0) cmax = orbit == Orbit::Infinity ? 200 : 120;
      if (trials < 1 || cmax < 2) throw UsageError("--trials must be >= 1 and --cmax >= 2");
      if (orbit == Orbit::Infinity && cmax < q) throw UsageError("--cmax is below the level");
      const auto L = load(form_id, c_r_limit(q, orbit, double(cmax), CutoffMode::PlainC), cfg);
      Json suites = Json::array({suite_json(fe_suite(*L.ev, orbit, trials, cmax, seed), 1e-8)});
      emit(g, dump(Json{{"form_id", form_id}, {"suites", suites}}));
      return verdict(suites);
    }
    if (*v_anti) {
      if (trials == 0) trials = 20;
      if (trials < 1) throw UsageError("--trials must be >= 1");
      const int q = registry_entry(form_id).q;
      const auto L = load(form_id, 6.0 * q, cfg, 20000);
      const auto r = antiderivative_suite(*L.ev, trials, seed);
      Json suites = Json::array({suite_json(r.cross, 1e-8), suite_json(r.spread, 1e-8)});
      emit(g, dump(Json{{"form_id", form_id}, {"suites", suites}}));
      return verdict(suites);
    }
    if (*v_bs) {
      const int q = registry_entry(form_id).q;
      if (cmax == 0) cmax = 60;
      if (cmax > kMaxCharacterModulus) throw UsageError("--cmax exceeds the character table ceiling");
      const auto L = load(form_id, double(cmax) * std::sqrt(double(q)), cfg);
      const auto r = birch_stevens_suite(*L.ev, cmax, cfg.workers);
      Json suites = Json::array({suite_json(r.direct, 1e-6), suite_json(r.inversion, 1e-6)});
      emit(g, dump(Json{{"form_id", form_id}, {"cmax", cmax}, {"suites", suites}}));
      return verdict(suites);
    }
    if (*v_coc) {
      if (trials == 0) trials = 10;
      if (trials < 1) throw UsageError("--trials must be >= 1");
      const int q = registry_entry(form_id).q;
      const auto L = load(form_id, std::max(6.0 * q, double(kCocycleMaxC)), cfg);
      Json suites = Json::array({suite_json(eichler_shimura_suite(*L.ev, trials, seed), 1e-7)});
      if (q == 1) suites.push_back(suite_json(cocycle_suite(*L.ev, trials, seed + 1), 1e-7));
      else warn("the cocycle check runs on level 1 only; period moments checked");
      emit(g, dump(Json{{"form_id", form_id}, {"suites", suites}}));
      return verdict(suites);
    }
    if (*v_eta) {
      selected_entry(form_id, cfg);
      const CuspForm f = CuspForm::from_registry(form_id, 4000);
      const auto r = eta_check(f);
      Json j{{"form_id", form_id},
             {"compared", r.compared},
             {"mismatches", r.mismatches},
             {"hecke_checked", r.hecke_checked},
             {"hecke_failures", r.hecke_failures},
             {"pass", r.mismatches == 0 && r.hecke_failures == 0}};
      emit(g, dump(j));
      return j["pass"].get<bool>() ? kExitOk : kExitFailed;
    }

    if (*moments) {
      const int q = registry_entry(form_id).q;
      const Orbit orbit = orbit_for(orbit_name, q);
      const CutoffMode mode = parse_cutoff(cutoff_name);
      const auto grid = grid_text.empty() ? cfg.x_grid : parse_grid(grid_text);
      if (grid.empty()) throw UsageError("empty X grid");
      if (n < 0 || n > 4) throw UsageError("--n must lie in 0..4");
      const double Xmax = grid.back();
      const auto L = load(form_id, c_r_limit(q, orbit, Xmax, mode), cfg);
      const auto samples = samples_up_to(L, orbit, Xmax, mode, cfg);
      const auto consts = compute_constants(L.form());
      Json j{{"form_id", form_id}, {"orbit", to_string(orbit)}, {"constants", to_json(consts)}};
      j["slope_fit"] = to_json(slope_fit(samples, grid, n, consts.variance_slope, q, orbit, mode));
      Json raw = Json::array();
      for (double x : grid) {
        std::vector<TwistSample> part;
        for (const auto& s : samples)
          if (cutoff_key(s.point, mode) <= x + 1e-9) part.push_back(s);
        raw.push_back(Json{{"X", x},
                           {"count", part.size()},
                           {"M(n,n)", to_json(moment_sum(part, n, n))},
                           {"M(2,0)", to_json(moment_sum(part, 2, 0))}});
      }
      j["moments"] = raw;
      emit(g, dump(j));
      return kExitOk;
    }

    if (*distribution) {
      const int q = registry_entry(form_id).q;
      const Orbit orbit = orbit_for(orbit_name, q);
      const CutoffMode mode = parse_cutoff(cutoff_name);
      const auto L = load(form_id, c_r_limit(q, orbit, std::max(X, 2.0), mode), cfg);
      const auto samples = samples_up_to(L, orbit, X, mode, cfg);
      if (samples.size() < kMinGaussianSamples)
        throw UsageError("X = " + format_double(X) + " gives " + std::to_string(samples.size()) +
                         " samples; at least " + std::to_string(kMinGaussianSamples) + " are needed");
      const auto consts = compute_constants(L.form());
      Json j{{"form_id", form_id}, {"orbit", to_string(orbit)}, {"X", X}};
      j["report"] = to_json(gaussian_report(samples, consts.variance_slope, X));
      j["lindelof"] = to_json(lindelof_scan(samples));
      if (!hist_prefix.empty()) {
        std::vector<double> re, im;
        for (const auto& z : normalized_values(samples, consts.variance_slope)) {
          re.push_back(z.real());
          im.push_back(z.imag());
        }
        for (auto [suffix, xs] : {std::pair{"_re.csv", &re}, std::pair{"_im.csv", &im}}) {
          std::ofstream out(hist_prefix + suffix);
          if (!out) throw std::runtime_error("cannot write " + hist_prefix + suffix);
          out << histogram_csv(histogram(*xs, -4, 4, bins));
        }
      }
      emit(g, dump(j));
      return kExitOk;
    }

    if (*family) {
      if (n < 1 || n > 3) throw UsageError("--n must lie in 1..3");
      if (X < 1 || X > double(kMaxFamilyModulus)) throw UsageError("--X must lie in [1, 100]");
      const int q = registry_entry(form_id).q;
      const auto L = load(form_id, X * std::sqrt(double(q)), cfg);
      FamilyAverageOptions opt;
      opt.workers = cfg.workers;
      const cplx chars = family_average(*L.ev, n, X, opt);
      const double additive = additive_family_moment(*L.ev, n, X, cfg.workers);
      const double rel = std::abs(chars - additive) / std::max(std::abs(additive), 1e-300);
      Json j{{"form_id", form_id}, {"n", n},           {"X", X},
             {"character_side", to_json(chars)},     {"additive_side", additive},
             {"relative_difference", rel},           {"pass", rel < 1e-6}};
      emit(g, dump(j));
      return rel < 1e-6 ? kExitOk : kExitFailed;
    }

    if (*cd_div) {
      if (X == 0) X = 1e4;
      if (X < 1 || X > 1e8) throw UsageError("--X must lie in [1, 1e8]");
      CutoffProblem p = zeta2_problem();
      if (!fixture.empty()) {
        std::ifstream in(fixture);
        if (!in) throw UsageError("cannot open fixture " + fixture);
        std::stringstream ss;
        ss << in.rdbuf();
        p = parse_cutoff_problem(ss.str());
      }
      const auto est = sharp_cutoff_estimate(p, X);
      const double sharp = sharp_sum(p, X);
      const double mp = smooth_main_term(p, mollifier(est.delta, 1), X).real();
      const double mm = smooth_main_term(p, mollifier(est.delta, -1), X).real();
      Json j{{"problem", p.name},
             {"X", X},
             {"sharp_sum", sharp},
             {"estimate", to_json(est)},
             {"relative_error", std::abs(sharp - est.main.real()) / std::max(std::abs(sharp), 1e-300)},
             {"smooth_main_minus", mm},
             {"smooth_main_plus", mp}};
      emit(g, dump(j));
      return kExitOk;
    }
    if (*cd_zeta) {
      if (X == 0) X = 1e4;
      if (X < 1 || X > 1e7) throw UsageError("--X must lie in [1, 1e7]");
      const auto psi = bump_test_function();
      Json rows = Json::array();
      for (const auto& p : {zeta_problem(), zeta2_problem()}) {
        const double brute = smooth_sum(p, psi, X);
        const double main = smooth_main_term(p, psi, X).real();
        rows.push_back(Json{{"problem", p.name},
                            {"smooth_sum", brute},
                            {"main_term", main},
                            {"relative_error", std::abs(brute - main) / std::abs(brute)}});
      }
      emit(g, dump(Json{{"X", X}, {"test_function", psi.name}, {"problems", rows}}));
      return kExitOk;
    }
    if (*cd_mom) {
      if (X == 0) X = 200;
      if (n < 1 || n > 3) throw UsageError("--n must lie in 1..3");
      const int q = registry_entry(form_id).q;
      const auto psi = bump_test_function();
      const double reach = psi.support_end * X;
      const auto L = load(form_id, reach, cfg);
      const auto samples = samples_up_to(L, Orbit::Infinity, reach, CutoffMode::PlainC, cfg);
      const auto consts = compute_constants(L.form());
      std::vector<double> av, cr;
      for (const auto& s : samples) {
        av.push_back(std::abs(s.value));
        cr.push_back(s.point.c_r);
      }
      const auto problem = moment_problem(n, consts.variance_slope, volume(q));
      const double smooth = smooth_moment(av, cr, psi, X, n);
      const double predicted = smooth_main_term(problem, psi, X).real();
      Json j{{"form_id", form_id},
             {"n", n},
             {"X", X},
             {"smooth_moment", smooth},
             {"leading_prediction", predicted},
             {"ratio", smooth / predicted},
             {"sharp_error_exponent", sharp_cutoff_estimate(problem, X).exponent}};
      emit(g, dump(j));
      return kExitOk;
    }

    if (*cache_cmd) {
      SampleCache cache(cfg.resolved_cache_dir());
      if (*c_verify) {
        double c_r_max = 2;
        for (Orbit o : {Orbit::Infinity, Orbit::Zero})
          for (const auto& [key, row] : cache.load(form_id, o)) c_r_max = std::max(c_r_max, row.sample.point.c_r);
        const auto L2 = load(form_id, c_r_max, cfg);
        std::size_t checked = 0;
        const auto bad = verify_cache(cache, *L2.ev, &checked);
        Json mism = Json::array();
        for (const auto& m : bad) mism.push_back(Json{{"row", format_row(m.row)}, {"recomputed", to_json(m.recomputed)}});
        emit(g, dump(Json{{"form_id", form_id}, {"checked", checked}, {"mismatches", mism}}));
        return bad.empty() ? kExitOk : kExitFailed;
      }
      if (*c_export) {
        cache.export_to(file);
        return kExitOk;
      }
      if (*c_import) {
        const auto added = cache.import_from(file);
        std::cerr << "imported " << added << " rows\n";
        return kExitOk;
      }
      if (*c_purge) {
        const auto removed = cache.purge();
        std::cerr << "removed " << removed << " cache files\n";
        return kExitOk;
      }
    }
    throw UsageError("no command");
  } catch (const CacheCorruption& e) {
    std::cerr << "error: corrupt cache: " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}
