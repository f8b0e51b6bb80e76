// smlab: config-driven experiment runner for the Stein / chaos toolkit.
// smlab <command> --config <file> --out <dir> [--seed N] [--threads N] [--json]
// Exit codes: 0 all verdicts pass, 1 verdict failure, 2 config error,
// 3 numeric failure.

#include "CLI11.hpp"
#include "json.hpp"

#include "smlab/chaos.hpp"
#include "smlab/errors.hpp"
#include "smlab/fbm.hpp"
#include "smlab/laws.hpp"
#include "smlab/malliavin.hpp"
#include "smlab/np_bound.hpp"
#include "smlab/stein.hpp"
#include "smlab/wiener_poisson.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace smlab;

namespace {

constexpr const char* kVersion = "1.0.0";

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunContext {
  json config;
  fs::path out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> artifacts;
  std::vector<Verdict> verdicts;
  json results;

  void check(const std::string& name, bool ok, const std::string& detail) {
    verdicts.push_back({name, ok, detail});
  }
  std::ofstream csv(const std::string& file) {
    fs::create_directories(out);
    artifacts.push_back(file);
    return std::ofstream(out / file);
  }
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// schema guard: every key must be known; missing keys fall back to defaults
void reject_unknown(const json& cfg, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw config_error("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error("key '" + key + "' has the wrong type");
  }
}

ReferenceLaw law_from_config(const json& spec) {
  reject_unknown(spec, {"name", "params"}, "law");
  if (!spec.contains("name")) throw config_error("law needs a 'name'");
  std::map<std::string, double> params;
  if (spec.contains("params"))
    for (auto it = spec.at("params").begin(); it != spec.at("params").end();
         ++it)
      params[it.key()] = it.value().get<double>();
  return catalog(spec.at("name").get<std::string>(), params);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

double w1_vs_std_normal(std::vector<double> xs) {
  return wasserstein1_empirical(std::move(xs), normal_cdf,
                                -std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity());
}

// ---------------------------------------------------------------- catalog --

void run_catalog(RunContext& rc) {
  reject_unknown(rc.config, {"laws", "grid_n", "tol"}, "catalog config");
  const int grid_n = get_or(rc.config, "grid_n", 200);
  const double tol = get_or(rc.config, "tol", 1e-6);

  std::vector<ReferenceLaw> laws;
  if (rc.config.contains("laws")) {
    for (const auto& spec : rc.config.at("laws"))
      laws.push_back(law_from_config(spec));
  } else {
    for (const auto& name : catalog_names()) laws.push_back(catalog(name, {}));
  }

  auto table = rc.csv("catalog.csv");
  table << "law,gstar_err,roundtrip_err,growth_pass,assumption_A,"
           "assumption_B\n";
  json rows = json::array();
  for (const auto& law : laws) {
    auto grid = interior_grid(law, grid_n);
    double gstar_err = 0.0, round_err = 0.0;
    for (double z : grid) {
      double closed = law.gstar(z);
      double quad = gstar_from_density(law.density, law.support, z);
      gstar_err = std::max(gstar_err,
                           std::abs(quad - closed) / (1.0 + std::abs(closed)));
      double rho = density_from_gstar(law.gstar, law.abs_mean, law.support, z);
      round_err = std::max(round_err, std::abs(rho - law.density(z)));
    }
    auto growth = check_growth(law.gstar, law.support);
    auto assume = check_assumptions(law);
    std::string id = law_to_record(law);
    rc.check("gstar-quadrature " + id, gstar_err < tol,
             "max rel err " + std::to_string(gstar_err));
    rc.check("density-roundtrip " + id, round_err < tol,
             "sup err " + std::to_string(round_err));
    rc.check("growth " + id, growth.pass(), "tail integrals diverge");
    table << id << ',' << gstar_err << ',' << round_err << ','
          << growth.pass() << ',' << assume.A << ',' << assume.B << '\n';
    rows.push_back({{"law", id},
                    {"gstar_err", gstar_err},
                    {"roundtrip_err", round_err},
                    {"growth_pass", growth.pass()},
                    {"assumption_A", assume.A},
                    {"assumption_B", assume.B}});
  }
  rc.results["laws"] = rows;
}

// ------------------------------------------------------------------ stein --

void run_stein(RunContext& rc) {
  reject_unknown(rc.config, {"law", "family", "n_h", "grid_n", "tol",
                             "k1_limit"},
                 "stein config");
  ReferenceLaw law = rc.config.contains("law")
                         ? law_from_config(rc.config.at("law"))
                         : catalog("normal", {});
  std::string fam = get_or<std::string>(rc.config, "family", "fm");
  if (fam != "fm" && fam != "w")
    throw config_error("stein family must be 'fm' or 'w'");
  TestFamily family =
      fam == "fm" ? TestFamily::fortet_mourier : TestFamily::wasserstein;
  const int n_h = get_or(rc.config, "n_h", 20);
  const int grid_n = get_or(rc.config, "grid_n", 400);
  const double tol = get_or(rc.config, "tol", 1e-6);
  const double k1_limit =
      get_or(rc.config, "k1_limit", fam == "fm" ? 4.0 : 1.0);

  auto range = interior_range(law);
  Rng rng(rc.seed, 0x73746569, 0);
  double worst_residual = 0.0;
  SteinSolution first;
  for (int i = 0; i < n_h; ++i) {
    auto h = random_test_function(rng, range.first, range.second, 8, family,
                                  "h" + std::to_string(i));
    auto sol = stein_solve(law, h, grid_n);
    worst_residual = std::max(worst_residual, sol.sup_residual);
    if (i == 0) first = sol;
  }
  auto bounds = bound_constant(law, family, n_h, grid_n, rc.seed,
                               static_cast<unsigned>(rc.threads));
  export_solution_csv(first, (rc.out / "stein_solution.csv").string());
  rc.artifacts.push_back("stein_solution.csv");

  rc.check("stein-residual", worst_residual < tol,
           "sup residual " + std::to_string(worst_residual));
  rc.check("k1-bound", bounds.k1_hat <= k1_limit * 1.05,
           "k1_hat " + std::to_string(bounds.k1_hat) + " vs limit " +
               std::to_string(k1_limit));
  rc.results["sup_residual"] = worst_residual;
  rc.results["k1_hat"] = bounds.k1_hat;
  rc.results["k2_hat"] = bounds.k2_hat;
  rc.results["law"] = law_to_record(law);
  rc.results["family"] = fam;
}

// ------------------------------------------------------------------ chaos --

void run_chaos(RunContext& rc) {
  reject_unknown(rc.config, {"ladder", "n_paths"}, "chaos config");
  std::vector<int> ladder =
      get_or(rc.config, "ladder", std::vector<int>{4, 8, 16, 32, 64});
  const std::size_t n_paths = get_or<std::size_t>(rc.config, "n_paths", 100000);

  std::vector<SymmetricKernel> seq;
  for (int n : ladder) seq.push_back(diagonal_clt_kernel(n));
  auto rows = fourth_moment_report(seq, 1.0, n_paths, rc.seed, rc.threads);

  auto table = rc.csv("chaos_ladder.csv");
  table << "n,second_moment,fourth_moment,fourth_se,contraction_1,"
           "dnorm_variance,dnorm_se,variance_bound,w1\n";
  json jrows = json::array();
  bool monotone = true, bound_ok = true;
  double prev_gap = 1e300, prev_var = 1e300, prev_w1 = 1e300,
         prev_con = 1e300;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double w1 = w1_vs_std_normal(sample(seq[i], n_paths, rc.seed, rc.threads));
    double gap = std::abs(r.fourth_moment.value - 3.0);
    double con = r.contraction.at(1);
    if (gap > prev_gap + 2.0 * r.fourth_moment.stderr_) monotone = false;
    if (r.dnorm_variance.value > prev_var + 2.0 * r.dnorm_variance.stderr_)
      monotone = false;
    if (w1 > prev_w1 + 2.0 * r.fourth_moment.stderr_) monotone = false;
    if (con > prev_con) monotone = false;
    // tight bound + heavy-tailed fourth moment: 4 combined standard errors
    if (r.dnorm_variance.value >
        r.variance_bound + 4.0 * (r.dnorm_variance.stderr_ +
                                  r.fourth_moment.stderr_ / 6.0))
      bound_ok = false;
    prev_gap = gap;
    prev_var = r.dnorm_variance.value;
    prev_w1 = w1;
    prev_con = con;
    table << ladder[i] << ',' << r.second_moment << ','
          << r.fourth_moment.value << ',' << r.fourth_moment.stderr_ << ','
          << con << ',' << r.dnorm_variance.value << ','
          << r.dnorm_variance.stderr_ << ',' << r.variance_bound << ',' << w1
          << '\n';
    jrows.push_back({{"n", ladder[i]},
                     {"fourth_moment", r.fourth_moment.value},
                     {"contraction_1", con},
                     {"dnorm_variance", r.dnorm_variance.value},
                     {"variance_bound", r.variance_bound},
                     {"w1", w1}});
  }
  rc.check("clt-ladder-monotone", monotone,
           "contractions, |E[X^4]-3|, Var(|DX|^2/2), W1 all shrink");
  rc.check("variance-bound", bound_ok,
           "Var(|DX|^2/q) <= (q-1)/(3q) (E[X^4]-3) at every rung");
  rc.results["ladder"] = jrows;
}

// ---------------------------------------------------------------- npbound --

void run_npbound(RunContext& rc) {
  reject_unknown(rc.config,
                 {"construction", "n_paths", "bins", "tol_fast", "tol_mehler"},
                 "npbound config");
  std::string cons =
      get_or<std::string>(rc.config, "construction", "chi2_exact");
  const std::size_t n_paths = get_or<std::size_t>(rc.config, "n_paths", 20000);
  const int bins = get_or(rc.config, "bins", 50);
  const double tol_fast = get_or(rc.config, "tol_fast", 1e-12);
  const double tol_mehler = get_or(rc.config, "tol_mehler", 1e-3);

  SmoothFunctional F;
  ReferenceLaw law = catalog("normal", {});
  bool fast = true;
  if (cons == "chi2_exact" || cons == "chi2_mehler") {
    law = catalog("chi2_centered", {{"v", 1.0}});
    F.dim = 1;
    F.eval = [](const std::vector<double>& z) { return z[0] * z[0] - 1.0; };
    F.grad = [](const std::vector<double>& z) {
      return std::vector<double>{2.0 * z[0]};
    };
    fast = cons == "chi2_exact";
    F.chaos_order = fast ? 2 : 0;
  } else if (cons == "normal_exact") {
    F.dim = 1;
    F.chaos_order = 1;
    F.eval = [](const std::vector<double>& z) { return z[0]; };
    F.grad = [](const std::vector<double>&) {
      return std::vector<double>{1.0};
    };
  } else {
    throw config_error("construction must be chi2_exact, chi2_mehler or "
                       "normal_exact");
  }

  auto gamma = gamma_draw(F, n_paths, rc.seed, {}, rc.threads);
  auto rep = np_estimate(law, gamma, 4.0, "fm_normal", bins);
  auto mb = moment_bound(law, gamma, 4.0, bins);
  export_regression_csv(conditional_regress(gamma, bins),
                        (rc.out / "regression.csv").string());
  rc.artifacts.push_back("regression.csv");

  double tol = fast ? tol_fast : tol_mehler;
  rc.check("np-l1-zero", rep.np_l1.value < tol,
           "E|g*(X) - Y| = " + std::to_string(rep.np_l1.value) + " (" +
               (fast ? "fast path" : "Mehler quadrature") + ")");
  rc.check("sandwich", rep.sandwich_ok, "d_w <= k np_l1 + allowance");
  rc.check("jensen", rep.jensen_ok, "regressed <= raw");
  rc.results["np_l1"] = rep.np_l1.value;
  rc.results["np_l1_regressed"] = rep.np_l1_regressed.value;
  rc.results["np_l2"] = rep.np_l2;
  rc.results["d_w_empirical"] = rep.d_w_empirical;
  rc.results["moment_bound"] = mb.value;
  rc.results["law"] = rep.law_id;
  rc.results["construction"] = cons;
}

// --------------------------------------------------------------------- wp --

void run_wp(RunContext& rc) {
  reject_unknown(rc.config, {"atom_sizes", "control", "n_paths"},
                 "wp config");
  std::vector<double> atom_sizes =
      get_or(rc.config, "atom_sizes", std::vector<double>{1.0, 0.25, 0.0625});
  const std::size_t n_paths = get_or<std::size_t>(rc.config, "n_paths", 100000);

  std::vector<WPKernel> seq;
  for (double x : atom_sizes) {
    LevyGrid g;
    g.sigma = 0.0;
    g.dt = {1.0};
    g.atoms = {{x, 1.0 / (x * x)}};
    WPKernel f(1, g);
    f.coeffs[0] = 1.0;
    seq.push_back(std::move(f));
  }
  auto rows = wp_fourth_moment_report(seq, n_paths, rc.seed, rc.threads);

  json ctrl_cfg = rc.config.contains("control") ? rc.config.at("control")
                                                : json::object();
  reject_unknown(ctrl_cfg, {"x", "nu"}, "wp control");
  LevyGrid gc;
  gc.sigma = 0.0;
  gc.dt = {1.0};
  gc.atoms = {{get_or(ctrl_cfg, "x", 1.0), get_or(ctrl_cfg, "nu", 0.5)}};
  WPKernel fc(1, gc);
  fc.coeffs[0] = 1.0 / std::sqrt(gc.mass(0));
  auto control = wp_fourth_moment_report({fc}, n_paths, rc.seed + 1,
                                         rc.threads)[0];

  auto table = rc.csv("wp_ladder.csv");
  table << "atom_x,second_moment,flagged_max,fourth_moment,fourth_se,w1,"
           "jump_quartic,jump_term\n";
  json jrows = json::array();
  bool shrinking = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto jt = jump_term_estimate(seq[i], n_paths, rc.seed + 2, rc.threads);
    if (i > 0 && r.max_flagged() >= rows[i - 1].max_flagged())
      shrinking = false;
    table << atom_sizes[i] << ',' << r.second_moment << ',' << r.max_flagged()
          << ',' << r.fourth_moment.value << ',' << r.fourth_moment.stderr_
          << ',' << r.w1_vs_normal << ',' << r.jump_quartic.value << ','
          << jt.value << '\n';
    jrows.push_back({{"atom_x", atom_sizes[i]},
                     {"flagged_max", r.max_flagged()},
                     {"fourth_moment", r.fourth_moment.value},
                     {"w1", r.w1_vs_normal},
                     {"jump_term", jt.value}});
  }
  const auto& last = rows.back();
  rc.check("wp-flagged-norms-shrink", shrinking,
           "flagged contraction norms decrease along the ladder");
  rc.check("wp-fourth-moment",
           std::abs(last.fourth_moment.value - 3.0) <=
               3.0 * last.fourth_moment.stderr_,
           "E[X^4] = " + std::to_string(last.fourth_moment.value) +
               " at the last rung");
  rc.check("wp-negative-control",
           std::abs(control.fourth_moment.value - 3.0) >
               5.0 * control.fourth_moment.stderr_,
           "constant atom stays at E[X^4] = " +
               std::to_string(control.fourth_moment.value));
  rc.results["ladder"] = jrows;
  rc.results["control_fourth_moment"] = control.fourth_moment.value;
}

// -------------------------------------------------------------------- fbm --

void run_fbm(RunContext& rc) {
  reject_unknown(rc.config,
                 {"hurst", "t_ladder", "n_paths", "f", "n_boot", "bands",
                  "check_kappa_nominal"},
                 "fbm config");
  FbmConfig cfg;
  cfg.hurst = get_or(rc.config, "hurst", 0.7);
  cfg.n_paths = get_or<std::size_t>(rc.config, "n_paths", 100000);
  cfg.seed = rc.seed;
  cfg.threads = rc.threads;
  cfg.n_boot = get_or(rc.config, "n_boot", 200);
  std::vector<int> t_ladder =
      get_or(rc.config, "t_ladder", std::vector<int>{256, 1024, 4096});
  std::string fname = get_or<std::string>(rc.config, "f", "identity");
  SubordinatedFunctional f;
  if (fname == "identity")
    f = make_functional([](double z) { return z; });
  else if (fname == "cubic_mix")
    f = make_functional([](double z) { return z + z * z * z / 10.0; });
  else
    throw config_error("fbm f must be 'identity' or 'cubic_mix'");

  json bands = rc.config.contains("bands") ? rc.config.at("bands")
                                           : json::object();
  reject_unknown(bands, {"m2", "m3", "m4"}, "fbm bands");
  double b2 = get_or(bands, "m2", 0.1), b3 = get_or(bands, "m3", 0.8),
         b4 = get_or(bands, "m4", 8.0);

  auto rows = moment_ladder(cfg, f, t_ladder);
  auto table = rc.csv("fbm_ladder.csv");
  table << "T,m2,m2_se,m3,m3_se,m4,m4_se,center,m2_target,m3_target,"
           "m4_target\n";
  json jrows = json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0) {
      const auto& q = rows[i - 1];
      if (std::abs(r.m2.value - 2.0) >
          std::abs(q.m2.value - 2.0) + 2.0 * (r.m2.stderr_ + q.m2.stderr_))
        monotone = false;
    }
    table << r.t_steps << ',' << r.m2.value << ',' << r.m2.stderr_ << ','
          << r.m3.value << ',' << r.m3.stderr_ << ',' << r.m4.value << ','
          << r.m4.stderr_ << ',' << r.center << ",2,8,60\n";
    jrows.push_back({{"T", r.t_steps},
                     {"m2", r.m2.value},
                     {"m3", r.m3.value},
                     {"m4", r.m4.value},
                     {"center", r.center}});
  }
  const auto& last = rows.back();
  rc.check("fbm-m2", std::abs(last.m2.value - 2.0) <= b2,
           "terminal m2 " + std::to_string(last.m2.value) + " vs 2 +- " +
               std::to_string(b2));
  rc.check("fbm-m3", std::abs(last.m3.value - 8.0) <= b3,
           "terminal m3 " + std::to_string(last.m3.value) + " vs 8 +- " +
               std::to_string(b3));
  rc.check("fbm-m4", std::abs(last.m4.value - 60.0) <= b4,
           "terminal m4 " + std::to_string(last.m4.value) + " vs 60 +- " +
               std::to_string(b4));
  rc.check("fbm-monotone", monotone, "m2 approaches 2 across the ladder");
  if (get_or(rc.config, "check_kappa_nominal", false)) {
    // the double covariance sum telescopes to T^{2H}, so the ratio sits at
    // exactly 1 for every T; the nominal ->2 claim cannot hold numerically
    double kappa = fgn_covariance_constant(cfg.hurst, t_ladder.back());
    rc.check("fbm-kappa-nominal", std::abs(kappa - 2.0) <= 0.05,
             "T^{-2H} sum sum C = " + std::to_string(kappa) +
                 " (identically 1; nominal target 2)");
    rc.results["kappa"] = kappa;
  }
  rc.results["ladder"] = jrows;
}

// ----------------------------------------------------------------- runner --

struct Experiment {
  std::string name;
  std::string command;
  std::string description;
  json config;
};

std::vector<Experiment> registry() {
  return {
      {"catalog-consistency", "catalog",
       "closed-form vs quadrature g*, density round trip, growth checks for "
       "the full law catalog",
       json::object()},
      {"stein-normal-fm", "stein",
       "Stein residuals and derivative-bound constant for the standard "
       "normal, bounded-Lipschitz family",
       {{"law", {{"name", "normal"}}}, {"family", "fm"}}},
      {"stein-chi2-w", "stein",
       "Stein residuals for the centered chi-square(1), Lipschitz family",
       {{"law", {{"name", "chi2_centered"}, {"params", {{"v", 1.0}}}}},
        {"family", "w"},
        {"k1_limit", 10.0}}},
      {"chaos-clt-ladder", "chaos",
       "fourth-moment ladder for the diagonal second-chaos sequence with "
       "contraction norms and the variance bound",
       json::object()},
      {"npbound-chi2-exact", "npbound",
       "exact-zero distance bound for X = I_2(e x e) against the centered "
       "chi-square(1)",
       {{"construction", "chi2_exact"}}},
      {"npbound-chi2-mehler", "npbound",
       "same construction through the Ornstein-Uhlenbeck quadrature path",
       {{"construction", "chi2_mehler"}}},
      {"wp-shrinking-atoms", "wp",
       "Wiener-Poisson fourth-moment ladder with shrinking jump atoms and a "
       "fat-atom negative control",
       json::object()},
      {"fbm-chi2-h07", "fbm",
       "fractional Gaussian noise quadratic functional: moment ladder toward "
       "the centered chi-square(1) targets at H = 0.7",
       json::object()},
  };
}

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, std::uint64_t seed, int threads,
                bool emit_json) {
  auto t0 = std::chrono::steady_clock::now();
  RunContext rc;
  rc.out = out_dir;
  rc.seed = seed;
  rc.threads = threads;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw config_error("cannot open config " + config_path);
      try {
        in >> rc.config;
      } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") +
                           e.what());
      }
    } else {
      rc.config = json::object();
    }
    fs::create_directories(rc.out);

    if (command == "catalog")
      run_catalog(rc);
    else if (command == "stein")
      run_stein(rc);
    else if (command == "chaos")
      run_chaos(rc);
    else if (command == "npbound")
      run_npbound(rc);
    else if (command == "wp")
      run_wp(rc);
    else if (command == "fbm")
      run_fbm(rc);
    else
      throw config_error("unknown command " + command);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_param& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cap_exceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }

  bool pass = true;
  json jverdicts = json::array();
  for (const auto& v : rc.verdicts) {
    pass = pass && v.pass;
    jverdicts.push_back(
        {{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  }
  json report = {{"tool", "smlab"},
                 {"version", kVersion},
                 {"command", command},
                 {"seed", seed},
                 {"threads", threads},
                 {"config", rc.config},
                 {"config_hash", fnv1a(rc.config.dump())},
                 {"results", rc.results},
                 {"verdicts", jverdicts},
                 {"pass", pass}};
  fs::create_directories(rc.out);
  std::ofstream(rc.out / "report.json") << report.dump(2) << '\n';
  rc.artifacts.push_back("report.json");
  auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  json manifest = {{"artifacts", rc.artifacts},
                   {"wall_ms", wall},
                   {"version", kVersion}};
  std::ofstream(rc.out / "manifest.json") << manifest.dump(2) << '\n';
  if (emit_json) std::cout << report.dump(2) << std::endl;

  for (const auto& v : rc.verdicts)
    std::cerr << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail
              << "\n";
  return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"smlab: Stein / Malliavin distributional-distance toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "smlab_out";
  std::uint64_t seed = 1;
  int threads = 1;
  bool emit_json = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "base RNG seed");
    cmd->add_option("--threads", threads, "worker pool size")
        ->check(CLI::Range(1, 256));
    cmd->add_flag("--json", emit_json, "print the report to stdout");
  };

  for (const char* name : {"catalog", "stein", "chaos", "npbound", "wp",
                           "fbm"})
    add_common(app.add_subcommand(
        name, std::string("run the ") + name + " experiment pipeline"));
  auto* list = app.add_subcommand("list-experiments",
                                  "print the built-in experiment registry");
  bool list_json = false;
  list->add_flag("--json", list_json, "machine-readable registry");

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  if (sub == list) {
    if (list_json) {
      json j = json::array();
      for (const auto& e : registry())
        j.push_back({{"name", e.name},
                     {"command", e.command},
                     {"description", e.description},
                     {"config", e.config}});
      std::cout << j.dump(2) << std::endl;
    } else {
      for (const auto& e : registry())
        std::cout << e.name << " (" << e.command << "): " << e.description
                  << "\n";
    }
    return 0;
  }
  return run_command(sub->get_name(), config_path, out_dir, seed, threads,
                     emit_json);
}
