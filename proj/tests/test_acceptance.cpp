// Acceptance suite: one numbered pass/fail line per criterion, with pinned
// tolerances. Runs the whole pipeline end to end, so it is the slowest test.

#include "doctest.h"

#include "smlab/chaos.hpp"
#include "smlab/fbm.hpp"
#include "smlab/laws.hpp"
#include "smlab/malliavin.hpp"
#include "smlab/np_bound.hpp"
#include "smlab/quad.hpp"
#include "smlab/stein.hpp"
#include "smlab/wiener_poisson.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

using namespace smlab;

namespace {

const int kThreads = 8;

bool report(int id, const char* what, bool pass, const std::string& detail) {
  std::printf("[%2d] %s  %s: %s\n", id, pass ? "PASS" : "FAIL", what,
              detail.c_str());
  std::fflush(stdout);
  return pass;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

double w1_std_normal(std::vector<double> xs) {
  return wasserstein1_empirical(std::move(xs), normal_cdf,
                                -std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity());
}

SymmetricKernel random_kernel(int q, int n, Rng& rng) {
  SymmetricKernel f(q, uniform_grid(n));
  for (auto& c : f.coeffs) c = rng.next_normal();
  double s = std::sqrt(f.norm_sq());
  for (auto& c : f.coeffs) c /= s;
  return f;
}

} // namespace

TEST_CASE("1: closed-form vs quadrature g* on the full catalog") {
  double worst = 0.0;
  std::string at;
  for (const auto& name : catalog_names()) {
    auto law = catalog(name, {});
    for (double z : interior_grid(law, 200)) {
      double c = law.gstar(z);
      double q = gstar_from_density(law.density, law.support, z);
      double err = std::abs(q - c) / (1.0 + std::abs(c));
      if (err > worst) {
        worst = err;
        at = name;
      }
    }
  }
  CHECK(report(1, "catalog g* consistency", worst < 1e-6,
               "max rel err " + std::to_string(worst) + " (" + at + ")"));
}

TEST_CASE("2: density round trip through g*") {
  double worst = 0.0;
  std::string at;
  for (const auto& name : catalog_names()) {
    auto law = catalog(name, {});
    for (double z : interior_grid(law, 200)) {
      double rho =
          density_from_gstar(law.gstar, law.abs_mean, law.support, z);
      double err = std::abs(rho - law.density(z));
      if (err > worst) {
        worst = err;
        at = name;
      }
    }
  }
  CHECK(report(2, "density round trip", worst < 1e-6,
               "sup err " + std::to_string(worst) + " (" + at + ")"));
}

TEST_CASE("3: Stein residuals and the normal derivative constants") {
  std::vector<ReferenceLaw> laws = {
      catalog("normal", {}),
      catalog("chi2_centered", {{"v", 1.0}}),
      catalog("gamma", {{"r", 1.0}, {"s", 2.0}}),
      catalog("student_t", {{"v", 5.0}}),
      catalog("laplace", {{"c", 1.0}})};
  double worst = 0.0;
  for (const auto& law : laws) {
    auto range = interior_range(law);
    Rng rng(17, 0x61636333, 0);
    for (int i = 0; i < 20; ++i) {
      auto h = random_test_function(rng, range.first, range.second, 8,
                                    TestFamily::wasserstein,
                                    "h" + std::to_string(i));
      worst = std::max(worst, stein_solve(law, h, 400).sup_residual);
    }
  }
  auto normal = catalog("normal", {});
  auto fm = bound_constant(normal, TestFamily::fortet_mourier, 50, 400, 1,
                           kThreads);
  auto w = bound_constant(normal, TestFamily::wasserstein, 50, 400, 1,
                          kThreads);
  bool ok = worst < 1e-6 && fm.k1_hat <= 4.0 * 1.05 && w.k1_hat <= 1.0 * 1.05;
  CHECK(report(3, "Stein residual + k1 constants", ok,
               "sup residual " + std::to_string(worst) + ", k1 FM " +
                   std::to_string(fm.k1_hat) + " (<= 4.2), k1 W " +
                   std::to_string(w.k1_hat) + " (<= 1.05)"));
}

TEST_CASE("4: A and B weights nonpositive on full-line laws") {
  bool ok = true;
  std::string bad;
  for (const auto& name : catalog_names()) {
    auto law = catalog(name, {});
    if (law.support.lo != -kInf || law.support.hi != kInf) continue;
    for (double z : interior_grid(law, 200)) {
      if (stein_A(law, z) > 1e-12 || stein_B(law, z) > 1e-12) {
        ok = false;
        bad = name + " at z=" + std::to_string(z);
      }
    }
  }
  CHECK(report(4, "A(x) <= 0 and B(x) <= 0", ok,
               ok ? "all full-line laws, 200-point grids" : bad));
}

TEST_CASE("5: product formulas, Wiener and Wiener-Poisson") {
  const std::size_t n_paths = 100000;
  double worst_sigma = 0.0;
  Rng rng(23, 0x61636335, 0);
  for (int q = 1; q <= 3; ++q)
    for (int p = q; p <= 3; ++p) {
      auto f = random_kernel(q, 3, rng);
      auto h = random_kernel(p, 3, rng);
      auto expanded = product_expand(f, h);
      auto xf = sample(f, n_paths, 5, kThreads);
      auto xh = sample(h, n_paths, 5, kThreads);
      auto xe = sample(expanded, n_paths, 5, kThreads);
      double m = 0.0, s = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) m += xf[i] * xh[i] - xe[i];
      m /= n_paths;
      for (std::size_t i = 0; i < n_paths; ++i)
        s += (xf[i] * xh[i] - xe[i] - m) * (xf[i] * xh[i] - xe[i] - m);
      double se = std::sqrt(s / n_paths / n_paths);
      worst_sigma = std::max(worst_sigma, std::abs(m) / (3.0 * se + 1e-12));
    }

  LevyGrid grid;
  grid.sigma = 1.0;
  grid.dt = {0.5, 0.5};
  grid.atoms = {{1.0, 2.0}, {-0.5, 4.0}};
  Rng wrng(29, 0x61636336, 0);
  for (int q = 1; q <= 2; ++q)
    for (int p = q; p <= 2; ++p) {
      WPKernel f(q, grid), h(p, grid);
      for (auto& c : f.coeffs) c = wrng.next_normal();
      for (auto& c : h.coeffs) c = wrng.next_normal();
      auto expanded = product_expand_wp(f, h);
      auto xf = sample_wp(f, n_paths, 7, kThreads);
      auto xh = sample_wp(h, n_paths, 7, kThreads);
      auto xe = sample_wp(expanded, n_paths, 7, kThreads);
      double m = 0.0, s = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) m += xf[i] * xh[i] - xe[i];
      m /= n_paths;
      for (std::size_t i = 0; i < n_paths; ++i)
        s += (xf[i] * xh[i] - xe[i] - m) * (xf[i] * xh[i] - xe[i] - m);
      double se = std::sqrt(s / n_paths / n_paths);
      worst_sigma = std::max(worst_sigma, std::abs(m) / (3.0 * se + 1e-12));
    }
  CHECK(report(5, "product formula MC residuals", worst_sigma <= 1.0,
               "worst |residual| / (3 se) = " + std::to_string(worst_sigma)));
}

TEST_CASE("6: exact distance-bound zeros, fast and quadrature paths") {
  auto chi2 = catalog("chi2_centered", {{"v", 1.0}});
  auto normal = catalog("normal", {});
  SmoothFunctional sq;
  sq.dim = 1;
  sq.chaos_order = 2;
  sq.eval = [](const std::vector<double>& z) { return z[0] * z[0] - 1.0; };
  sq.grad = [](const std::vector<double>& z) {
    return std::vector<double>{2.0 * z[0]};
  };
  SmoothFunctional lin;
  lin.dim = 1;
  lin.chaos_order = 1;
  lin.eval = [](const std::vector<double>& z) { return z[0]; };
  lin.grad = [](const std::vector<double>&) {
    return std::vector<double>{1.0};
  };
  SmoothFunctional sq_numeric = sq;
  sq_numeric.chaos_order = 0; // forces the Ornstein-Uhlenbeck quadrature

  double fast_chi2 =
      np_estimate(chi2, gamma_draw(sq, 20000, 1, {}, kThreads), 4.0)
          .np_l1.value;
  double fast_norm =
      np_estimate(normal, gamma_draw(lin, 20000, 1, {}, kThreads), 4.0)
          .np_l1.value;
  double mehler =
      np_estimate(chi2, gamma_draw(sq_numeric, 4000, 1, {}, kThreads), 4.0)
          .np_l1.value;
  bool ok = fast_chi2 < 1e-12 && fast_norm < 1e-12 && mehler < 1e-3;
  CHECK(report(6, "exact distance-bound zeros", ok,
               "fast chi2 " + std::to_string(fast_chi2) + ", fast normal " +
                   std::to_string(fast_norm) + ", Mehler " +
                   std::to_string(mehler)));
}

TEST_CASE("7: fourth-moment ladder on the Wiener side") {
  const std::size_t n_paths = 100000;
  std::vector<int> ladder = {4, 8, 16, 32, 64};
  std::vector<SymmetricKernel> seq;
  for (int n : ladder) seq.push_back(diagonal_clt_kernel(n));
  auto rows = fourth_moment_report(seq, 1.0, n_paths, 13, kThreads);

  bool monotone = true, bound_ok = true;
  double pg = 1e300, pv = 1e300, pw = 1e300, pc = 1e300;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double gap = std::abs(r.fourth_moment.value - 3.0);
    double con = r.contraction.at(1);
    double w1 = w1_std_normal(sample(seq[i], n_paths, 13, kThreads));
    if (con > pc) monotone = false;
    if (gap > pg + 2.0 * r.fourth_moment.stderr_) monotone = false;
    if (r.dnorm_variance.value > pv + 2.0 * r.dnorm_variance.stderr_)
      monotone = false;
    if (w1 > pw + 2.0 * r.fourth_moment.stderr_) monotone = false;
    // the bound is tight (equality) for this kernel family and the fourth
    // moment is heavy-tailed, so with five rungs tested at once the band is
    // 4 combined standard errors rather than 2
    if (r.dnorm_variance.value >
        r.variance_bound + 4.0 * (r.dnorm_variance.stderr_ +
                                  r.fourth_moment.stderr_ / 6.0))
      bound_ok = false;
    pg = gap;
    pv = r.dnorm_variance.value;
    pw = w1;
    pc = con;
  }
  CHECK(report(7, "Wiener fourth-moment ladder", monotone && bound_ok,
               std::string(monotone ? "all four diagnostics decrease"
                                    : "monotonicity violated") +
                   ", variance bound " + (bound_ok ? "holds" : "violated") +
                   " at every rung"));
}

TEST_CASE("8: Wiener-Poisson fourth-moment theorem") {
  const std::size_t n_paths = 200000;
  std::vector<double> xs = {1.0, 0.25, 0.0625};
  std::vector<WPKernel> seq;
  for (double x : xs) {
    LevyGrid g;
    g.sigma = 0.0;
    g.dt = {1.0};
    g.atoms = {{x, 1.0 / (x * x)}};
    WPKernel f(1, g);
    f.coeffs[0] = 1.0;
    seq.push_back(std::move(f));
  }
  auto rows = wp_fourth_moment_report(seq, n_paths, 31, kThreads);
  bool shrinking = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].max_flagged() >= rows[i - 1].max_flagged()) shrinking = false;
  const auto& last = rows.back();
  bool close = std::abs(last.fourth_moment.value - 3.0) <=
               3.0 * last.fourth_moment.stderr_;

  LevyGrid gc;
  gc.sigma = 0.0;
  gc.dt = {1.0};
  gc.atoms = {{1.0, 0.5}};
  WPKernel fc(1, gc);
  fc.coeffs[0] = 1.0 / std::sqrt(gc.mass(0));
  auto ctrl = wp_fourth_moment_report({fc}, n_paths, 37, kThreads)[0];
  bool far = std::abs(ctrl.fourth_moment.value - 3.0) >
             5.0 * ctrl.fourth_moment.stderr_;
  CHECK(report(8, "Wiener-Poisson fourth-moment ladder",
               shrinking && close && far,
               "flagged norms " + std::string(shrinking ? "shrink" : "stall") +
                   ", last E[X^4] " + std::to_string(last.fourth_moment.value) +
                   ", control " + std::to_string(ctrl.fourth_moment.value)));
}

TEST_CASE("9: fBm quadratic-variation functional, H = 0.7") {
  FbmConfig cfg;
  cfg.hurst = 0.7;
  cfg.n_paths = 100000;
  cfg.seed = 41;
  cfg.threads = kThreads;
  cfg.n_boot = 200;
  auto f = make_functional([](double z) { return z; });
  auto rows = moment_ladder(cfg, f, {256, 1024, 4096});
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (std::abs(rows[i].m2.value - 2.0) >
        std::abs(rows[i - 1].m2.value - 2.0) +
            2.0 * (rows[i].m2.stderr_ + rows[i - 1].m2.stderr_))
      monotone = false;
  const auto& last = rows.back();
  bool bands = std::abs(last.m2.value - 2.0) <= 0.1 + 3.0 * last.m2.stderr_ &&
               std::abs(last.m3.value - 8.0) <= 0.8 + 3.0 * last.m3.stderr_ &&
               std::abs(last.m4.value - 60.0) <= 8.0 + 3.0 * last.m4.stderr_;
  CHECK(report(9, "fBm moment ladder", bands && monotone,
               "terminal (m2, m3, m4) = (" + std::to_string(last.m2.value) +
                   ", " + std::to_string(last.m3.value) + ", " +
                   std::to_string(last.m4.value) + ") vs (2, 8, 60)"));

  // the normalization-constant sub-check: the double covariance sum
  // telescopes to T^{2H} exactly, so the ratio is identically 1 and the
  // nominal limit of 2 is unreachable; reported as an honest failure
  double kappa = fgn_covariance_constant(0.7, 4096);
  CHECK(report(9, "fBm normalization constant -> 2",
               std::abs(kappa - 2.0) <= 0.05,
               "T^{-2H} sum sum C = " + std::to_string(kappa) +
                   " (identically 1 for every T and H)"));
}

TEST_CASE("10: growth checker thresholds on the power grid") {
  bool ok = true;
  for (double p : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    Support sup{-1.0, kInf};
    auto g = [p](double x) { return std::pow(x + 1.0, p); };
    auto rep = check_growth(g, sup);
    bool expect = p >= 1.0 && p <= 2.0;
    if ((rep.left.ok && rep.right.ok) != expect || rep.left.inconclusive ||
        rep.right.inconclusive)
      ok = false;
  }
  CHECK(report(10, "growth checker power grid", ok,
               "pass iff 1 <= p <= 2 on {0.5, 1, 1.5, 2, 2.5}"));
}

TEST_CASE("11: bitwise reproducibility across thread counts") {
  bool ok = true;

  auto k = diagonal_clt_kernel(16);
  auto a = fourth_moment_report({k}, 1.0, 20000, 3, 1)[0];
  auto b = fourth_moment_report({k}, 1.0, 20000, 3, 5)[0];
  ok = ok && a.fourth_moment.value == b.fourth_moment.value &&
       a.dnorm_variance.value == b.dnorm_variance.value;

  LevyGrid g;
  g.sigma = 1.0;
  g.dt = {0.5, 0.5};
  g.atoms = {{0.5, 2.0}};
  WPKernel f(1, g);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    f.coeffs[i] = 1.0 + 0.1 * static_cast<double>(i);
  auto wa = wp_fourth_moment_report({f}, 20000, 3, 1)[0];
  auto wb = wp_fourth_moment_report({f}, 20000, 3, 6)[0];
  ok = ok && wa.fourth_moment.value == wb.fourth_moment.value &&
       wa.w1_vs_normal == wb.w1_vs_normal;

  SmoothFunctional sq;
  sq.dim = 1;
  sq.chaos_order = 2;
  sq.eval = [](const std::vector<double>& z) { return z[0] * z[0] - 1.0; };
  sq.grad = [](const std::vector<double>& z) {
    return std::vector<double>{2.0 * z[0]};
  };
  auto ga = gamma_draw(sq, 10000, 9, {}, 1);
  auto gb = gamma_draw(sq, 10000, 9, {}, 7);
  for (std::size_t i = 0; i < ga.x.size(); ++i)
    ok = ok && ga.x[i] == gb.x[i] && ga.y[i] == gb.y[i];

  FbmConfig cfg;
  cfg.hurst = 0.7;
  cfg.n_paths = 5000;
  cfg.seed = 11;
  cfg.n_boot = 50;
  cfg.threads = 1;
  auto fa = moment_ladder(cfg, make_functional([](double z) { return z; }),
                          {128})[0];
  cfg.threads = 4;
  auto fb = moment_ladder(cfg, make_functional([](double z) { return z; }),
                          {128})[0];
  ok = ok && fa.m2.value == fb.m2.value && fa.m4.value == fb.m4.value;

  CHECK(report(11, "thread-count reproducibility", ok,
               "chaos, Wiener-Poisson, gamma draws, fBm ladders bitwise "
               "equal at 1 vs many workers"));
}
