#include "doctest.h"

#include "smlab/chaos.hpp"
#include "smlab/errors.hpp"
#include "smlab/malliavin.hpp"
#include "smlab/np_bound.hpp"

#include <cmath>
#include <random>

using namespace smlab;

namespace {

// F(xi) = xi_0^2 - 1, a pure second-chaos element with Y = g*(X) exactly
SmoothFunctional chi2_functional() {
  SmoothFunctional F;
  F.dim = 1;
  F.chaos_order = 2;
  F.eval = [](const std::vector<double>& z) { return z[0] * z[0] - 1.0; };
  F.grad = [](const std::vector<double>& z) {
    return std::vector<double>{2.0 * z[0]};
  };
  return F;
}

SmoothFunctional linear_functional() {
  SmoothFunctional F;
  F.dim = 1;
  F.chaos_order = 1;
  F.eval = [](const std::vector<double>& z) { return z[0]; };
  F.grad = [](const std::vector<double>&) { return std::vector<double>{1.0}; };
  return F;
}

} // namespace

TEST_CASE("exact zero: chi2(1) target hit by xi^2 - 1 on the fast path") {
  auto law = catalog("chi2_centered", {{"v", 1.0}});
  auto gamma = gamma_draw(chi2_functional(), 20000, 11);
  REQUIRE(gamma.fast_path);
  // g*(x) = 2(x + 1) on (-1, inf): Y = (2 xi)^2 / 2 = 2 xi^2 = g*(X)
  double worst = 0.0;
  for (std::size_t i = 0; i < gamma.x.size(); ++i)
    worst = std::max(worst,
                     std::abs(law.gstar(gamma.x[i]) - gamma.y[i]));
  CHECK(worst < 1e-12);

  auto rep = np_estimate(law, gamma, 4.0, "fm_normal");
  CHECK(rep.np_l1.value < 1e-12);
  CHECK(rep.np_l1_regressed.value < 1e-10);
  CHECK(rep.np_l2 < 1e-10);
  CHECK(rep.sandwich_ok);
  CHECK(rep.jensen_ok);
  // the W1 gap itself is pure MC noise
  CHECK(rep.d_w_empirical < 0.05);
}

TEST_CASE("exact zero: standard normal via a first-chaos functional") {
  auto law = catalog("normal", {});
  auto gamma = gamma_draw(linear_functional(), 20000, 12);
  for (double y : gamma.y) CHECK(y == doctest::Approx(1.0).epsilon(1e-14));
  auto rep = np_estimate(law, gamma, 1.0);
  CHECK(rep.np_l1.value < 1e-12);
  CHECK(rep.sandwich_ok);
  CHECK(rep.jensen_ok);
}

TEST_CASE("Mehler quadrature path gives a small but nonzero gap") {
  QuadratureSpec spec;
  auto F = chi2_functional();
  F.chaos_order = 0; // force the OU quadrature route
  auto gamma = gamma_draw(F, 20000, 13, spec);
  REQUIRE(!gamma.fast_path);
  auto law = catalog("chi2_centered", {{"v", 1.0}});
  auto rep = np_estimate(law, gamma, 4.0);
  CHECK(rep.np_l1.value < 1e-3);
  CHECK(rep.jensen_ok);
}

TEST_CASE("w1_empirical oracle: point mass at 0 vs normal is sqrt(2/pi)") {
  auto law = catalog("normal", {});
  std::vector<double> zeros(20000, 0.0);
  double d = w1_empirical(zeros, law);
  CHECK(d == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-3));
  CHECK_THROWS_AS(w1_empirical(std::vector<double>(10, 0.0), law),
                  invalid_param);
}

TEST_CASE("gz_second_moment: Pearson closed form agrees with quadrature") {
  auto law = catalog("gamma", {{"r", 1.0}, {"s", 2.0}});
  REQUIRE(law.pearson.has_value());
  double closed = gz_second_moment(law);
  auto plain = law;
  plain.pearson.reset();
  double quad = gz_second_moment(plain);
  CHECK(closed == doctest::Approx(quad).epsilon(1e-6));
  // normal: g* = 1 so E[g*^2] = 1
  CHECK(gz_second_moment(catalog("normal", {})) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("moment_bound collapses when the law is matched") {
  auto law = catalog("chi2_centered", {{"v", 1.0}});
  auto gamma = gamma_draw(chi2_functional(), 40000, 14);
  auto mb = moment_bound(law, gamma, 4.0);
  // each term is a |sample mean - exact| gap; 4 se is the working band
  CHECK(mb.t1.value <= 4.0 * mb.t1.stderr_);
  CHECK(mb.t2.value <= 4.0 * mb.t2.stderr_);
  CHECK(mb.t3.value <= 4.0 * mb.t3.stderr_);
  auto rep = characterize(law, gamma);
  CHECK(rep.verdict);
}

TEST_CASE("characterize rejects a mismatched law") {
  auto law = catalog("normal", {});
  auto gamma = gamma_draw(chi2_functional(), 40000, 15);
  auto rep = characterize(law, gamma);
  CHECK(!rep.verdict);
}

TEST_CASE("pearson_convergence_check on the diagonal CLT ladder") {
  PearsonParams normal_pp; // alpha = beta = 0, gamma = 1
  normal_pp.gamma = 1.0;
  std::vector<LadderPoint> pts;
  for (int n : {4, 16, 64}) {
    auto f = diagonal_clt_kernel(n);
    std::vector<double> xs, dn;
    sample_with_dnorm(f, 60000, 21, 1, xs, dn);
    LadderPoint p;
    p.label = static_cast<double>(n);
    p.m2 = raw_moment(xs, 2);
    p.m3 = raw_moment(xs, 3);
    p.m4 = raw_moment(xs, 4);
    std::vector<double> g(dn.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = dn[i] / 2.0;
    double m = raw_moment(g, 1).value;
    std::vector<double> dev(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      dev[i] = (g[i] - m) * (g[i] - m);
    p.var_g = raw_moment(dev, 1);
    pts.push_back(p);
  }
  auto v = pearson_convergence_check(normal_pp, pts);
  CHECK(v.case_name == "normal");
  CHECK(v.pass);
  for (const auto& l : v.lines) CHECK(l.pass);
}

TEST_CASE("pearson_convergence_check flags a stalled ladder") {
  PearsonParams pp;
  pp.gamma = 1.0;
  std::vector<LadderPoint> pts(2);
  pts[0].m2 = {1.0, 0.001};
  pts[0].var_g = {0.5, 0.001};
  pts[1].m2 = {1.0, 0.001};
  pts[1].var_g = {0.5, 0.001}; // not shrinking toward 0
  auto v = pearson_convergence_check(pp, pts);
  CHECK(!v.pass);
}

TEST_CASE("polynomial_gstar_check: first-chaos ladder matches the normal") {
  auto law = catalog("normal", {});
  // degree-0 g*: need moments up to max(0, 2) = 2
  std::vector<std::vector<MomentEstimate>> ladder;
  for (int n : {8, 64}) {
    GridMeasure grid = uniform_grid(n, 1.0);
    SymmetricKernel f(1, grid);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
      f.coeffs[i] = 1.0 / std::sqrt(static_cast<double>(n));
    auto xs = sample(f, 40000, 31, 1);
    std::vector<MomentEstimate> rung;
    for (int p = 1; p <= 2; ++p) rung.push_back(raw_moment(xs, p));
    ladder.push_back(rung);
  }
  auto v = polynomial_gstar_check(law, 0, ladder);
  CHECK(v.pass);
  CHECK_THROWS_AS(polynomial_gstar_check(law, 2, ladder), moment_undefined);
}

TEST_CASE("np_estimate input validation") {
  auto law = catalog("normal", {});
  GammaSamples tiny;
  tiny.x = {0.0, 1.0};
  tiny.y = {1.0, 1.0};
  CHECK_THROWS_AS(np_estimate(law, tiny, 1.0), invalid_param);
}
