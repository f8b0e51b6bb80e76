#include "doctest.h"

#include "smlab/chaos.hpp"
#include "smlab/errors.hpp"
#include "smlab/wiener_poisson.hpp"

#include <cmath>

using namespace smlab;

namespace {

LevyGrid mixed_grid() {
  LevyGrid g;
  g.sigma = 1.0;
  g.dt = {0.5};
  g.atoms = {{1.0, 2.0}, {-0.5, 1.0}};
  return g; // 3 cells: Brownian + two atoms
}

WPKernel random_wp_kernel(int order, const LevyGrid& g, std::uint64_t seed) {
  WPKernel f(order, g);
  Rng rng(seed, 0x7770, 0);
  for (auto& c : f.coeffs) c = rng.next_normal();
  return f;
}

} // namespace

TEST_CASE("jump-free grid replays the Gaussian chaos sampler") {
  LevyGrid g = brownian_grid(4, 1.0);
  GridMeasure gm = g.measure();
  WPKernel f(2, g);
  SymmetricKernel fg(2, gm);
  Rng rng(7, 0x7770, 0);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    double c = rng.next_normal();
    f.coeffs[i] = c;
    fg.coeffs[i] = c;
  }
  auto a = sample_wp(f, 4096, 99);
  auto b = sample(fg, 4096, 99);
  for (std::size_t p = 0; p < a.size(); ++p)
    CHECK(a[p] == doctest::Approx(b[p]).epsilon(1e-12));

  // s = 0 contraction coincides with the Gaussian contraction
  auto hw = contract_ws(f, f, 1, 0);
  auto hg = contract_sym(fg, fg, 1);
  for (std::size_t i = 0; i < hw.coeffs.size(); ++i)
    CHECK(hw.coeffs[i] == doctest::Approx(hg.coeffs[i]).epsilon(1e-12));
}

TEST_CASE("I_1 on a pure Brownian grid is standard normal") {
  LevyGrid g = brownian_grid(4, 1.0);
  WPKernel f(1, g);
  for (auto& c : f.coeffs) c = 1.0; // |f|^2 = sum mu = 1
  auto xs = sample_wp(f, 40000, 3);
  auto m2 = raw_moment(xs, 2);
  auto m4 = raw_moment(xs, 4);
  CHECK(std::abs(m2.value - 1.0) <= 4.0 * m2.stderr_);
  CHECK(std::abs(m4.value - 3.0) <= 4.0 * m4.stderr_);
}

TEST_CASE("single-atom I_1 matches compensated-Poisson cumulants") {
  LevyGrid g;
  g.sigma = 0.0;
  g.dt = {2.0};
  g.atoms = {{1.5, 1.0}}; // lambda T = 2, mu = x^2 lambda T
  WPKernel f(1, g);
  double mu = g.mass(0);
  f.coeffs[0] = 1.0 / std::sqrt(mu); // unit variance
  auto xs = sample_wp(f, 200000, 5);
  auto m2 = raw_moment(xs, 2);
  auto m3 = raw_moment(xs, 3);
  auto m4 = raw_moment(xs, 4);
  double lt = 2.0;
  CHECK(std::abs(m2.value - 1.0) <= 4.0 * m2.stderr_);
  // skewness 1/sqrt(lambda T), excess kurtosis 1/(lambda T)
  CHECK(std::abs(m3.value - 1.0 / std::sqrt(lt)) <= 4.0 * m3.stderr_);
  CHECK(std::abs(m4.value - (3.0 + 1.0 / lt)) <= 4.0 * m4.stderr_);
}

TEST_CASE("isometry on a mixed grid") {
  LevyGrid g = mixed_grid();
  auto f = random_wp_kernel(2, g, 11);
  auto xs = sample_wp(f, 200000, 13);
  auto m1 = raw_moment(xs, 1);
  auto m2 = raw_moment(xs, 2);
  CHECK(std::abs(m1.value) <= 4.0 * m1.stderr_);
  CHECK(std::abs(m2.value - 2.0 * f.norm_sq()) <= 4.0 * m2.stderr_);
}

TEST_CASE("shared-variable contraction: one atom, q = p = 1, r = 0, s = 1") {
  LevyGrid g = mixed_grid();
  auto f = random_wp_kernel(1, g, 17);
  auto h = random_wp_kernel(1, g, 19);
  auto c = contract_ws(f, h, 0, 1);
  REQUIRE(c.order == 1);
  for (int cell = 0; cell < g.dim(); ++cell)
    CHECK(c.value({cell}) ==
          doctest::Approx(g.jump_x(cell) * f.value({cell}) * h.value({cell}))
              .epsilon(1e-12));
  CHECK_THROWS_AS(contract_ws(f, h, 1, 1), invalid_param);
}

TEST_CASE("product formula is pathwise exact on a mixed grid") {
  LevyGrid g = mixed_grid();
  for (auto [q, p] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    auto f = random_wp_kernel(q, g, 23);
    auto h = random_wp_kernel(p, g, 29);
    auto F = product_expand_wp(f, h);
    auto a = sample_wp(f, 2000, 31);
    auto b = sample_wp(h, 2000, 31);
    auto c = sample_wp(F, 2000, 31);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a[i] * b[i] - c[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("compensated Poisson square via the product formula") {
  LevyGrid g;
  g.sigma = 0.0;
  g.dt = {1.0};
  g.atoms = {{2.0, 3.0}};
  WPKernel f(1, g);
  f.coeffs[0] = 1.0;
  auto F = product_expand_wp(f, f);
  // I_1(f)^2 = I_2(f x f) + I_1(x f^2) + |f|^2
  CHECK(F.mean == doctest::Approx(g.mass(0)));
  CHECK(F.kernels.at(1).coeffs[0] == doctest::Approx(g.jump_x(0)));
  auto xs = sample_wp(F, 2000, 37);
  auto ys = sample_wp(f, 2000, 37);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(xs[i] == doctest::Approx(ys[i] * ys[i]).epsilon(1e-12));
}

TEST_CASE("jump term: zero on Brownian kernels, closed form on one atom") {
  auto fb = random_wp_kernel(2, brownian_grid(4, 1.0), 41);
  auto jb = jump_term_estimate(fb, 2000, 43);
  CHECK(jb.value == 0.0);

  LevyGrid g;
  g.sigma = 0.0;
  g.dt = {1.0};
  g.atoms = {{0.5, 4.0}};
  WPKernel f(1, g);
  f.coeffs[0] = 2.0;
  auto j = jump_term_estimate(f, 100, 47);
  CHECK(j.value == doctest::Approx(0.5 * 8.0 * g.mass(0)).epsilon(1e-12));
  CHECK(j.stderr_ == doctest::Approx(0.0));
}

TEST_CASE("jump term vanishes along a shrinking-atom sequence") {
  double prev = 1e300;
  for (double x : {1.0, 0.5, 0.25, 0.125}) {
    LevyGrid g;
    g.sigma = 0.0;
    g.dt = {1.0};
    g.atoms = {{x, 1.0 / (x * x)}}; // mu = 1 at every rung
    WPKernel f(1, g);
    f.coeffs[0] = 1.0;
    auto j = jump_term_estimate(f, 100, 53);
    CHECK(j.value < prev);
    CHECK(j.value == doctest::Approx(x).epsilon(1e-12)); // |x| c^3 mu
    prev = j.value;
  }
}

TEST_CASE("fourth-moment report: shrinking-atom ladder hits the normal") {
  // x_k -> 0 with x^2 nu fixed, so excess kurtosis x_k^2 -> 0
  std::vector<WPKernel> seq;
  for (double x : {1.0, 0.25, 0.0625}) {
    LevyGrid g;
    g.sigma = 0.0;
    g.dt = {1.0};
    g.atoms = {{x, 1.0 / (x * x)}};
    WPKernel f(1, g);
    f.coeffs[0] = 1.0; // |f|^2 = mu = 1
    seq.push_back(std::move(f));
  }
  auto rows = wp_fourth_moment_report(seq, 100000, 59);
  for (const auto& r : rows) {
    CHECK(r.second_moment == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(r.flagged.size() == 1);
    CHECK(r.flagged[0].first == "r=0,s=1");
  }
  CHECK(rows[2].max_flagged() < rows[1].max_flagged());
  CHECK(rows[1].max_flagged() < rows[0].max_flagged());
  CHECK(std::abs(rows[2].fourth_moment.value - 3.0) <=
        3.0 * rows[2].fourth_moment.stderr_);
  CHECK(rows[2].w1_vs_normal < rows[0].w1_vs_normal);
  // |DX|^2 = 1 deterministically at q = 1; the jump quartic fades
  CHECK(rows[2].dnorm_sq_sq.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[2].jump_quartic.value < rows[0].jump_quartic.value);

  // fat single atom: flagged norm stays put, E[X^4] stays off 3
  LevyGrid g1;
  g1.sigma = 0.0;
  g1.dt = {1.0};
  g1.atoms = {{1.0, 0.5}};
  WPKernel f1(1, g1);
  f1.coeffs[0] = 1.0 / std::sqrt(g1.mass(0));
  auto ctrl = wp_fourth_moment_report({f1}, 100000, 61);
  CHECK(std::abs(ctrl[0].fourth_moment.value - 3.0) >
        5.0 * ctrl[0].fourth_moment.stderr_);
  CHECK(ctrl[0].max_flagged() > 0.1);
}

TEST_CASE("fourth-moment report: order-2 diagonal ladder trends") {
  std::vector<WPKernel> seq;
  for (int n : {2, 8, 16}) {
    LevyGrid g;
    g.sigma = 0.0;
    g.dt.assign(static_cast<std::size_t>(n), 1.0);
    g.atoms = {{1.0, 4.0}};
    WPKernel f(2, g);
    double mu = g.mass(0);
    double c = 1.0 / std::sqrt(2.0 * n * mu * mu);
    for (int cell = 0; cell < n; ++cell) f.at({cell, cell}) = c;
    seq.push_back(std::move(f));
  }
  auto rows = wp_fourth_moment_report(seq, 50000, 63);
  for (const auto& r : rows) {
    CHECK(r.second_moment == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.flagged.size() == 3);
  }
  CHECK(rows[2].max_flagged() < rows[0].max_flagged());
  CHECK(std::abs(rows[2].fourth_moment.value - 3.0) <
        std::abs(rows[0].fourth_moment.value - 3.0));
  CHECK(rows[2].w1_vs_normal < rows[0].w1_vs_normal);
  CHECK(std::abs(rows[2].dnorm_sq_sq.value - 4.0) <
        std::abs(rows[0].dnorm_sq_sq.value - 4.0));
  CHECK(rows[2].jump_quartic.value < rows[0].jump_quartic.value);
}

TEST_CASE("third moment of a single-atom I_1 carries the jump correction") {
  LevyGrid g;
  g.sigma = 0.0;
  g.dt = {1.0};
  g.atoms = {{0.8, 5.0}};
  WPKernel f(1, g);
  double c = 0.7;
  f.coeffs[0] = c;
  auto xs = sample_wp(f, 400000, 67);
  auto m3 = raw_moment(xs, 3);
  // E[F^3] = x c^3 mu: the Gaussian term 2 E[F] |DF|^2 vanishes
  double target = g.jump_x(0) * c * c * c * g.mass(0);
  CHECK(std::abs(m3.value - target) <= 4.0 * m3.stderr_);
}

TEST_CASE("caps and input validation") {
  LevyGrid g;
  g.sigma = 0.0;
  g.dt.assign(17, 1.0);
  g.atoms = {{1.0, 1.0}};
  CHECK_THROWS_AS(WPKernel(1, g), cap_exceeded);
  LevyGrid empty;
  empty.sigma = 0.0;
  empty.dt = {1.0};
  CHECK_THROWS_AS(WPKernel(1, empty), invalid_param);
  auto f = random_wp_kernel(2, mixed_grid(), 71);
  CHECK_THROWS_AS(product_expand_wp(f, contract_ws(f, f, 0, 0)), cap_exceeded);
}

TEST_CASE("samples are independent of the thread count") {
  auto f = random_wp_kernel(2, mixed_grid(), 73);
  auto a = sample_wp(f, 10000, 79, 1);
  auto b = sample_wp(f, 10000, 79, 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
