#include "doctest.h"

#include "smlab/errors.hpp"
#include "smlab/laws.hpp"
#include "smlab/stein.hpp"

#include <cmath>

using namespace smlab;

namespace {

TestFunction smooth_h(std::function<double(double)> h,
                      std::function<double(double)> hp, const std::string& id) {
  TestFunction tf;
  tf.h = std::move(h);
  tf.h_prime = std::move(hp);
  tf.id = id;
  return tf;
}

} // namespace

TEST_CASE("normal with h(x)=x solves to f = -1") {
  auto law = catalog("normal", {});
  auto tf = smooth_h([](double x) { return x; }, [](double) { return 1.0; },
                     "identity");
  auto sol = stein_solve(law, tf, 200);
  CHECK(sol.m_h == doctest::Approx(0.0).epsilon(1e-9));
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    if (sol.flagged[i]) continue;
    CHECK(sol.f[i] == doctest::Approx(-1.0).epsilon(1e-7));
  }
  CHECK(sol.sup_residual < 1e-8);
}

TEST_CASE("smoothed step function has tiny residual") {
  auto law = catalog("normal", {});
  // steep but Lipschitz ramp approximating 1_{(-inf,0]}
  auto tf = make_piecewise_linear({-40.0, -0.005, 0.005, 40.0},
                                  {1.0, 1.0, 0.0, 0.0}, "step");
  auto sol = stein_solve(law, tf, 300);
  CHECK(sol.sup_residual < 1e-8);
}

TEST_CASE("clamped identity on centered chi2(1)") {
  auto law = catalog("chi2_centered", {{"v", 1.0}});
  auto tf = make_piecewise_linear({-1.0, 1.0, 60.0}, {-1.0, 1.0, 1.0}, "clamp");
  auto sol = stein_solve(law, tf, 300);
  CHECK(sol.sup_residual < 1e-8);
}

TEST_CASE("f_prime_repr: linear h gives zero, smooth h matches solve") {
  auto law = catalog("normal", {});
  auto lin = smooth_h([](double x) { return x; }, [](double) { return 1.0; },
                      "identity");
  CHECK(std::abs(f_prime_repr(law, lin, 0.3)) < 1e-9);

  auto sine = smooth_h([](double x) { return std::sin(x); },
                       [](double x) { return std::cos(x); }, "sine");
  auto sol = stein_solve(law, sine, 2000);
  // centered finite difference of the solved f at x = 0
  std::size_t j = 0;
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    if (std::abs(sol.grid[i]) < std::abs(sol.grid[j])) j = i;
  double fd = (sol.f[j + 1] - sol.f[j - 1]) / (sol.grid[j + 1] - sol.grid[j - 1]);
  CHECK(std::abs(f_prime_repr(law, sine, sol.grid[j]) - fd) < 1e-5);
}

TEST_CASE("f_second_repr matches second difference and obeys 2||h'||/g*") {
  auto law = catalog("normal", {});
  auto sine = smooth_h([](double x) { return std::sin(x); },
                       [](double x) { return std::cos(x); }, "sine");
  auto sol = stein_solve(law, sine, 4000);
  std::size_t j = 0;
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    if (std::abs(sol.grid[i] - 0.7) < std::abs(sol.grid[j] - 0.7)) j = i;
  double dx = sol.grid[j + 1] - sol.grid[j];
  double fd2 = (sol.f[j + 1] - 2.0 * sol.f[j] + sol.f[j - 1]) / (dx * dx);
  double rep = f_second_repr(law, sine, sol.grid[j]);
  CHECK(std::abs(rep - fd2) < 1e-3);
  CHECK(std::abs(rep) <= 2.0 / law.gstar(sol.grid[j]) + 1e-12);
  // and the solved array agrees with the representation
  CHECK(std::abs(sol.f_second[j] - rep) < 1e-8);
}

TEST_CASE("f_second_repr refuses half-line supports") {
  auto law = catalog("gamma", {});
  auto lin = smooth_h([](double x) { return x; }, [](double) { return 1.0; },
                      "identity");
  CHECK_THROWS_AS(f_second_repr(law, lin, 0.5), invalid_param);
}

TEST_CASE("A and B are nonpositive for full-line laws") {
  for (const auto& name : {"normal", "student_t", "pearson4", "laplace"}) {
    auto law = catalog(name, {});
    CAPTURE(name);
    for (double z : interior_grid(law, 100)) {
      CHECK(stein_A(law, z) <= 1e-12);
      CHECK(stein_B(law, z) <= 1e-12);
    }
  }
}

TEST_CASE("random sweep residuals stay below 1e-6") {
  for (const auto& name : {"normal", "gamma", "laplace"}) {
    auto law = catalog(name, {});
    CAPTURE(name);
    auto [lo, hi] = interior_range(law);
    for (int i = 0; i < 5; ++i) {
      Rng rng(11, 22, static_cast<std::uint64_t>(i));
      auto tf = random_test_function(rng, lo, hi, 10, TestFamily::wasserstein,
                                     "rand");
      auto sol = stein_solve(law, tf, 200);
      CHECK(sol.sup_residual < 1e-6);
    }
  }
}

TEST_CASE("bound constants for the standard normal") {
  auto law = catalog("normal", {});
  auto fm = bound_constant(law, TestFamily::fortet_mourier, 50, 200, 5, 2);
  CHECK(fm.k1_hat <= 4.0);
  CHECK(fm.k1_hat > 0.0);
  auto w = bound_constant(law, TestFamily::wasserstein, 50, 200, 5, 2);
  CHECK(w.k1_hat <= 1.0);
  // doubling the grid moves the estimate < 1%
  auto w2 = bound_constant(law, TestFamily::wasserstein, 50, 400, 5, 2);
  CHECK(std::abs(w2.k1_hat - w.k1_hat) <= 0.01 * w.k1_hat);
}

TEST_CASE("gamma bound constant is finite and saturates") {
  auto law = catalog("gamma", {{"r", 2.0}, {"s", 1.0}});
  auto a = bound_constant(law, TestFamily::wasserstein, 30, 150, 5, 2);
  auto b = bound_constant(law, TestFamily::wasserstein, 30, 300, 5, 2);
  CHECK(std::isfinite(a.k1_hat));
  CHECK(b.k1_hat <= a.k1_hat * 1.01);
}
