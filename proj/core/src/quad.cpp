#include "smlab/quad.hpp"
#include "smlab/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <string>

namespace smlab {

namespace bq = boost::math::quadrature;

namespace {
// The integrators cache node tables lazily, which is not safe under
// reentrant use of a shared object; nested calls fall back to fresh ones.
thread_local int g_quad_depth = 0;

template <class Q, class F>
double with_integrator(const F& run) {
  struct Guard {
    Guard() { ++g_quad_depth; }
    ~Guard() { --g_quad_depth; }
  } guard;
  if (g_quad_depth == 1) {
    thread_local Q q;
    return run(q);
  }
  Q q;
  return run(q);
}
} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (!(a < b)) throw invalid_param("integrate: empty interval");
  double err = 0.0, l1 = 0.0;
  double val;
  const bool a_inf = std::isinf(a), b_inf = std::isinf(b);
  if (!a_inf && !b_inf) {
    val = with_integrator<bq::tanh_sinh<double>>([&](auto& q) {
      return q.integrate(f, a, b, rel_tol, &err, &l1);
    });
  } else if (a_inf && b_inf) {
    val = with_integrator<bq::sinh_sinh<double>>(
        [&](auto& q) { return q.integrate(f, rel_tol, &err, &l1); });
  } else if (!a_inf) {
    auto g = [&](double t) { return f(a + t); };
    val = with_integrator<bq::exp_sinh<double>>(
        [&](auto& q) { return q.integrate(g, rel_tol, &err, &l1); });
  } else {
    auto g = [&](double t) { return f(b - t); };
    val = with_integrator<bq::exp_sinh<double>>(
        [&](auto& q) { return q.integrate(g, rel_tol, &err, &l1); });
  }
  // err is the absolute difference of the last two refinement levels
  if (!std::isfinite(val) ||
      err > 1e-6 * std::max({1.0, std::abs(val), l1}))
    throw numeric_failure("integrate: quadrature did not converge on [" +
                          std::to_string(a) + ", " + std::to_string(b) +
                          "]: val=" + std::to_string(val) +
                          " err=" + std::to_string(err) +
                          " l1=" + std::to_string(l1));
  return val;
}

double gauss_fixed(const std::function<double(double)>& f, double a, double b,
                   unsigned points) {
  switch (points) {
    case 7:  return bq::gauss<double, 7>::integrate(f, a, b);
    case 15: return bq::gauss<double, 15>::integrate(f, a, b);
    case 31: return bq::gauss<double, 31>::integrate(f, a, b);
    default: throw invalid_param("gauss_fixed: unsupported point count");
  }
}

void gauss_legendre_01(unsigned n, double* nodes, double* weights) {
  // Newton iteration on P_n; standard Golub-Welsch-free construction.
  for (unsigned i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5)); // initial guess
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (unsigned k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // map from (-1,1) to (0,1)
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * pp * pp); // = w/2 on (0,1)
  }
}

} // namespace smlab
