#include "smlab/laws.hpp"
#include "smlab/errors.hpp"
#include "smlab/quad.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace smlab {

namespace bm = boost::math;

bool Support::full_line() const { return std::isinf(lo) && std::isinf(hi); }
bool Support::finite() const { return std::isfinite(lo) && std::isfinite(hi); }
double Support::width() const { return hi - lo; }

namespace {

constexpr double kDensityFloor = 1e-290;

double phi_std(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

double require(const std::map<std::string, double>& p, const std::string& k) {
  auto it = p.find(k);
  if (it == p.end()) throw invalid_param("catalog: missing parameter " + k);
  return it->second;
}

std::map<std::string, double> with_defaults(
    const std::string& name, std::map<std::string, double> user,
    const std::map<std::string, double>& defs) {
  for (const auto& [k, v] : defs)
    user.emplace(k, v);
  for (const auto& [k, v] : user)
    if (!defs.count(k))
      throw invalid_param("catalog: unknown parameter '" + k + "' for " + name);
  return user;
}

// pearson-polynomial antiderivative of g*, anchored
std::function<double(double)> pearson_Gstar(const PearsonParams& pp,
                                            double anchor) {
  auto P = [pp](double z) {
    return pp.alpha * z * z * z / 3.0 + pp.beta * z * z / 2.0 + pp.gamma * z;
  };
  double base = P(anchor);
  return [P, base](double z) { return P(z) - base; };
}

std::function<double(double)> fd_derivative(std::function<double(double)> f) {
  return [f](double z) {
    double h = 1e-6 * (1.0 + std::abs(z));
    return (f(z + h) - f(z - h)) / (2.0 * h);
  };
}

void verify_law(const ReferenceLaw& law) {
  const auto& s = law.support;
  // split at 0 so interior kinks (laplace) do not degrade convergence
  auto mass = [&](const std::function<double(double)>& f) {
    if (s.lo < 0.0 && s.hi > 0.0)
      return integrate(f, s.lo, 0.0, 1e-9) + integrate(f, 0.0, s.hi, 1e-9);
    return integrate(f, s.lo, s.hi, 1e-9);
  };
  double total = mass(law.density);
  if (std::abs(total - 1.0) > 1e-6)
    throw numeric_failure(law.name + ": density does not integrate to 1 (" +
                          std::to_string(total) + ")");
  double m = mass([&](double z) { return z * law.density(z); });
  if (std::abs(m) > 1e-6 * law.scale)
    throw numeric_failure(law.name + ": law is not centered (mean " +
                          std::to_string(m) + ")");
  // (g* rho)' = -z rho at a few interior points, finite differences
  auto [lo, hi] = interior_range(law);
  for (int i = 1; i <= 9; ++i) {
    double z = lo + (hi - lo) * i / 10.0;
    if (law.gstar(z) <= 0.0)
      throw numeric_failure(law.name + ": g* not positive at interior point");
    double h = 1e-6 * (1.0 + std::abs(z));
    double d = (law.gstar(z + h) * law.density(z + h) -
                law.gstar(z - h) * law.density(z - h)) /
               (2.0 * h);
    double rhs = -z * law.density(z);
    double tol = 1e-4 * (std::abs(rhs) + law.density(z) + 1e-12);
    if (std::abs(d - rhs) > tol)
      throw numeric_failure(law.name + ": (g* rho)' != -z rho at z=" +
                            std::to_string(z));
  }
}

bool bounded_density(const ReferenceLaw& law) {
  const auto& s = law.support;
  double eps = 1e-5 * (s.finite() ? s.width() : law.scale);
  for (double e : {s.lo, s.hi}) {
    if (!std::isfinite(e)) continue;
    double sgn = (e == s.lo) ? 1.0 : -1.0;
    double d1 = law.density(e + sgn * eps);
    double d2 = law.density(e + sgn * eps / 16.0);
    if (d2 > 4.0 * d1 && d2 > 10.0) return false;
  }
  return true;
}

} // namespace

// ---------------------------------------------------------------------------

ReferenceLaw catalog(const std::string& name,
                     const std::map<std::string, double>& user_params) {
  ReferenceLaw law;
  law.name = name;

  if (name == "normal") {
    auto p = with_defaults(name, user_params, {{"sigma", 1.0}});
    double sg = require(p, "sigma");
    if (sg <= 0) throw invalid_param("normal: sigma must be > 0");
    law.params = p;
    law.support = {-kInf, kInf};
    bm::normal_distribution<double> d(0.0, sg);
    law.density = [d](double z) { return bm::pdf(d, z); };
    law.cdf = [d](double z) { return bm::cdf(d, z); };
    law.ccdf = [d](double z) { return bm::cdf(bm::complement(d, z)); };
    double v = sg * sg;
    law.gstar = [v](double) { return v; };
    law.pearson = PearsonParams{0.0, 0.0, v};
    law.variance = v;
  } else if (name == "gamma") {
    auto p = with_defaults(name, user_params, {{"r", 1.0}, {"s", 1.0}});
    double r = require(p, "r"), s = require(p, "s");
    if (r <= 0 || s <= 0) throw invalid_param("gamma: need r, s > 0");
    law.params = p;
    double l = -r * s;
    law.support = {l, kInf};
    bm::gamma_distribution<double> d(r, s);
    law.density = [d, l](double z) {
      return z > l ? bm::pdf(d, z - l) : 0.0;
    };
    law.cdf = [d, l](double z) { return z > l ? bm::cdf(d, z - l) : 0.0; };
    law.ccdf = [d, l](double z) {
      return z > l ? bm::cdf(bm::complement(d, z - l)) : 1.0;
    };
    law.gstar = [s, l](double z) { return s * (z - l); };
    law.pearson = PearsonParams{0.0, s, -s * l};
    law.variance = r * s * s;
  } else if (name == "chi2_centered") {
    auto p = with_defaults(name, user_params, {{"v", 1.0}});
    double v = require(p, "v");
    if (v <= 0) throw invalid_param("chi2_centered: need v > 0");
    law.params = p;
    double l = -v;
    law.support = {l, kInf};
    bm::gamma_distribution<double> d(v / 2.0, 2.0);
    law.density = [d, l](double z) {
      return z > l ? bm::pdf(d, z - l) : 0.0;
    };
    law.cdf = [d, l](double z) { return z > l ? bm::cdf(d, z - l) : 0.0; };
    law.ccdf = [d, l](double z) {
      return z > l ? bm::cdf(bm::complement(d, z - l)) : 1.0;
    };
    law.gstar = [l](double z) { return 2.0 * (z - l); };
    law.pearson = PearsonParams{0.0, 2.0, -2.0 * l};
    law.variance = 2.0 * v;
  } else if (name == "exponential") {
    auto p = with_defaults(name, user_params, {{"lambda", 1.0}});
    double lam = require(p, "lambda");
    if (lam <= 0) throw invalid_param("exponential: need lambda > 0");
    law.params = p;
    double l = -1.0 / lam;
    law.support = {l, kInf};
    law.density = [lam, l](double z) {
      return z > l ? lam * std::exp(-lam * (z - l)) : 0.0;
    };
    law.cdf = [lam, l](double z) {
      return z > l ? 1.0 - std::exp(-lam * (z - l)) : 0.0;
    };
    law.ccdf = [lam, l](double z) {
      return z > l ? std::exp(-lam * (z - l)) : 1.0;
    };
    law.gstar = [lam, l](double z) { return (z - l) / lam; };
    law.pearson = PearsonParams{0.0, 1.0 / lam, -l / lam};
    law.variance = 1.0 / (lam * lam);
  } else if (name == "beta") {
    auto p = with_defaults(name, user_params, {{"r", 2.0}, {"s", 2.0}});
    double r = require(p, "r"), s = require(p, "s");
    if (r <= 0 || s <= 0) throw invalid_param("beta: need r, s > 0");
    law.params = p;
    double l = -r / (r + s), u = 1.0 + l;
    law.support = {l, u};
    bm::beta_distribution<double> d(r, s);
    law.density = [d, l, u](double z) {
      return (z > l && z < u) ? bm::pdf(d, z - l) : 0.0;
    };
    law.cdf = [d, l, u](double z) {
      if (z <= l) return 0.0;
      if (z >= u) return 1.0;
      return bm::cdf(d, z - l);
    };
    law.ccdf = [d, l, u](double z) {
      if (z <= l) return 1.0;
      if (z >= u) return 0.0;
      return bm::cdf(bm::complement(d, z - l));
    };
    double rs = r + s;
    law.gstar = [l, u, rs](double z) {
      return (z > l && z < u) ? (z - l) * (u - z) / rs : 0.0;
    };
    law.pearson = PearsonParams{-1.0 / rs, (l + u) / rs, -l * u / rs};
    law.variance = r * s / (rs * rs * (rs + 1.0));
  } else if (name == "pearson4") {
    auto p = with_defaults(name, user_params, {{"r", 3.0}, {"s", 1.0}});
    double r = require(p, "r"), s = require(p, "s");
    if (r <= 1.5) throw invalid_param("pearson4: need r > 3/2");
    law.params = p;
    law.support = {-kInf, kInf};
    double t = -s / (2.0 * (r - 1.0));
    auto shape = [r, s, t](double z) {
      double w = z - t;
      return std::pow(1.0 + w * w, -r) * std::exp(s * std::atan(w));
    };
    double C = 1.0 / integrate(shape, -kInf, kInf, 1e-12);
    law.density = [shape, C](double z) { return C * shape(z); };
    double a2 = 2.0 * (r - 1.0);
    law.gstar = [t, a2](double z) {
      double w = z - t;
      return (1.0 + w * w) / a2;
    };
    law.pearson =
        PearsonParams{1.0 / a2, -2.0 * t / a2, (1.0 + t * t) / a2};
    law.variance = (1.0 + t * t) / (2.0 * r - 3.0);
    // CDF by cached cumulative quadrature of the density.
    double sc = std::sqrt(law.variance);
    double zlo = t - 60.0 * sc, zhi = t + 60.0 * sc;
    int N = 4000;
    auto cum = std::make_shared<std::vector<double>>(N + 1);
    auto zs = std::make_shared<std::vector<double>>(N + 1);
    auto dens = law.density;
    (*cum)[0] = integrate(dens, -kInf, zlo, 1e-12);
    for (int i = 0; i <= N; ++i) (*zs)[i] = zlo + (zhi - zlo) * i / N;
    for (int i = 1; i <= N; ++i)
      (*cum)[i] = (*cum)[i - 1] + gauss_fixed(dens, (*zs)[i - 1], (*zs)[i], 15);
    law.cdf = [cum, zs, dens](double z) {
      if (z <= zs->front()) {
        double v = integrate(dens, -kInf, z, 1e-10);
        return std::min(1.0, v);
      }
      if (z >= zs->back()) return 1.0;
      auto it = std::upper_bound(zs->begin(), zs->end(), z);
      std::size_t k = static_cast<std::size_t>(it - zs->begin()) - 1;
      return std::min(1.0, (*cum)[k] + gauss_fixed(dens, (*zs)[k], z, 15));
    };
    // Mirror table accumulated from the right so the upper tail keeps
    // relative accuracy where 1 - cdf would round to zero.
    auto rcum = std::make_shared<std::vector<double>>(N + 1);
    (*rcum)[N] = integrate(dens, zhi, kInf, 1e-12);
    for (int i = N - 1; i >= 0; --i)
      (*rcum)[i] = (*rcum)[i + 1] + gauss_fixed(dens, (*zs)[i], (*zs)[i + 1], 15);
    law.ccdf = [rcum, zs, dens](double z) {
      if (z >= zs->back()) {
        double v = integrate(dens, z, kInf, 1e-10);
        return std::min(1.0, v);
      }
      if (z <= zs->front()) return 1.0;
      auto it = std::upper_bound(zs->begin(), zs->end(), z);
      std::size_t k = static_cast<std::size_t>(it - zs->begin());
      return std::min(1.0, (*rcum)[k] + gauss_fixed(dens, z, (*zs)[k], 15));
    };
  } else if (name == "student_t") {
    auto p = with_defaults(name, user_params, {{"v", 5.0}});
    double v = require(p, "v");
    if (v <= 2) throw invalid_param("student_t: need v > 2");
    law.params = p;
    law.support = {-kInf, kInf};
    bm::students_t_distribution<double> d(v);
    law.density = [d](double z) { return bm::pdf(d, z); };
    law.cdf = [d](double z) { return bm::cdf(d, z); };
    law.ccdf = [d](double z) { return bm::cdf(bm::complement(d, z)); };
    law.gstar = [v](double z) { return (v / (v - 1.0)) * (1.0 + z * z / v); };
    law.pearson = PearsonParams{1.0 / (v - 1.0), 0.0, v / (v - 1.0)};
    law.variance = v / (v - 2.0);
  } else if (name == "inverse_gamma") {
    auto p = with_defaults(name, user_params, {{"r", 4.0}, {"s", 1.0}});
    double r = require(p, "r"), s = require(p, "s");
    if (r <= 3 || s <= 0)
      throw invalid_param("inverse_gamma: need r > 3 (else not in L^2) and s > 0");
    law.params = p;
    double a = r - 1.0;          // shape of the unshifted inverse gamma
    double l = -s / (r - 2.0);   // centers the law
    law.support = {l, kInf};
    double logC = a * std::log(s) - std::lgamma(a);
    law.density = [logC, r, s, l](double z) {
      if (z <= l) return 0.0;
      double w = z - l;
      return std::exp(logC - r * std::log(w) - s / w);
    };
    law.cdf = [a, s, l](double z) {
      return z > l ? bm::gamma_q(a, s / (z - l)) : 0.0;
    };
    law.ccdf = [a, s, l](double z) {
      return z > l ? bm::gamma_p(a, s / (z - l)) : 1.0;
    };
    double den = r - 2.0;
    law.gstar = [l, den](double z) {
      double w = z - l;
      return w * w / den;
    };
    law.pearson = PearsonParams{1.0 / den, -2.0 * l / den, l * l / den};
    law.variance = l * l / (r - 3.0);
  } else if (name == "uniform") {
    auto p = with_defaults(name, user_params, {{"u", 1.0}});
    double u = require(p, "u");
    if (u <= 0) throw invalid_param("uniform: need u > 0");
    law.params = p;
    law.support = {-u, u};
    law.density = [u](double z) {
      return (z > -u && z < u) ? 1.0 / (2.0 * u) : 0.0;
    };
    law.cdf = [u](double z) {
      return std::clamp((z + u) / (2.0 * u), 0.0, 1.0);
    };
    law.ccdf = [u](double z) {
      return std::clamp((u - z) / (2.0 * u), 0.0, 1.0);
    };
    law.gstar = [u](double z) {
      return (z > -u && z < u) ? (u * u - z * z) / 2.0 : 0.0;
    };
    law.pearson = PearsonParams{-0.5, 0.0, u * u / 2.0};
    law.variance = u * u / 3.0;
  } else if (name == "pareto") {
    auto p = with_defaults(name, user_params, {{"c", 3.0}, {"l", -1.0}});
    double c = require(p, "c"), l = require(p, "l");
    if (c <= 2 || l >= 0) throw invalid_param("pareto: need c > 2 and l < 0");
    law.params = p;
    law.support = {l, kInf};
    double m = -l * (c - 1.0); // scale of the unshifted Pareto in w = z - c l
    law.density = [c, l, m](double z) {
      if (z <= l) return 0.0;
      double w = z - c * l;
      return c * std::pow(m, c) / std::pow(w, c + 1.0);
    };
    law.cdf = [c, l, m](double z) {
      return z > l ? 1.0 - std::pow(m / (z - c * l), c) : 0.0;
    };
    law.ccdf = [c, l, m](double z) {
      return z > l ? std::pow(m / (z - c * l), c) : 1.0;
    };
    law.gstar = [c, l](double z) { return (z - l) * (z - c * l) / (c - 1.0); };
    law.pearson = PearsonParams{1.0 / (c - 1.0), -l * (1.0 + c) / (c - 1.0),
                                c * l * l / (c - 1.0)};
    law.variance = c * l * l / (c - 2.0);
  } else if (name == "laplace") {
    auto p = with_defaults(name, user_params, {{"c", 1.0}});
    double c = require(p, "c");
    if (c <= 0) throw invalid_param("laplace: need c > 0");
    law.params = p;
    law.support = {-kInf, kInf};
    law.density = [c](double z) { return 0.5 * c * std::exp(-c * std::abs(z)); };
    law.cdf = [c](double z) {
      return z < 0 ? 0.5 * std::exp(c * z) : 1.0 - 0.5 * std::exp(-c * z);
    };
    law.ccdf = [c](double z) {
      return z > 0 ? 0.5 * std::exp(-c * z) : 1.0 - 0.5 * std::exp(c * z);
    };
    law.gstar = [c](double z) { return (1.0 + c * std::abs(z)) / (c * c); };
    law.gstar_prime = [c](double z) {
      return z == 0.0 ? 0.0 : (z > 0 ? 1.0 : -1.0) / c;
    };
    // C^1 smoothing for Assumption B: equals g* outside (-1/c, 1/c), even
    // polynomial bridge inside (matching value and slope at the seam).
    double zs = 1.0 / c;
    double b = 1.0 / (2.0 * c * zs); // slope match: 2 b zs = 1/c
    double a = (1.0 + c * zs) / (c * c) - b * zs * zs;
    law.g_tilde = [c, zs, a, b](double z) {
      if (std::abs(z) >= zs) return (1.0 + c * std::abs(z)) / (c * c);
      return a + b * z * z;
    };
    law.variance = 2.0 / (c * c);
    double cc = c;
    law.Gstar = [cc](double z) {
      return (z + cc * z * std::abs(z) / 2.0) / (cc * cc);
    };
  } else if (name == "lognormal") {
    auto p = with_defaults(name, user_params, {{"delta", 0.0}, {"sigma", 0.5}});
    double del = require(p, "delta"), sg = require(p, "sigma");
    if (sg <= 0) throw invalid_param("lognormal: need sigma > 0");
    law.params = p;
    double l = -std::exp(del + sg * sg / 2.0);
    law.support = {l, kInf};
    law.density = [del, sg, l](double z) {
      if (z <= l) return 0.0;
      double w = z - l;
      double q = (std::log(w) - del) / sg;
      return std::exp(-0.5 * q * q) / (w * sg * std::sqrt(2.0 * M_PI));
    };
    law.cdf = [del, sg, l](double z) {
      return z > l ? phi_std((std::log(z - l) - del) / sg) : 0.0;
    };
    law.ccdf = [del, sg, l](double z) {
      return z > l ? phi_std(-(std::log(z - l) - del) / sg) : 1.0;
    };
    law.gstar = [del, sg, l](double z) {
      if (z <= l) return 0.0;
      double pz = (std::log(z - l) - del) / sg;
      double t = pz + sg;
      // e^{t^2/2} * erfc(y), exponentials paired so neither factor overflows
      auto term = [t](double y) {
        double e = 0.5 * t * t - y * y;
        if (y < 25.0) {
          // erfcx(y) = e^{y^2} erfc(y); both factors representable here
          return std::exp(e) * (std::exp(y * y) * std::erfc(y));
        }
        double y2 = y * y;
        double mills = (1.0 - 0.5 / y2 + 0.75 / (y2 * y2) -
                        1.875 / (y2 * y2 * y2)) /
                       (y * std::sqrt(M_PI));
        return std::exp(e) * mills;
      };
      // Pick the erfc pairing with both arguments on the decaying side,
      // otherwise the difference cancels to zero in the left tail.
      double diff;
      if (pz >= 0.5 * sg)
        diff = term((pz - sg) / M_SQRT2) - term(pz / M_SQRT2);
      else
        diff = term(-pz / M_SQRT2) - term((sg - pz) / M_SQRT2);
      double g = sg * std::exp(2.0 * del) * std::sqrt(M_PI / 2.0) * diff;
      return std::max(g, 0.0);
    };
    law.variance =
        (std::exp(sg * sg) - 1.0) * std::exp(2.0 * del + sg * sg);
  } else {
    throw invalid_param("catalog: unknown law '" + name + "'");
  }

  law.scale = std::sqrt(law.variance);
  if (!law.ccdf)
    law.ccdf = [c = law.cdf](double z) { return 1.0 - c(z); };
  if (!law.gstar_prime) {
    if (law.pearson) {
      auto pp = *law.pearson;
      law.gstar_prime = [pp](double z) { return 2.0 * pp.alpha * z + pp.beta; };
    } else {
      law.gstar_prime = fd_derivative(law.gstar);
    }
  }
  if (!law.g_tilde) law.g_tilde = law.gstar;

  if (!law.Gstar) {
    if (law.pearson) {
      double anchor = std::isfinite(law.support.lo) ? law.support.lo : 0.0;
      law.Gstar = pearson_Gstar(*law.pearson, anchor);
    } else {
      // lognormal: cached cumulative table over a wide range
      auto [glo, ghi] = interior_range(law);
      double anchor = law.support.lo;
      int N = 4000;
      auto zs = std::make_shared<std::vector<double>>(N + 1);
      auto cum = std::make_shared<std::vector<double>>(N + 1);
      auto g = law.gstar;
      for (int i = 0; i <= N; ++i)
        (*zs)[i] = anchor + (ghi * 1.5 - anchor) * i / N;
      (*cum)[0] = 0.0;
      for (int i = 1; i <= N; ++i)
        (*cum)[i] =
            (*cum)[i - 1] + gauss_fixed(g, (*zs)[i - 1], (*zs)[i], 15);
      law.Gstar = [zs, cum, g](double z) {
        if (z <= zs->front()) return 0.0;
        if (z >= zs->back())
          return cum->back() + integrate(g, zs->back(), z, 1e-10);
        auto it = std::upper_bound(zs->begin(), zs->end(), z);
        std::size_t k = static_cast<std::size_t>(it - zs->begin()) - 1;
        return (*cum)[k] + gauss_fixed(g, (*zs)[k], z, 15);
      };
    }
  }

  // E|Z| = 2 g*(0) rho(0) (mean-zero identity)
  law.abs_mean = 2.0 * law.gstar(0.0) * law.density(0.0);
  law.density_bounded = bounded_density(law);
  verify_law(law);
  return law;
}

std::vector<std::string> catalog_names() {
  return {"normal",    "gamma",         "chi2_centered", "exponential",
          "beta",      "pearson4",      "student_t",     "inverse_gamma",
          "uniform",   "pareto",        "laplace",       "lognormal"};
}

// ---------------------------------------------------------------------------

double gstar_from_density(const std::function<double(double)>& density,
                          const Support& support, double z) {
  if (z <= support.lo || z >= support.hi)
    throw invalid_param("gstar_from_density: z outside support");
  double rho = density(z);
  if (!(rho > kDensityFloor))
    throw numeric_failure("gstar_from_density: density underflow at z");
  auto f = [&](double y) { return y * density(y); };
  // single-signed tail integral avoids cancellation
  double I = (z >= 0.0) ? integrate(f, z, support.hi, 1e-12)
                        : -integrate(f, support.lo, z, 1e-12);
  return I / rho;
}

double density_from_gstar(const std::function<double(double)>& gstar,
                          double abs_mean, const Support& support, double z) {
  if (z <= support.lo || z >= support.hi)
    throw invalid_param("density_from_gstar: z outside support");
  if (abs_mean <= 0) throw invalid_param("density_from_gstar: abs_mean <= 0");
  double g = gstar(z);
  if (!(g > 0)) throw invalid_param("density_from_gstar: g* not positive at z");
  double I = 0.0;
  if (z != 0.0) {
    auto f = [&](double y) { return y / gstar(y); };
    I = (z > 0) ? integrate(f, 0.0, z, 1e-12) : -integrate(f, z, 0.0, 1e-12);
  }
  return abs_mean / (2.0 * g) * std::exp(-I);
}

// ---------------------------------------------------------------------------

namespace {

GrowthSide growth_side(const std::function<double(double)>& gstar,
                       double endpoint, bool left, double scale) {
  // truncation points approaching the endpoint geometrically
  const int kSteps = 40;
  std::vector<double> trunc(kSteps + 1);
  if (std::isfinite(endpoint)) {
    double d0 = std::abs(endpoint) / 2.0;
    for (int k = 0; k <= kSteps; ++k)
      trunc[k] = endpoint + (left ? 1.0 : -1.0) * d0 * std::pow(2.0, -k);
  } else {
    for (int k = 0; k <= kSteps; ++k)
      trunc[k] = (left ? -1.0 : 1.0) * scale * std::pow(2.0, k);
  }
  auto f = [&](double y) { return y / gstar(y); };
  GrowthSide side;
  double I = left ? integrate(f, trunc[0], 0.0, 1e-9)
                  : integrate(f, 0.0, trunc[0], 1e-9);
  std::vector<double> incr;
  for (int k = 1; k <= kSteps; ++k) {
    // fixed-order Gauss: the adaptive rule's error estimate breaks down once
    // the interval width approaches the abscissa resolution of doubles, and
    // slope fitting only needs a few accurate digits per increment
    double d = left ? gauss_fixed(f, trunc[k], trunc[k - 1], 15)
                    : gauss_fixed(f, trunc[k - 1], trunc[k], 15);
    I += d;
    incr.push_back(std::abs(d));
    if (std::abs(I) > 1e3) {
      side.ok = true;
      side.final_value = I;
      side.slope = kInf;
      return side;
    }
  }
  side.final_value = I;
  // fit slope of log|increment| over the last 15 steps
  int n0 = static_cast<int>(incr.size()) - 15;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = n0; k < static_cast<int>(incr.size()); ++k) {
    if (incr[k] <= 0) continue;
    double x = k, y = std::log(incr[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  if (cnt < 5) { // increments vanished: integral converged
    side.ok = false;
    side.slope = -kInf;
    return side;
  }
  side.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  if (side.slope >= -0.05)
    side.ok = true; // increments not decaying: divergence
  else if (side.slope <= -0.2)
    side.ok = false;
  else
    side.inconclusive = true;
  return side;
}

} // namespace

GrowthReport check_growth(const std::function<double(double)>& gstar,
                          const Support& support) {
  GrowthReport rep;
  rep.left = growth_side(gstar, support.lo, true, 1.0);
  rep.right = growth_side(gstar, support.hi, false, 1.0);
  return rep;
}

// ---------------------------------------------------------------------------

AssumptionReport check_assumptions(const ReferenceLaw& law) {
  AssumptionReport rep;
  const auto& s = law.support;

  // Assumption A: centered support straddling 0, positive g*, finite E|Z|.
  rep.A = s.lo < 0.0 && s.hi > 0.0 && law.abs_mean > 0.0;
  if (!law.density_bounded)
    rep.notes.push_back("density unbounded near an endpoint (recorded, not fatal)");

  // Assumption B: ratio g*/g_tilde pinched away from 0 and infinity near the
  // endpoints, g_tilde' limits stabilize, and liminf g* > 0 at infinite ends.
  auto [lo, hi] = interior_range(law);
  bool ok = true;
  for (int end = 0; end < 2; ++end) {
    double target = end == 0 ? s.lo : s.hi;
    double start = end == 0 ? lo : hi;
    double prev_d = 0.0;
    bool first = true;
    for (int k = 0; k < 20; ++k) {
      double z;
      if (std::isfinite(target))
        z = target + (start - target) * std::pow(2.0, -k);
      else
        z = start * std::pow(2.0, k / 4.0);
      double g = law.gstar(z), gt = law.g_tilde(z);
      if (!(gt > 0) || !(g > 0)) { ok = false; break; }
      double ratio = g / gt;
      if (ratio < 1e-8 || ratio > 1e8) { ok = false; break; }
      double h = 1e-5 * (1.0 + std::abs(z));
      double d = (law.g_tilde(z + h) - law.g_tilde(z - h)) / (2.0 * h);
      if (!first && std::isfinite(target)) {
        // derivative limit should stabilize toward a finite endpoint
        if (!std::isfinite(d)) { ok = false; break; }
      }
      first = false;
      prev_d = d;
      (void)prev_d;
      if (!std::isfinite(target) && g < 1e-12) {
        ok = false;
        rep.notes.push_back("liminf g* = 0 at an infinite endpoint");
        break;
      }
    }
  }
  rep.B = rep.A && ok;

  // Assumption B': only meaningful on the full line.
  rep.Bprime_applicable = s.full_line();
  if (rep.Bprime_applicable) {
    bool bp = true;
    double prev_ratio = 0.0;
    for (int i = 0; i <= 200; ++i) {
      double z = lo + (hi - lo) * i / 200.0;
      double gp = law.gstar_prime(z);
      double h = 1e-4 * (1.0 + std::abs(z));
      double gpp = (law.gstar(z + h) - 2.0 * law.gstar(z) + law.gstar(z - h)) /
                   (h * h);
      if (gpp >= 2.0 - 1e-9) { bp = false; break; }
      double denom = z * z - z * gp + law.gstar(z);
      if (denom <= 0) { bp = false; break; }
      double ratio = std::abs(z - gp) / denom;
      if (!std::isfinite(ratio) || ratio > 1e6) { bp = false; break; }
      prev_ratio = ratio;
      (void)prev_ratio;
    }
    rep.Bprime = bp;
  }
  return rep;
}

// ---------------------------------------------------------------------------

double pearson_moment(const PearsonParams& p, int r) {
  if (r < 0) throw invalid_param("pearson_moment: r must be >= 0");
  if (r == 0) return 1.0;
  double m_prev = 1.0, m_cur = 0.0; // E[Z^0], E[Z^1]
  for (int k = 1; k < r; ++k) {
    double den = 1.0 - k * p.alpha;
    if (den <= 0)
      throw moment_undefined("pearson_moment: moment of order " +
                             std::to_string(r) + " does not exist");
    double m_next = (k * p.beta * m_cur + k * p.gamma * m_prev) / den;
    m_prev = m_cur;
    m_cur = m_next;
  }
  return m_cur;
}

GzStats pearson_gz_stats(const PearsonParams& p) {
  double a = p.alpha, b = p.beta, g = p.gamma;
  double d1 = 1.0 - a, d2 = 1.0 - 2.0 * a, d3 = 1.0 - 3.0 * a;
  if (d1 <= 0 || d2 <= 0 || d3 <= 0)
    throw moment_undefined("pearson_gz_stats: E[g*(Z)^2] does not exist");
  GzStats out;
  out.e_gz_sq = (b * b * g * d1 + g * g * d2 * d2) / (d1 * d2 * d3);
  out.var_gz = (b * b * g * d1 * d1 + 2.0 * a * a * g * g * d2) /
               (d2 * d3 * d1 * d1);
  return out;
}

// ---------------------------------------------------------------------------

std::pair<double, double> interior_range(const ReferenceLaw& law) {
  const auto& s = law.support;
  double lo, hi;
  double margin = 1e-4 * (s.finite() ? s.width() : law.scale);
  auto clamp_tail = [&](double sign) {
    // furthest point with density above the floor, capped at 50 scale units
    double far = sign * 50.0 * law.scale;
    if (law.density(far) >= kDensityFloor) return far;
    double a = 0.0, b = far;
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (a + b);
      (law.density(mid) >= kDensityFloor ? a : b) = mid;
    }
    return a;
  };
  // A finite endpoint may still sit under the density floor (e.g. essential
  // singularities like e^{-s/(z-l)}); bisect inward until the density is
  // representable.
  auto clamp_finite = [&](double endpoint, double inward_sign) {
    double z = endpoint + inward_sign * margin;
    if (law.density(z) >= kDensityFloor) return z;
    double depth = s.finite() ? 0.5 * s.width() : 50.0 * law.scale;
    double a = z, b = endpoint + inward_sign * depth;
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (a + b);
      (law.density(mid) >= kDensityFloor ? b : a) = mid;
    }
    return b;
  };
  lo = std::isfinite(s.lo) ? clamp_finite(s.lo, +1.0) : clamp_tail(-1.0);
  hi = std::isfinite(s.hi) ? clamp_finite(s.hi, -1.0) : clamp_tail(+1.0);
  return {lo, hi};
}

std::vector<double> interior_grid(const ReferenceLaw& law, int n) {
  if (n < 2) throw invalid_param("interior_grid: need n >= 2");
  auto [lo, hi] = interior_range(law);
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

std::string law_to_record(const ReferenceLaw& law) {
  std::ostringstream os;
  os << law.name;
  for (const auto& [k, v] : law.params) os << ' ' << k << '=' << v;
  return os.str();
}

ReferenceLaw law_from_record(const std::string& record) {
  std::istringstream is(record);
  std::string name, tok;
  if (!(is >> name)) throw invalid_param("law_from_record: empty record");
  std::map<std::string, double> params;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw invalid_param("law_from_record: bad token '" + tok + "'");
    params[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
  }
  return catalog(name, params);
}

void export_curves_csv(const ReferenceLaw& law, const std::vector<double>& grid,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_param("export_curves_csv: cannot open " + path);
  out << "z,rho,Phi,gstar,Gstar\n";
  out.precision(17);
  for (double z : grid)
    out << z << ',' << law.density(z) << ',' << law.cdf(z) << ','
        << law.gstar(z) << ',' << law.Gstar(z) << '\n';
}

} // namespace smlab
