#include "smlab/stein.hpp"
#include "smlab/errors.hpp"
#include "smlab/quad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <thread>

namespace smlab {

namespace {

// integral of f over (a,b) split at the given interior points
double segmented_integral(const std::function<double(double)>& f, double a,
                          double b, const std::vector<double>& splits,
                          double tol) {
  if (!(a < b)) return 0.0;
  std::vector<double> pts{a};
  for (double s : splits)
    if (s > a && s < b) pts.push_back(s);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] > pts[i]) total += integrate(f, pts[i], pts[i + 1], tol);
  return total;
}

} // namespace

TestFunction make_piecewise_linear(const std::vector<double>& knots,
                                   const std::vector<double>& values,
                                   const std::string& id) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw invalid_param("make_piecewise_linear: need matching knots/values, >= 2");
  if (!std::is_sorted(knots.begin(), knots.end()))
    throw invalid_param("make_piecewise_linear: knots must be sorted");
  auto k = std::make_shared<std::vector<double>>(knots);
  auto v = std::make_shared<std::vector<double>>(values);
  TestFunction tf;
  tf.id = id;
  tf.knots = knots;
  tf.h = [k, v](double x) {
    if (x <= k->front()) return v->front();
    if (x >= k->back()) return v->back();
    auto it = std::upper_bound(k->begin(), k->end(), x);
    std::size_t i = static_cast<std::size_t>(it - k->begin()) - 1;
    double t = (x - (*k)[i]) / ((*k)[i + 1] - (*k)[i]);
    return (*v)[i] + t * ((*v)[i + 1] - (*v)[i]);
  };
  tf.h_prime = [k, v](double x) {
    if (x <= k->front() || x >= k->back()) return 0.0;
    auto it = std::upper_bound(k->begin(), k->end(), x);
    std::size_t i = static_cast<std::size_t>(it - k->begin()) - 1;
    return ((*v)[i + 1] - (*v)[i]) / ((*k)[i + 1] - (*k)[i]);
  };
  double lip = 0.0, sup = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    lip = std::max(lip, std::abs(values[i + 1] - values[i]) /
                            (knots[i + 1] - knots[i]));
  for (double y : values) sup = std::max(sup, std::abs(y));
  tf.lipschitz = lip;
  tf.sup_norm = sup;
  return tf;
}

TestFunction random_test_function(Rng& rng, double lo, double hi, int n_knots,
                                  TestFamily family, const std::string& id) {
  if (n_knots < 2) throw invalid_param("random_test_function: n_knots >= 2");
  std::vector<double> knots(n_knots);
  knots.front() = lo;
  knots.back() = hi;
  for (int i = 1; i + 1 < n_knots; ++i)
    knots[i] = lo + (hi - lo) * rng.next_uniform();
  std::sort(knots.begin(), knots.end());
  std::vector<double> vals(n_knots, 0.0);
  for (int i = 1; i < n_knots; ++i) {
    double slope = 2.0 * rng.next_uniform() - 1.0;
    vals[i] = vals[i - 1] + slope * (knots[i] - knots[i - 1]);
  }
  // center, then normalize to unit family norm
  double m = 0.0;
  for (double v : vals) m += v;
  m /= n_knots;
  for (double& v : vals) v -= m;
  double lip = 0.0, sup = 0.0;
  for (int i = 1; i < n_knots; ++i)
    lip = std::max(lip, std::abs(vals[i] - vals[i - 1]) / (knots[i] - knots[i - 1]));
  if (lip <= 0) { vals[1] += (knots[1] - knots[0]); lip = 1.0; }
  for (double& v : vals) v /= lip;
  if (family == TestFamily::fortet_mourier) {
    for (double v : vals) sup = std::max(sup, std::abs(v));
    double scale = 1.0 + sup;
    for (double& v : vals) v /= scale;
  }
  return make_piecewise_linear(knots, vals, id);
}

SteinSolution stein_solve(const ReferenceLaw& law, const TestFunction& tf,
                          int grid_n) {
  const double l = law.support.lo, u = law.support.hi;
  auto grid = interior_grid(law, grid_n);
  // merge interior knots into the grid so each segment is kink-free; 0 is
  // included too since some densities (laplace) are not smooth there
  std::vector<double> splits = tf.knots;
  if (l < 0.0 && u > 0.0) splits.push_back(0.0);
  const double glo = grid.front(), ghi = grid.back();
  for (double k : splits)
    if (k > glo && k < ghi) grid.push_back(k);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t n = grid.size();

  SteinSolution sol;
  sol.grid = grid;
  sol.law_id = law_to_record(law);
  sol.h_id = tf.id;

  auto hp = tf.h_prime;
  auto Phi = law.cdf;
  auto Qc = law.ccdf; // 1 - Phi without tail rounding
  auto phi_hp = [&](double t) { return Phi(t) * hp(t); };
  auto q_hp = [&](double t) { return Qc(t) * hp(t); };

  sol.m_h = segmented_integral([&](double t) { return tf.h(t) * law.density(t); },
                               l, u, splits, 1e-10);

  // cumulative J1(x) = int_l^x Phi h', J2(x) = int_x^u (1-Phi) h'
  std::vector<double> J1(n), J2(n);
  J1[0] = segmented_integral(phi_hp, l, grid[0], splits, 1e-10);
  for (std::size_t i = 1; i < n; ++i)
    J1[i] = J1[i - 1] + integrate(phi_hp, grid[i - 1], grid[i], 1e-10);
  J2[n - 1] = segmented_integral(q_hp, grid[n - 1], u, splits, 1e-10);
  for (std::size_t i = n - 1; i-- > 0;)
    J2[i] = J2[i + 1] + integrate(q_hp, grid[i], grid[i + 1], 1e-10);

  sol.f.resize(n);
  sol.f_prime.resize(n);
  sol.residual.resize(n);
  sol.flagged.assign(n, 0);
  const bool full = law.support.full_line();
  if (full) sol.f_second.resize(n);

  double last_f = 0.0, last_fp = 0.0, last_fpp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = grid[i];
    double rho = law.density(x), gs = law.gstar(x), P = Phi(x), Q = Qc(x);
    double gr = gs * rho;
    if (!(gr > 1e-300)) {
      sol.f[i] = last_f;
      sol.f_prime[i] = last_fp;
      if (full) sol.f_second[i] = last_fpp;
      sol.flagged[i] = 1;
      sol.residual[i] = 0.0;
      continue;
    }
    sol.f[i] = -(Q * J1[i] + P * J2[i]) / gr;
    double I1 = -x * Q + gr; // int_x^u (1-Phi), closed identity
    double I2 = x * P + gr;  // int_l^x Phi
    sol.f_prime[i] = (I1 * J1[i] - I2 * J2[i]) / (gs * gr);
    if (full) {
      double gp = law.gstar_prime(x);
      double w = x * x - x * gp + gs;
      double A = gr * (x - gp) - w * Q;
      double B = gr * (gp - x) - w * P;
      sol.f_second[i] = (A * J1[i] + B * J2[i] + gs * gr * hp(x)) / (gs * gs * gr);
      last_fpp = sol.f_second[i];
    }
    sol.residual[i] =
        gs * sol.f_prime[i] - x * sol.f[i] - (tf.h(x) - sol.m_h);
    last_f = sol.f[i];
    last_fp = sol.f_prime[i];
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!sol.flagged[i]) sup = std::max(sup, std::abs(sol.residual[i]));
  sol.sup_residual = sup;
  return sol;
}

double f_prime_repr(const ReferenceLaw& law, const TestFunction& tf, double x) {
  const double l = law.support.lo, u = law.support.hi;
  auto [lo, hi] = interior_range(law);
  if (x <= lo || x >= hi)
    throw invalid_param("f_prime_repr: x outside interior range");
  auto Phi = law.cdf;
  auto Qc = law.ccdf;
  std::vector<double> splits = tf.knots;
  if (l < 0.0 && u > 0.0) splits.push_back(0.0);
  double J1 = segmented_integral([&](double t) { return Phi(t) * tf.h_prime(t); },
                                 l, x, splits, 1e-10);
  double J2 = segmented_integral(
      [&](double s) { return Qc(s) * tf.h_prime(s); }, x, u, splits,
      1e-10);
  double Ia = integrate(Qc, x, u, 1e-10);
  double Ib = integrate(Phi, l, x, 1e-10);
  double gs = law.gstar(x), rho = law.density(x);
  if (!(gs * gs * rho > 1e-300))
    throw numeric_failure("f_prime_repr: unstable denominator");
  return (Ia * J1 - Ib * J2) / (gs * gs * rho);
}

double stein_A(const ReferenceLaw& law, double x) {
  double gs = law.gstar(x), rho = law.density(x), gp = law.gstar_prime(x);
  double w = x * x - x * gp + gs;
  return gs * rho * (x - gp) - w * law.ccdf(x);
}

double stein_B(const ReferenceLaw& law, double x) {
  double gs = law.gstar(x), rho = law.density(x), gp = law.gstar_prime(x);
  double w = x * x - x * gp + gs;
  return gs * rho * (gp - x) - w * law.cdf(x);
}

double f_second_repr(const ReferenceLaw& law, const TestFunction& tf, double x) {
  if (!law.support.full_line())
    throw invalid_param(
        "f_second_repr: representation requires support (-inf, inf)");
  const double l = law.support.lo, u = law.support.hi;
  auto Phi = law.cdf;
  auto Qc = law.ccdf;
  std::vector<double> splits = tf.knots;
  if (l < 0.0 && u > 0.0) splits.push_back(0.0);
  double J1 = segmented_integral([&](double t) { return Phi(t) * tf.h_prime(t); },
                                 l, x, splits, 1e-10);
  double J2 = segmented_integral(
      [&](double s) { return Qc(s) * tf.h_prime(s); }, x, u, splits,
      1e-10);
  double gs = law.gstar(x), rho = law.density(x);
  double denom = gs * gs * gs * rho;
  if (!(denom > 1e-300))
    throw numeric_failure("f_second_repr: unstable denominator");
  return (stein_A(law, x) * J1 + stein_B(law, x) * J2 +
          gs * gs * rho * tf.h_prime(x)) /
         denom;
}

SteinBoundReport bound_constant(const ReferenceLaw& law, TestFamily family, int n_h,
                           int grid_n, std::uint64_t seed, unsigned threads) {
  if (n_h < 1) throw invalid_param("bound_constant: n_h >= 1");
  auto rep_assume = check_assumptions(law);
  if (!rep_assume.B)
    throw invalid_param("bound_constant: law fails Assumption B");
  auto [lo, hi] = interior_range(law);
  SteinBoundReport rep;
  rep.grid_n = grid_n;
  rep.per_h_k1.assign(n_h, 0.0);
  std::vector<double> per_h_k2(n_h, 0.0);
  const bool full = law.support.full_line();

  auto work = [&](int i) {
    Rng rng(seed, /*tag=*/0x68737765ULL, static_cast<std::uint64_t>(i));
    auto tf = random_test_function(rng, lo, hi, 12, family,
                                   "sweep_" + std::to_string(i));
    auto sol = stein_solve(law, tf, grid_n);
    double fp_max = 0.0, fpp_max = 0.0;
    for (std::size_t j = 0; j < sol.grid.size(); ++j) {
      if (sol.flagged[j]) continue;
      fp_max = std::max(fp_max, std::abs(sol.f_prime[j]));
      if (full) fpp_max = std::max(fpp_max, std::abs(sol.f_second[j]));
    }
    double hnorm = tf.lipschitz;
    rep.per_h_k1[i] = fp_max / hnorm;
    per_h_k2[i] = full ? fpp_max / hnorm : 0.0;
  };

  if (threads <= 1) {
    for (int i = 0; i < n_h; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (int i = static_cast<int>(t); i < n_h; i += static_cast<int>(threads))
          work(i);
      });
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < n_h; ++i) {
    if (rep.per_h_k1[i] > rep.k1_hat) {
      rep.k1_hat = rep.per_h_k1[i];
      rep.worst_index = i;
    }
    rep.k2_hat = std::max(rep.k2_hat, per_h_k2[i]);
  }
  return rep;
}

void export_solution_csv(const SteinSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_param("export_solution_csv: cannot open " + path);
  out << "z,f,f_prime,f_second,residual,flagged\n";
  out.precision(17);
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    out << sol.grid[i] << ',' << sol.f[i] << ',' << sol.f_prime[i] << ','
        << (sol.f_second.empty() ? 0.0 : sol.f_second[i]) << ','
        << sol.residual[i] << ',' << int(sol.flagged[i]) << '\n';
  }
}

} // namespace smlab
