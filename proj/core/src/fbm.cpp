#include "smlab/fbm.hpp"
#include "smlab/errors.hpp"
#include "smlab/quad.hpp"
#include "smlab/rng.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

namespace smlab {

double fgn_covariance(double hurst, double t) {
  double a = std::abs(t);
  double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(a + 1.0, h2) + std::pow(std::abs(a - 1.0), h2) -
                2.0 * std::pow(a, h2));
}

double fgn_covariance_constant(double hurst, int n) {
  double s = n * 1.0; // lag-0 terms, C(0) = 1
  for (int t = 1; t < n; ++t)
    s += 2.0 * (n - t) * fgn_covariance(hurst, t);
  return s / std::pow(static_cast<double>(n), 2.0 * hurst);
}

namespace {

constexpr std::uint64_t kFgnTag = 0x66676e30;

void check_fgn(double hurst, int n) {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw invalid_param("fgn: hurst must lie in (1/2, 1)");
  if (n < 1 || n > kMaxFgnSteps)
    throw cap_exceeded("fgn: n outside [1, " + std::to_string(kMaxFgnSteps) +
                       "]");
}

// plans are cached per embedding size; creation is serialized, execution on
// private buffers is thread safe
fftw_plan fft_plan(int m) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(m);
  if (it != plans.end()) return it->second;
  auto* buf = static_cast<fftw_complex*>(
      fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(m)));
  fftw_plan p = fftw_plan_dft_1d(m, buf, buf, FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(m, p); // buf intentionally kept alive with the plan
  return p;
}

// circulant embedding eigenvalues; empty when the embedding is not PSD
std::vector<double> embedding_eigenvalues(double hurst, int n) {
  const int m = 2 * (n - 1);
  std::vector<std::complex<double>> row(static_cast<std::size_t>(m));
  for (int k = 0; k < n; ++k) row[static_cast<std::size_t>(k)] = fgn_covariance(hurst, k);
  for (int k = 1; k < n - 1; ++k)
    row[static_cast<std::size_t>(m - k)] = fgn_covariance(hurst, k);
  fftw_execute_dft(fft_plan(m), reinterpret_cast<fftw_complex*>(row.data()),
                   reinterpret_cast<fftw_complex*>(row.data()));
  std::vector<double> lam(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    double v = row[static_cast<std::size_t>(k)].real();
    if (v < -1e-8 * static_cast<double>(m)) return {};
    lam[static_cast<std::size_t>(k)] = std::max(v, 0.0);
  }
  return lam;
}

Eigen::MatrixXd cholesky_factor(double hurst, int n) {
  if (n > 1024)
    throw cap_exceeded("fgn: Cholesky fallback capped at n = 1024");
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov(i, j) = fgn_covariance(hurst, i - j);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw numeric_failure("fgn: covariance matrix is not positive definite");
  return llt.matrixL();
}

// streams each path through fn(path_index, values); deterministic in
// (seed, path index) regardless of thread count
template <typename Fn>
void for_each_fgn_path(double hurst, int n, std::size_t n_paths,
                       std::uint64_t seed, int threads, bool force_cholesky,
                       Fn&& fn) {
  check_fgn(hurst, n);
  std::vector<double> lam;
  if (!force_cholesky && n >= 2) lam = embedding_eigenvalues(hurst, n);
  if (!lam.empty()) {
    const int m = 2 * (n - 1);
    fftw_plan plan = fft_plan(m);
    std::vector<double> w(lam.size());
    for (int k = 0; k < m; ++k) {
      double scale = (k == 0 || k == m / 2) ? 1.0 : 0.5;
      w[static_cast<std::size_t>(k)] =
          std::sqrt(scale * lam[static_cast<std::size_t>(k)] / m);
    }
    run_blocks(n_paths, threads, [&](std::uint64_t block, std::size_t begin,
                                     std::size_t end) {
      Rng rng(seed, kFgnTag, block);
      std::vector<double> z(static_cast<std::size_t>(m));
      std::vector<std::complex<double>> v(static_cast<std::size_t>(m));
      std::vector<double> x(static_cast<std::size_t>(n));
      for (std::size_t p = begin; p < end; ++p) {
        for (auto& e : z) e = rng.next_normal();
        v[0] = w[0] * z[0];
        v[static_cast<std::size_t>(m / 2)] =
            w[static_cast<std::size_t>(m / 2)] *
            z[static_cast<std::size_t>(m / 2)];
        for (int k = 1; k < m / 2; ++k) {
          auto wk = w[static_cast<std::size_t>(k)];
          std::complex<double> c(z[static_cast<std::size_t>(k)],
                                 z[static_cast<std::size_t>(m - k)]);
          v[static_cast<std::size_t>(k)] = wk * c;
          v[static_cast<std::size_t>(m - k)] = wk * std::conj(c);
        }
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(v.data()),
                         reinterpret_cast<fftw_complex*>(v.data()));
        for (int j = 0; j < n; ++j)
          x[static_cast<std::size_t>(j)] =
              v[static_cast<std::size_t>(j)].real();
        fn(p, x.data());
      }
    });
    return;
  }
  Eigen::MatrixXd L = n >= 2 ? cholesky_factor(hurst, n)
                             : Eigen::MatrixXd::Identity(1, 1);
  run_blocks(n_paths, threads, [&](std::uint64_t block, std::size_t begin,
                                   std::size_t end) {
    Rng rng(seed, kFgnTag, block);
    Eigen::VectorXd z(n), x(n);
    for (std::size_t p = begin; p < end; ++p) {
      for (int j = 0; j < n; ++j) z(j) = rng.next_normal();
      x = L * z;
      fn(p, x.data());
    }
  });
}

} // namespace

std::vector<double> simulate_fgn(double hurst, int n, std::size_t n_paths,
                                 std::uint64_t seed, int threads,
                                 bool force_cholesky) {
  check_fgn(hurst, n);
  if (n_paths * static_cast<std::size_t>(n) > (std::size_t{1} << 25))
    throw cap_exceeded("fgn: path matrix exceeds the memory budget; "
                       "use the streaming ladder instead");
  std::vector<double> out(n_paths * static_cast<std::size_t>(n));
  for_each_fgn_path(hurst, n, n_paths, seed, threads, force_cholesky,
                    [&](std::size_t p, const double* x) {
                      std::copy(x, x + n,
                                out.begin() +
                                    static_cast<std::ptrdiff_t>(
                                        p * static_cast<std::size_t>(n)));
                    });
  return out;
}

std::vector<double> hermite_coeffs(const std::function<double(double)>& f,
                                   int max_q) {
  std::vector<double> c(static_cast<std::size_t>(max_q + 1));
  double fact = 1.0;
  for (int q = 0; q <= max_q; ++q) {
    if (q > 1) fact *= q;
    auto g = [&](double z) {
      // the Gaussian factor underflows long before the polynomial part
      // overflows; cut the dead tail to keep the product finite
      if (std::abs(z) > 40.0) return 0.0;
      double h0 = 1.0, h1 = z;
      if (q == 0) h1 = 1.0;
      for (int m = 1; m < q; ++m) {
        double h2 = z * h1 - m * h0;
        h0 = h1;
        h1 = h2;
      }
      return h1 * f(z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    };
    c[static_cast<std::size_t>(q)] =
        (integrate(g, -kInf, 0.0, 1e-9) + integrate(g, 0.0, kInf, 1e-9)) /
        fact;
  }
  return c;
}

SubordinatedFunctional make_functional(const std::function<double(double)>& f,
                                       int max_q) {
  auto c = hermite_coeffs(f, std::max(max_q, 1));
  SubordinatedFunctional s;
  s.f = f;
  s.mean_f = c[0];
  s.c1 = c[1];
  if (std::abs(s.c1) < 1e-10)
    throw invalid_param(
        "subordinated functional needs E[Z f(Z)] != 0 (Sigma^2 vanishes)");
  return s;
}

namespace {

std::vector<double> f_tilde_samples(double hurst, int n,
                                    const SubordinatedFunctional& f,
                                    std::size_t n_paths, std::uint64_t seed,
                                    int threads, double& sigma_sq) {
  double kappa = fgn_covariance_constant(hurst, n);
  sigma_sq = f.c1 * f.c1 * kappa;
  double th = std::pow(static_cast<double>(n), hurst);
  std::vector<double> ft(n_paths);
  for_each_fgn_path(hurst, n, n_paths, seed, threads, false,
                    [&](std::size_t p, const double* x) {
                      double s = 0.0;
                      for (int j = 0; j < n; ++j) s += f.f(x[j]) - f.mean_f;
                      double h = s / th;
                      ft[p] = h * h / sigma_sq;
                    });
  return ft;
}

double centered_moment(const std::vector<double>& v, int k) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += std::pow(x - m, k);
  return s / static_cast<double>(v.size());
}

} // namespace

FunctionalSample functional_FT(const std::vector<double>& paths, int n,
                               const SubordinatedFunctional& f, double hurst) {
  check_fgn(hurst, n);
  if (n == 0 || paths.size() % static_cast<std::size_t>(n) != 0)
    throw invalid_param("functional_FT: paths is not a multiple of n");
  const std::size_t n_paths = paths.size() / static_cast<std::size_t>(n);
  FunctionalSample out;
  double kappa = fgn_covariance_constant(hurst, n);
  out.sigma_sq = f.c1 * f.c1 * kappa;
  double th = std::pow(static_cast<double>(n), hurst);
  out.f_tilde.resize(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double* x = &paths[p * static_cast<std::size_t>(n)];
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += f.f(x[j]) - f.mean_f;
    double h = s / th;
    out.f_tilde[p] = h * h / out.sigma_sq;
  }
  out.center = raw_moment(out.f_tilde, 1).value;
  out.f_t.resize(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p)
    out.f_t[p] = out.f_tilde[p] - out.center;
  return out;
}

std::vector<LadderRow> moment_ladder(const FbmConfig& cfg,
                                     const SubordinatedFunctional& f,
                                     const std::vector<int>& t_list) {
  std::vector<LadderRow> rows;
  for (int t : t_list) {
    LadderRow row;
    row.t_steps = t;
    double sigma_sq = 0.0;
    auto ft = f_tilde_samples(cfg.hurst, t, f, cfg.n_paths, cfg.seed,
                              cfg.threads, sigma_sq);
    row.center = raw_moment(ft, 1).value;
    for (int k = 2; k <= 4; ++k) {
      auto stat = [k](const std::vector<double>& v) {
        return centered_moment(v, k);
      };
      MomentEstimate m;
      m.value = stat(ft);
      m.stderr_ = bootstrap_stderr(ft, stat, cfg.n_boot,
                                   cfg.seed ^ static_cast<std::uint64_t>(k));
      (k == 2 ? row.m2 : k == 3 ? row.m3 : row.m4) = m;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ScalingProbe lt_scaling_probe(
    double hurst, int p,
    const std::vector<std::pair<std::pair<int, int>, double>>& exponents,
    const std::vector<double>& t_list, std::size_t n_points,
    std::uint64_t seed) {
  if (p != 4 && p != 6 && p != 8)
    throw invalid_param("lt_scaling_probe: p must be 4, 6 or 8");
  double S = 0.0;
  for (const auto& [ij, e] : exponents) {
    if (ij.first < 0 || ij.first >= p || ij.second < 0 || ij.second >= p ||
        ij.first == ij.second || e < 0.0)
      throw invalid_param("lt_scaling_probe: bad exponent entry");
    S += e;
  }
  if (S < 1.0)
    throw invalid_param("lt_scaling_probe: exponent sum must be >= 1");
  ScalingProbe out;
  out.envelope = -(1.0 - hurst) * (2.0 * S - p);
  std::vector<double> s(static_cast<std::size_t>(p));
  for (double t : t_list) {
    Rng rng(seed, 0x6c740000, 0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
      for (auto& v : s) v = t * rng.next_uniform();
      double prod = 1.0;
      for (const auto& [ij, e] : exponents)
        prod *= std::pow(std::abs(fgn_covariance(
                             hurst, s[static_cast<std::size_t>(ij.first)] -
                                        s[static_cast<std::size_t>(ij.second)])),
                         e);
      acc += prod;
    }
    double mean = acc / static_cast<double>(n_points);
    double l = std::pow(t, static_cast<double>(p) * (1.0 - hurst)) * mean;
    out.t_list.push_back(t);
    out.l_values.push_back(l);
  }
  // least-squares slope of log L against log T
  const std::size_t m = out.t_list.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(out.t_list[i]);
    ly[i] = std::log(std::max(out.l_values[i], 1e-300));
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  out.slope = sxy / sxx;
  return out;
}

} // namespace smlab
