#include "smlab/stats.hpp"
#include "smlab/errors.hpp"
#include "smlab/quad.hpp"
#include "smlab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace smlab {

double mean(const std::vector<double>& x) {
  if (x.empty()) throw invalid_param("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw invalid_param("variance: need at least 2 points");
  double m = mean(x), s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

MomentEstimate raw_moment(const std::vector<double>& x, int p) {
  return mc_mean(x, [p](double v) { return std::pow(v, p); });
}

MomentEstimate mc_mean(const std::vector<double>& x,
                       const std::function<double(double)>& f) {
  if (x.empty()) throw invalid_param("mc_mean: empty sample");
  double s = 0.0, s2 = 0.0;
  for (double v : x) {
    double y = f(v);
    s += y;
    s2 += y * y;
  }
  double n = static_cast<double>(x.size());
  double m = s / n;
  double var = std::max(0.0, s2 / n - m * m);
  return {m, std::sqrt(var / n)};
}

double bootstrap_stderr(const std::vector<double>& x,
                        const std::function<double(const std::vector<double>&)>& stat,
                        int n_boot, std::uint64_t seed) {
  if (x.empty() || n_boot < 2) throw invalid_param("bootstrap_stderr: bad input");
  std::vector<double> vals(n_boot);
  std::vector<double> resample(x.size());
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(seed, /*tag=*/0x626f6f74ULL, static_cast<std::uint64_t>(b));
    for (std::size_t i = 0; i < x.size(); ++i)
      resample[i] = x[rng.next_u64() % x.size()];
    vals[b] = stat(resample);
  }
  return std::sqrt(variance(vals));
}

namespace {

// integral of |c - cdf| over [a,b]; cdf is nondecreasing so c - cdf has at
// most one sign change, located by bisection.
double seg_l1(double c, const std::function<double(double)>& cdf, double a,
              double b) {
  auto g = [&](double t) { return c - cdf(t); };
  double ga = g(a), gb = g(b);
  auto piece = [&](double lo, double hi) {
    return std::abs(gauss_fixed(g, lo, hi, 7));
  };
  if (ga * gb >= 0) return piece(a, b);
  double lo = a, hi = b;
  for (int i = 0; i < 60 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) * ga >= 0 ? lo : hi) = mid;
  }
  return piece(a, lo) + piece(hi, b);
}

} // namespace

double wasserstein1_empirical(std::vector<double> sample,
                              const std::function<double(double)>& cdf,
                              double support_lo, double support_hi) {
  if (sample.empty()) throw invalid_param("wasserstein1_empirical: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double total = 0.0;
  // left tail: F_n = 0
  total += integrate([&](double t) { return cdf(t); }, support_lo,
                     sample.front(), 1e-9);
  for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
    if (sample[i + 1] <= sample[i]) continue;
    total += seg_l1(static_cast<double>(i + 1) / n, cdf, sample[i], sample[i + 1]);
  }
  // right tail: F_n = 1
  total += integrate([&](double t) { return 1.0 - cdf(t); }, sample.back(),
                     support_hi, 1e-9);
  return total;
}

} // namespace smlab
