#include "smlab/malliavin.hpp"
#include "smlab/errors.hpp"
#include "smlab/quad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace smlab {

namespace {

std::vector<double> fd_gradient(const SmoothFunctional& F,
                                const std::vector<double>& xi) {
  std::vector<double> g(xi.size());
  std::vector<double> p = xi;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    double h = 1e-6 * (1.0 + std::abs(xi[i]));
    p[i] = xi[i] + h;
    double up = F.eval(p);
    p[i] = xi[i] - h;
    double dn = F.eval(p);
    p[i] = xi[i];
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

constexpr std::uint64_t kGammaTag = 0x67616d6d; // sampler stream id

} // namespace

std::vector<double> gradient_of(const SmoothFunctional& F,
                                const std::vector<double>& xi) {
  return F.grad ? F.grad(xi) : fd_gradient(F, xi);
}

bool check_gradient(const SmoothFunctional& F, std::uint64_t seed,
                    int n_points, double rel_tol) {
  if (!F.grad) return true; // nothing to cross-check
  Rng rng(seed, kGammaTag, ~std::uint64_t{0});
  std::vector<double> xi(static_cast<std::size_t>(F.dim));
  for (int p = 0; p < n_points; ++p) {
    for (auto& v : xi) v = rng.next_normal();
    auto a = F.grad(xi);
    auto b = fd_gradient(F, xi);
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (std::abs(a[i] - b[i]) > rel_tol * (1.0 + std::abs(a[i])))
        return false;
  }
  return true;
}

std::vector<double> minus_DL_inv(const SmoothFunctional& F,
                                 const std::vector<double>& xi,
                                 const QuadratureSpec& spec, Rng& rng) {
  const int n = F.dim;
  if (static_cast<int>(xi.size()) != n)
    throw invalid_param("minus_DL_inv: point dimension mismatch");
  if (spec.t_nodes < 2 || spec.inner_paths < 2)
    throw invalid_param("minus_DL_inv: degenerate quadrature spec");
  std::vector<double> nodes(static_cast<std::size_t>(spec.t_nodes)),
      weights(static_cast<std::size_t>(spec.t_nodes));
  gauss_legendre_01(static_cast<unsigned>(spec.t_nodes), nodes.data(),
                    weights.data());
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::vector<double> xp(static_cast<std::size_t>(n)),
      xm(static_cast<std::size_t>(n)),
      fresh(static_cast<std::size_t>(n));
  const int pairs = spec.inner_paths / 2;
  for (int k = 0; k < spec.t_nodes; ++k) {
    double u = nodes[static_cast<std::size_t>(k)];
    double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    std::vector<double> inner(static_cast<std::size_t>(n), 0.0);
    for (int p = 0; p < pairs; ++p) {
      for (auto& v : fresh) v = rng.next_normal();
      for (int i = 0; i < n; ++i) {
        xp[static_cast<std::size_t>(i)] =
            u * xi[static_cast<std::size_t>(i)] +
            s * fresh[static_cast<std::size_t>(i)];
        xm[static_cast<std::size_t>(i)] =
            u * xi[static_cast<std::size_t>(i)] -
            s * fresh[static_cast<std::size_t>(i)];
      }
      auto gp = gradient_of(F, xp);
      auto gm = gradient_of(F, xm);
      for (int i = 0; i < n; ++i)
        inner[static_cast<std::size_t>(i)] +=
            0.5 * (gp[static_cast<std::size_t>(i)] +
                   gm[static_cast<std::size_t>(i)]);
    }
    double w = weights[static_cast<std::size_t>(k)] / pairs;
    for (int i = 0; i < n; ++i)
      acc[static_cast<std::size_t>(i)] += w * inner[static_cast<std::size_t>(i)];
  }
  return acc;
}

GammaSamples gamma_draw(const SmoothFunctional& F, std::size_t n_paths,
                        std::uint64_t seed, QuadratureSpec spec, int threads) {
  if (F.dim < 1 || !F.eval) throw invalid_param("gamma_draw: empty functional");
  GammaSamples out;
  out.seed = seed;
  out.spec = spec;
  out.fd_gradient = !F.grad;
  out.fast_path = F.chaos_order > 0;
  out.x.resize(n_paths);
  out.y.resize(n_paths);
  const int n = F.dim;
  run_blocks(n_paths, static_cast<unsigned>(threads),
             [&](std::size_t block, std::size_t begin, std::size_t end) {
               Rng rng(seed, kGammaTag, block);
               // separate stream for the OU inner average so the outer xi
               // draws match the fast path sample for sample
               Rng inner(seed, kGammaTag ^ 0x696e6e72, block);
               std::vector<double> xi(static_cast<std::size_t>(n));
               for (std::size_t p = begin; p < end; ++p) {
                 for (auto& v : xi) v = rng.next_normal();
                 out.x[p] = F.eval(xi);
                 auto g = gradient_of(F, xi);
                 if (F.chaos_order > 0) {
                   double s = 0.0;
                   for (double v : g) s += v * v;
                   out.y[p] = s / F.chaos_order;
                 } else {
                   auto m = minus_DL_inv(F, xi, spec, inner);
                   double s = 0.0;
                   for (int i = 0; i < n; ++i)
                     s += g[static_cast<std::size_t>(i)] *
                          m[static_cast<std::size_t>(i)];
                   out.y[p] = s;
                 }
               }
             });
  return out;
}

double BinnedRegression::operator()(double x) const {
  if (ghat.empty()) throw invalid_param("BinnedRegression: empty");
  // edges[0] and edges[bins] are the sample extremes; clamp outside
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  long k = (it - edges.begin()) - 1;
  k = std::clamp(k, long{0}, static_cast<long>(ghat.size()) - 1);
  return ghat[static_cast<std::size_t>(k)];
}

BinnedRegression conditional_regress(const GammaSamples& samples, int bins) {
  const std::size_t n = samples.x.size();
  if (n < 1000)
    throw invalid_param("conditional_regress: need at least 1000 samples");
  if (bins < 2 || static_cast<std::size_t>(bins) * 5 > n)
    throw invalid_param("conditional_regress: bad bin count");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return samples.x[a] < samples.x[b];
  });
  BinnedRegression reg;
  reg.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b < bins; ++b) {
    std::size_t lo = n * static_cast<std::size_t>(b) /
                     static_cast<std::size_t>(bins);
    std::size_t hi = n * (static_cast<std::size_t>(b) + 1) /
                     static_cast<std::size_t>(bins);
    double sx = 0.0, sy = 0.0, syy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      sx += samples.x[idx[i]];
      sy += samples.y[idx[i]];
      syy += samples.y[idx[i]] * samples.y[idx[i]];
    }
    double cnt = static_cast<double>(hi - lo);
    double my = sy / cnt;
    double var = std::max(0.0, (syy - cnt * my * my) / (cnt - 1.0));
    reg.edges[static_cast<std::size_t>(b)] = samples.x[idx[lo]];
    reg.center.push_back(sx / cnt);
    reg.ghat.push_back(my);
    reg.stderr_.push_back(std::sqrt(var / cnt));
    reg.count.push_back(hi - lo);
  }
  reg.edges[static_cast<std::size_t>(bins)] = samples.x[idx[n - 1]];
  return reg;
}

void export_regression_csv(const BinnedRegression& reg,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw invalid_param("export_regression_csv: cannot open " + path);
  out << "bin_center,g_hat,stderr,count\n";
  out.precision(12);
  for (std::size_t b = 0; b < reg.ghat.size(); ++b)
    out << reg.center[b] << ',' << reg.ghat[b] << ',' << reg.stderr_[b] << ','
        << reg.count[b] << '\n';
}

} // namespace smlab
