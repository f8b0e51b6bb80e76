#include "smlab/wiener_poisson.hpp"
#include "smlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smlab {

namespace {

// odometer over n^len tuples; returns false once exhausted
bool advance(std::vector<int>& idx, int n) {
  for (std::size_t i = idx.size(); i-- > 0;) {
    if (++idx[i] < n) return true;
    idx[i] = 0;
  }
  return false;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return v;
}

double factorial(int n) {
  double v = 1.0;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

constexpr int kMaxWpOrder = 4; // products of two order-2 integrals

// same stream id as the Gaussian chaos sampler, so a jump-free grid replays
// exactly the draws the Gaussian sampler would make
constexpr std::uint64_t kChaosTag = 0x63686173;

} // namespace

int LevyGrid::marks() const {
  return (sigma > 0.0 ? 1 : 0) + static_cast<int>(atoms.size());
}

int LevyGrid::dim() const { return static_cast<int>(dt.size()) * marks(); }

bool LevyGrid::is_jump(int cell) const {
  return cell % marks() >= (sigma > 0.0 ? 1 : 0);
}

double LevyGrid::jump_x(int cell) const {
  int m = cell % marks();
  int base = sigma > 0.0 ? 1 : 0;
  return m < base ? 0.0 : atoms[static_cast<std::size_t>(m - base)].x;
}

double LevyGrid::jump_mean(int cell) const {
  int m = cell % marks();
  int base = sigma > 0.0 ? 1 : 0;
  if (m < base) return 0.0;
  return atoms[static_cast<std::size_t>(m - base)].nu *
         dt[static_cast<std::size_t>(cell / marks())];
}

double LevyGrid::mass(int cell) const {
  double w = dt[static_cast<std::size_t>(cell / marks())];
  double x = jump_x(cell);
  if (!is_jump(cell)) return sigma * sigma * w;
  int base = sigma > 0.0 ? 1 : 0;
  return x * x * w * atoms[static_cast<std::size_t>(cell % marks() - base)].nu;
}

GridMeasure LevyGrid::measure() const {
  GridMeasure g;
  g.masses.resize(static_cast<std::size_t>(dim()));
  for (int c = 0; c < dim(); ++c)
    g.masses[static_cast<std::size_t>(c)] = mass(c);
  return g;
}

LevyGrid brownian_grid(int n_time, double total_time, double sigma) {
  LevyGrid g;
  g.sigma = sigma;
  g.dt.assign(static_cast<std::size_t>(n_time), total_time / n_time);
  return g;
}

namespace {

void check_grid(const LevyGrid& g) {
  if (g.dt.size() > static_cast<std::size_t>(kMaxTimeCells))
    throw cap_exceeded("levy grid has " + std::to_string(g.dt.size()) +
                       " time cells, cap is " + std::to_string(kMaxTimeCells));
  if (g.atoms.size() > static_cast<std::size_t>(kMaxJumpAtoms))
    throw cap_exceeded("levy grid has " + std::to_string(g.atoms.size()) +
                       " jump atoms, cap is " + std::to_string(kMaxJumpAtoms));
  if (g.dim() > kMaxCells)
    throw cap_exceeded("levy grid has " + std::to_string(g.dim()) +
                       " cells, cap is " + std::to_string(kMaxCells));
  if (g.sigma <= 0.0 && g.atoms.empty())
    throw invalid_param("levy grid needs sigma > 0 or at least one atom");
  for (const auto& a : g.atoms)
    if (a.x == 0.0 || a.nu <= 0.0)
      throw invalid_param("jump atoms need x != 0 and nu > 0");
  for (double w : g.dt)
    if (w <= 0.0) throw invalid_param("time cells need dt > 0");
}

} // namespace

WPKernel::WPKernel(int order_, LevyGrid grid_)
    : order(order_), grid(std::move(grid_)) {
  check_grid(grid);
  if (order < 0 || order > kMaxWpOrder)
    throw cap_exceeded("kernel order " + std::to_string(order) +
                       " outside [0, " + std::to_string(kMaxWpOrder) + "]");
  coeffs.assign(canon_size(grid.dim(), order), 0.0);
}

double& WPKernel::at(std::vector<int> idx) {
  std::sort(idx.begin(), idx.end());
  return coeffs[canon_rank(idx, grid.dim())];
}

double WPKernel::value(std::vector<int> idx) const {
  std::sort(idx.begin(), idx.end());
  return coeffs[canon_rank(idx, grid.dim())];
}

double WPKernel::norm_sq() const {
  double s = 0.0;
  for (std::size_t r = 0; r < coeffs.size(); ++r) {
    if (coeffs[r] == 0.0) continue;
    auto m = canon_unrank(r, grid.dim(), order);
    double w = multiplicity(m) * coeffs[r] * coeffs[r];
    for (int c : m) w *= grid.mass(c);
    s += w;
  }
  return s;
}

WPKernel contract_ws(const WPKernel& f, const WPKernel& g, int r, int s) {
  const int q = f.order, p = g.order, n = f.grid.dim();
  if (r < 0 || s < 0 || r > std::min(q, p) || s > std::min(q, p) - r)
    throw invalid_param("contract_ws: need 0 <= r <= min(q,p), 0 <= s <= min(q,p)-r");
  const int a = q - r - s, b = p - r - s, out = a + b + s;
  WPKernel h(out, f.grid);
  {
    Tensor raw(out, n);
    // free index layout: s shared cells, then a of f, then b of g
    std::vector<int> idx(static_cast<std::size_t>(out), 0);
    std::vector<int> fi(static_cast<std::size_t>(q));
    std::vector<int> gi(static_cast<std::size_t>(p));
    double scalar = 0.0;
    do {
      double xprod = 1.0;
      for (int i = 0; i < s; ++i) xprod *= f.grid.jump_x(idx[static_cast<std::size_t>(i)]);
      if (xprod == 0.0 && s > 0) continue;
      for (int i = 0; i < s; ++i) {
        fi[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
        gi[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
      }
      for (int i = 0; i < a; ++i)
        fi[static_cast<std::size_t>(s + i)] = idx[static_cast<std::size_t>(s + i)];
      for (int i = 0; i < b; ++i)
        gi[static_cast<std::size_t>(s + i)] = idx[static_cast<std::size_t>(s + a + i)];
      double acc = 0.0;
      std::vector<int> w(static_cast<std::size_t>(r), 0);
      do {
        double mw = 1.0;
        for (int i = 0; i < r; ++i) {
          fi[static_cast<std::size_t>(s + a + i)] = w[static_cast<std::size_t>(i)];
          gi[static_cast<std::size_t>(s + b + i)] = w[static_cast<std::size_t>(i)];
          mw *= f.grid.mass(w[static_cast<std::size_t>(i)]);
        }
        acc += mw * f.value(fi) * g.value(gi);
      } while (r > 0 && advance(w, n));
      if (out == 0)
        scalar += xprod * acc;
      else
        raw.at(idx) = xprod * acc;
    } while (out > 0 && advance(idx, n));
    if (out == 0) {
      h.coeffs[0] = scalar;
    } else {
      auto sym = symmetrize(raw, f.grid.measure());
      h.coeffs = sym.coeffs;
    }
  }
  return h;
}

double WPChaosVector::second_moment() const {
  double s = 0.0;
  for (const auto& [q, f] : kernels) s += factorial(q) * f.norm_sq();
  return s;
}

WPChaosVector product_expand_wp(const WPKernel& f, const WPKernel& g) {
  const int q = f.order, p = g.order;
  if (q > 2 || p > 2)
    throw cap_exceeded("product_expand_wp: factors capped at order 2");
  WPChaosVector F;
  F.grid = f.grid;
  for (int r = 0; r <= std::min(q, p); ++r) {
    for (int s = 0; s + r <= std::min(q, p); ++s) {
      double coef = factorial(r) * factorial(s) * binom(p, r) * binom(q, r) *
                    binom(p - r, s) * binom(q - r, s);
      WPKernel h = contract_ws(f, g, r, s);
      if (h.order == 0) {
        F.mean += coef * h.coeffs[0];
        continue;
      }
      auto it = F.kernels.find(h.order);
      if (it == F.kernels.end()) {
        for (auto& c : h.coeffs) c *= coef;
        F.kernels.emplace(h.order, std::move(h));
      } else {
        for (std::size_t i = 0; i < h.coeffs.size(); ++i)
          it->second.coeffs[i] += coef * h.coeffs[i];
      }
    }
  }
  return F;
}

namespace {

struct CompiledWp {
  struct Term {
    double w; // multiplicity * coeff
    std::vector<std::pair<int, int>> pows;
  };
  std::vector<Term> terms;
};

CompiledWp compile_wp(const WPKernel& f) {
  CompiledWp ck;
  for (std::size_t r = 0; r < f.coeffs.size(); ++r) {
    if (f.coeffs[r] == 0.0) continue;
    auto m = canon_unrank(r, f.grid.dim(), f.order);
    CompiledWp::Term t;
    t.w = multiplicity(m) * f.coeffs[r];
    std::size_t i = 0;
    while (i < m.size()) {
      std::size_t j = i;
      while (j < m.size() && m[j] == m[i]) ++j;
      t.pows.emplace_back(m[i], static_cast<int>(j - i));
      i = j;
    }
    ck.terms.push_back(std::move(t));
  }
  return ck;
}

// compensated increments: Brownian cells sqrt(mu) z, jump cells x (N - nu dt)
void draw_cells(const LevyGrid& g, Rng& rng, std::vector<double>& zeta) {
  const int n = g.dim();
  zeta.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    if (g.is_jump(c)) {
      double m = g.jump_mean(c);
      zeta[static_cast<std::size_t>(c)] =
          g.jump_x(c) * (static_cast<double>(rng.next_poisson(m)) - m);
    } else {
      zeta[static_cast<std::size_t>(c)] =
          std::sqrt(g.mass(c)) * rng.next_normal();
    }
  }
}

// per-cell multiple integrals of the constant kernel: P_0 = 1, P_1 = zeta,
// P_{m+1} = (zeta - m x) P_m - m mu P_{m-1} (Hermite scaling when x = 0)
void cell_rows(const LevyGrid& g, const std::vector<double>& zeta, int max_m,
               std::vector<double>& P) {
  const int n = g.dim(), w = max_m + 1;
  P.resize(static_cast<std::size_t>(n * w));
  for (int c = 0; c < n; ++c) {
    double* row = &P[static_cast<std::size_t>(c * w)];
    double z = zeta[static_cast<std::size_t>(c)];
    double x = g.jump_x(c), mu = g.mass(c);
    row[0] = 1.0;
    if (max_m >= 1) row[1] = z;
    for (int m = 1; m < max_m; ++m)
      row[m + 1] = (z - m * x) * row[m] - m * mu * row[m - 1];
  }
}

double eval_wp(const CompiledWp& ck, const std::vector<double>& P, int max_m) {
  double s = 0.0;
  for (const auto& t : ck.terms) {
    double v = t.w;
    for (auto [cell, m] : t.pows)
      v *= P[static_cast<std::size_t>(cell) *
                 static_cast<std::size_t>(max_m + 1) +
             static_cast<std::size_t>(m)];
    s += v;
  }
  return s;
}

WPKernel wp_slice(const WPKernel& f, int cell) {
  WPKernel s(f.order - 1, f.grid);
  for (std::size_t r = 0; r < s.coeffs.size(); ++r) {
    auto m = canon_unrank(r, f.grid.dim(), f.order - 1);
    m.push_back(cell);
    s.coeffs[r] = f.value(m);
  }
  return s;
}

} // namespace

std::vector<double> sample_wp(const WPKernel& f, std::size_t n_paths,
                              std::uint64_t seed, int threads) {
  WPChaosVector F;
  F.grid = f.grid;
  F.kernels.emplace(f.order, f);
  return sample_wp(F, n_paths, seed, threads);
}

std::vector<double> sample_wp(const WPChaosVector& F, std::size_t n_paths,
                              std::uint64_t seed, int threads) {
  check_grid(F.grid);
  int max_m = 0;
  std::vector<CompiledWp> cks;
  for (const auto& [q, f] : F.kernels) {
    max_m = std::max(max_m, q);
    cks.push_back(compile_wp(f));
  }
  std::vector<double> out(n_paths);
  const double mean = F.mean;
  run_blocks(n_paths, threads, [&](std::uint64_t block, std::size_t begin,
                                   std::size_t end) {
    Rng rng(seed, kChaosTag, block);
    std::vector<double> zeta, P;
    for (std::size_t p = begin; p < end; ++p) {
      draw_cells(F.grid, rng, zeta);
      cell_rows(F.grid, zeta, max_m, P);
      double s = mean;
      for (const auto& ck : cks) s += eval_wp(ck, P, max_m);
      out[p] = s;
    }
  });
  return out;
}

namespace {

// X = I_q(f) with the per-cell derivative field D_c X = q I_{q-1}(f(c, .));
// fn(path, X, D) consumes each path
template <typename Fn>
void run_with_derivative(const WPKernel& f, std::size_t n_paths,
                         std::uint64_t seed, int threads, Fn&& fn) {
  const int q = f.order, n = f.grid.dim();
  if (q < 1 || q > 2)
    throw cap_exceeded("derivative sampler: order must be 1 or 2");
  CompiledWp ck = compile_wp(f);
  std::vector<CompiledWp> slices;
  for (int c = 0; c < n; ++c) slices.push_back(compile_wp(wp_slice(f, c)));
  const int max_m = q;
  run_blocks(n_paths, threads, [&](std::uint64_t block, std::size_t begin,
                                   std::size_t end) {
    Rng rng(seed, kChaosTag, block);
    std::vector<double> zeta, P;
    std::vector<double> D(static_cast<std::size_t>(n));
    for (std::size_t p = begin; p < end; ++p) {
      draw_cells(f.grid, rng, zeta);
      cell_rows(f.grid, zeta, max_m, P);
      double x = eval_wp(ck, P, max_m);
      for (int c = 0; c < n; ++c)
        D[static_cast<std::size_t>(c)] =
            q * eval_wp(slices[static_cast<std::size_t>(c)], P, max_m);
      fn(p, x, D);
    }
  });
}

} // namespace

MomentEstimate jump_term_estimate(const WPKernel& f, std::size_t n_paths,
                                  std::uint64_t seed, int threads) {
  const int q = f.order, n = f.grid.dim();
  std::vector<double> vals(n_paths);
  run_with_derivative(
      f, n_paths, seed, threads,
      [&](std::size_t p, double, const std::vector<double>& D) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) {
          double d = std::abs(D[static_cast<std::size_t>(c)]);
          s += std::abs(f.grid.jump_x(c)) * d * d * d * f.grid.mass(c);
        }
        vals[p] = s / q;
      });
  return raw_moment(vals, 1);
}

double WPFourthMomentRow::max_flagged() const {
  double m = 0.0;
  for (const auto& [id, v] : flagged) m = std::max(m, v);
  return m;
}

std::vector<WPFourthMomentRow> wp_fourth_moment_report(
    const std::vector<WPKernel>& seq, std::size_t n_paths, std::uint64_t seed,
    int threads) {
  std::vector<WPFourthMomentRow> rows;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const WPKernel& f = seq[i];
    const int q = f.order;
    if (q < 1 || q > 2)
      throw cap_exceeded("wp_fourth_moment_report: order must be 1 or 2");
    const int n = f.grid.dim();
    WPFourthMomentRow row;
    row.label = static_cast<double>(i);
    row.second_moment = factorial(q) * f.norm_sq();
    for (int r = 1; r < q; ++r)
      row.flagged.emplace_back(
          "r=" + std::to_string(r) + ",s=0",
          std::sqrt(contract_ws(f, f, r, 0).norm_sq()));
    for (int s = 1; s <= q; ++s)
      row.flagged.emplace_back(
          "r=0,s=" + std::to_string(s),
          std::sqrt(contract_ws(f, f, 0, s).norm_sq()));

    std::vector<double> xs(n_paths), dn2(n_paths), jq(n_paths);
    run_with_derivative(
        f, n_paths, seed, threads,
        [&](std::size_t p, double x, const std::vector<double>& D) {
          xs[p] = x;
          double s = 0.0, j = 0.0;
          for (int c = 0; c < n; ++c) {
            double d = D[static_cast<std::size_t>(c)];
            double mu = f.grid.mass(c), xj = f.grid.jump_x(c);
            s += mu * d * d;
            j += xj * xj * d * d * d * d * mu;
          }
          dn2[p] = s * s;
          jq[p] = j;
        });
    std::vector<double> x4(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
      double v = xs[p] * xs[p];
      x4[p] = v * v;
    }
    row.fourth_moment = raw_moment(x4, 1);
    row.dnorm_sq_sq = raw_moment(dn2, 1);
    row.jump_quartic = raw_moment(jq, 1);
    auto cdf = [](double z) { return 0.5 * std::erfc(-z / M_SQRT2); };
    row.w1_vs_normal = wasserstein1_empirical(
        xs, cdf, -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity());
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace smlab
