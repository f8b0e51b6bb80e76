#include "smlab/chaos.hpp"
#include "smlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smlab {

namespace {

constexpr std::size_t kDenseCap = std::size_t{1} << 22;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_cells(int n) {
  if (n < 1 || n > kMaxCells)
    throw cap_exceeded("grid dimension " + std::to_string(n) +
                       " outside [1, " + std::to_string(kMaxCells) + "]");
}

void check_order(int q) {
  // products of two capped kernels can reach twice the primary cap
  if (q < 0 || q > 2 * kMaxOrder)
    throw cap_exceeded("chaos order " + std::to_string(q) + " outside [0, " +
                       std::to_string(2 * kMaxOrder) + "]");
}

// next tuple in [0,n)^k, odometer order; returns false after the last one
bool advance(std::vector<int>& t, int n) {
  for (std::size_t i = t.size(); i-- > 0;) {
    if (++t[i] < n) return true;
    t[i] = 0;
  }
  return false;
}

} // namespace

GridMeasure uniform_grid(int n, double mass) {
  check_cells(n);
  if (!(mass > 0)) throw invalid_param("uniform_grid: mass must be positive");
  GridMeasure g;
  g.masses.assign(static_cast<std::size_t>(n), mass);
  return g;
}

std::size_t canon_size(int n, int q) {
  return static_cast<std::size_t>(std::llround(binom(n + q - 1, q)));
}

std::size_t canon_rank(const std::vector<int>& m, int n) {
  // sorted multiset -> strictly increasing combination -> colex rank
  (void)n;
  std::size_t r = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    r += static_cast<std::size_t>(
        std::llround(binom(m[i] + static_cast<int>(i), static_cast<int>(i) + 1)));
  return r;
}

std::vector<int> canon_unrank(std::size_t rank, int n, int q) {
  std::vector<int> m(static_cast<std::size_t>(q));
  std::size_t rem = rank;
  for (int i = q; i >= 1; --i) {
    int c = n - 1 + i - 1; // largest candidate for position i-1, shifted
    while (c >= i - 1 &&
           static_cast<std::size_t>(std::llround(binom(c, i))) > rem)
      --c;
    rem -= static_cast<std::size_t>(std::llround(binom(c, i)));
    m[static_cast<std::size_t>(i - 1)] = c - (i - 1);
  }
  return m;
}

double multiplicity(const std::vector<int>& m) {
  double mult = factorial(static_cast<int>(m.size()));
  std::size_t i = 0;
  while (i < m.size()) {
    std::size_t j = i;
    while (j < m.size() && m[j] == m[i]) ++j;
    mult /= factorial(static_cast<int>(j - i));
    i = j;
  }
  return mult;
}

Tensor::Tensor(int order_, int n_) : order(order_), n(n_) {
  check_cells(n_);
  if (order_ < 0) throw invalid_param("Tensor: negative order");
  double entries = std::pow(static_cast<double>(n_), order_);
  if (entries > static_cast<double>(kDenseCap))
    throw cap_exceeded("dense tensor would need " + std::to_string(entries) +
                       " entries");
  a.assign(static_cast<std::size_t>(entries), 0.0);
}

std::size_t Tensor::flat(const std::vector<int>& idx) const {
  std::size_t p = 0;
  for (int i : idx) p = p * static_cast<std::size_t>(n) +
                        static_cast<std::size_t>(i);
  return p;
}

double tensor_norm_sq(const Tensor& t, const GridMeasure& grid) {
  if (t.order == 0) return t.a.empty() ? 0.0 : t.a[0] * t.a[0];
  double s = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(t.order), 0);
  do {
    double w = 1.0;
    for (int i : idx) w *= grid.masses[static_cast<std::size_t>(i)];
    double v = t.at(idx);
    s += v * v * w;
  } while (advance(idx, t.n));
  return s;
}

SymmetricKernel::SymmetricKernel(int order_, GridMeasure grid_)
    : order(order_), grid(std::move(grid_)) {
  check_order(order_);
  check_cells(grid.dim());
  std::size_t sz = canon_size(grid.dim(), order_);
  if (sz > kDenseCap)
    throw cap_exceeded("kernel would need " + std::to_string(sz) +
                       " canonical coefficients");
  coeffs.assign(sz, 0.0);
}

double& SymmetricKernel::at(std::vector<int> idx) {
  if (static_cast<int>(idx.size()) != order)
    throw invalid_param("SymmetricKernel::at: index arity mismatch");
  std::sort(idx.begin(), idx.end());
  return coeffs[canon_rank(idx, grid.dim())];
}

double SymmetricKernel::value(std::vector<int> idx) const {
  std::sort(idx.begin(), idx.end());
  return coeffs[canon_rank(idx, grid.dim())];
}

double SymmetricKernel::norm_sq() const {
  double s = 0.0;
  for (std::size_t r = 0; r < coeffs.size(); ++r) {
    if (coeffs[r] == 0.0) continue;
    auto m = canon_unrank(r, grid.dim(), order);
    double w = multiplicity(m);
    for (int i : m) w *= grid.masses[static_cast<std::size_t>(i)];
    s += w * coeffs[r] * coeffs[r];
  }
  return s;
}

Tensor SymmetricKernel::dense() const {
  Tensor t(order, grid.dim());
  if (order == 0) {
    t.a.assign(1, coeffs.empty() ? 0.0 : coeffs[0]);
    return t;
  }
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  do {
    t.at(idx) = value(idx);
  } while (advance(idx, grid.dim()));
  return t;
}

SymmetricKernel symmetrize(const Tensor& raw, const GridMeasure& grid) {
  if (raw.n != grid.dim())
    throw invalid_param("symmetrize: tensor / grid dimension mismatch");
  SymmetricKernel f(raw.order, grid);
  if (raw.order == 0) {
    f.coeffs.assign(1, raw.a.empty() ? 0.0 : raw.a[0]);
    return f;
  }
  for (std::size_t r = 0; r < f.coeffs.size(); ++r) {
    auto m = canon_unrank(r, grid.dim(), raw.order);
    // mean over the distinct arrangements of the multiset
    double sum = 0.0;
    int cnt = 0;
    std::vector<int> perm = m;
    do {
      sum += raw.at(perm);
      ++cnt;
    } while (std::next_permutation(perm.begin(), perm.end()));
    f.coeffs[r] = sum / cnt;
  }
  return f;
}

Tensor contract(const SymmetricKernel& f, const SymmetricKernel& g, int r) {
  const int p = f.order, q = g.order, n = f.grid.dim();
  if (g.grid.dim() != n)
    throw invalid_param("contract: kernels live on different grids");
  if (r < 0 || r > std::min(p, q))
    throw invalid_param("contract: rank r outside [0, min(p,q)]");
  Tensor out(p + q - 2 * r, n);
  std::vector<int> idx(static_cast<std::size_t>(out.order), 0);
  std::vector<int> fi(static_cast<std::size_t>(p)),
      gi(static_cast<std::size_t>(q));
  do {
    for (int i = 0; i < p - r; ++i) fi[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
    for (int i = 0; i < q - r; ++i)
      gi[static_cast<std::size_t>(r + i)] = idx[static_cast<std::size_t>(p - r + i)];
    double s = 0.0;
    if (r == 0) {
      s = f.value(fi) * g.value(gi);
    } else {
      std::vector<int> k(static_cast<std::size_t>(r), 0);
      do {
        double w = 1.0;
        for (int i = 0; i < r; ++i) {
          fi[static_cast<std::size_t>(p - r + i)] = k[static_cast<std::size_t>(i)];
          gi[static_cast<std::size_t>(i)] = k[static_cast<std::size_t>(i)];
          w *= f.grid.masses[static_cast<std::size_t>(k[static_cast<std::size_t>(i)])];
        }
        s += w * f.value(fi) * g.value(gi);
      } while (advance(k, n));
    }
    if (out.order == 0) {
      out.a[0] = s;
      break;
    }
    out.at(idx) = s;
  } while (out.order > 0 && advance(idx, n));
  return out;
}

SymmetricKernel contract_sym(const SymmetricKernel& f,
                             const SymmetricKernel& g, int r) {
  return symmetrize(contract(f, g, r), f.grid);
}

double ChaosVector::second_moment() const {
  double s = 0.0;
  for (const auto& [q, f] : kernels) s += factorial(q) * f.norm_sq();
  return s;
}

ChaosVector product_expand(const SymmetricKernel& f, const SymmetricKernel& g) {
  const int p = f.order, q = g.order;
  ChaosVector F;
  F.grid = f.grid;
  for (int r = 0; r <= std::min(p, q); ++r) {
    double c = factorial(r) * binom(p, r) * binom(q, r);
    Tensor t = contract(f, g, r);
    if (t.order == 0) {
      F.mean += c * t.a[0];
      continue;
    }
    auto k = symmetrize(t, f.grid);
    for (double& v : k.coeffs) v *= c;
    auto [it, inserted] = F.kernels.emplace(t.order, k);
    if (!inserted)
      for (std::size_t i = 0; i < k.coeffs.size(); ++i)
        it->second.coeffs[i] += k.coeffs[i];
  }
  return F;
}

namespace {

// kernel flattened to its nonzero canonical terms for fast path evaluation
struct CompiledKernel {
  struct Term {
    double w;                              // mult * coeff * prod mass^(m_j/2)
    std::vector<std::pair<int, int>> pows; // (cell, multiplicity)
  };
  std::vector<Term> terms;
};

CompiledKernel compile(const SymmetricKernel& f) {
  CompiledKernel ck;
  for (std::size_t r = 0; r < f.coeffs.size(); ++r) {
    if (f.coeffs[r] == 0.0) continue;
    auto m = canon_unrank(r, f.grid.dim(), f.order);
    CompiledKernel::Term t;
    t.w = multiplicity(m) * f.coeffs[r];
    std::size_t i = 0;
    while (i < m.size()) {
      std::size_t j = i;
      while (j < m.size() && m[j] == m[i]) ++j;
      int cell = m[i], mult = static_cast<int>(j - i);
      t.w *= std::pow(f.grid.masses[static_cast<std::size_t>(cell)],
                      0.5 * mult);
      t.pows.emplace_back(cell, mult);
      i = j;
    }
    ck.terms.push_back(std::move(t));
  }
  return ck;
}

// probabilists' Hermite values H_0..H_max at z, one row per cell
void hermite_rows(const std::vector<double>& z, int max_m,
                  std::vector<double>& H) {
  const std::size_t n = z.size();
  H.resize(n * static_cast<std::size_t>(max_m + 1));
  for (std::size_t j = 0; j < n; ++j) {
    double* h = &H[j * static_cast<std::size_t>(max_m + 1)];
    h[0] = 1.0;
    if (max_m >= 1) h[1] = z[j];
    for (int m = 1; m < max_m; ++m)
      h[m + 1] = z[j] * h[m] - m * h[m - 1];
  }
}

double eval_compiled(const CompiledKernel& ck, const std::vector<double>& H,
                     int max_m) {
  double s = 0.0;
  for (const auto& t : ck.terms) {
    double v = t.w;
    for (auto [cell, m] : t.pows)
      v *= H[static_cast<std::size_t>(cell) *
                 static_cast<std::size_t>(max_m + 1) +
             static_cast<std::size_t>(m)];
    s += v;
  }
  return s;
}

constexpr std::uint64_t kChaosTag = 0x63686173; // sampler stream id

} // namespace

std::vector<double> sample(const SymmetricKernel& f, std::size_t n_paths,
                           std::uint64_t seed, int threads) {
  ChaosVector F;
  F.grid = f.grid;
  F.kernels.emplace(f.order, f);
  return sample(F, n_paths, seed, threads);
}

std::vector<double> sample(const ChaosVector& F, std::size_t n_paths,
                           std::uint64_t seed, int threads) {
  const int n = F.grid.dim();
  check_cells(n);
  int max_m = 0;
  std::vector<std::pair<int, CompiledKernel>> cks;
  for (const auto& [q, f] : F.kernels) {
    check_order(q);
    max_m = std::max(max_m, q);
    cks.emplace_back(q, compile(f));
  }
  std::vector<double> out(n_paths);
  const double mean = F.mean;
  run_blocks(n_paths, threads, [&](std::uint64_t block, std::size_t begin,
                                   std::size_t end) {
    Rng rng(seed, kChaosTag, block);
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> H;
    for (std::size_t p = begin; p < end; ++p) {
      for (auto& v : z) v = rng.next_normal();
      hermite_rows(z, max_m, H);
      double s = mean;
      for (const auto& [q, ck] : cks) s += eval_compiled(ck, H, max_m);
      out[p] = s;
    }
  });
  return out;
}

void sample_with_dnorm(const SymmetricKernel& f, std::size_t n_paths,
                       std::uint64_t seed, int threads,
                       std::vector<double>& out_f,
                       std::vector<double>& out_dnorm_sq) {
  const int n = f.grid.dim(), q = f.order;
  check_cells(n);
  check_order(q);
  if (q < 1) throw invalid_param("sample_with_dnorm: need order >= 1");
  CompiledKernel ck = compile(f);
  // D_r F = q I_{q-1}(f(r, .)); |DF|^2 = sum_r mass_r (D_r F)^2
  std::vector<CompiledKernel> slices;
  std::vector<double> slice_const(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < n; ++r) {
    auto s = kernel_slice(f, r);
    if (q == 1)
      slice_const[static_cast<std::size_t>(r)] = s.coeffs[0];
    slices.push_back(compile(s));
  }
  out_f.resize(n_paths);
  out_dnorm_sq.resize(n_paths);
  const int max_m = q;
  run_blocks(n_paths, threads, [&](std::uint64_t block, std::size_t begin,
                                   std::size_t end) {
    Rng rng(seed, kChaosTag, block);
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> H;
    for (std::size_t p = begin; p < end; ++p) {
      for (auto& v : z) v = rng.next_normal();
      hermite_rows(z, max_m, H);
      out_f[p] = eval_compiled(ck, H, max_m);
      double d = 0.0;
      for (int r = 0; r < n; ++r) {
        double dr = q * (q == 1 ? slice_const[static_cast<std::size_t>(r)]
                                : eval_compiled(
                                      slices[static_cast<std::size_t>(r)], H,
                                      max_m));
        d += f.grid.masses[static_cast<std::size_t>(r)] * dr * dr;
      }
      out_dnorm_sq[p] = d;
    }
  });
}

SymmetricKernel kernel_slice(const SymmetricKernel& f, int cell) {
  if (f.order < 1) throw invalid_param("kernel_slice: need order >= 1");
  SymmetricKernel g(f.order - 1, f.grid);
  if (f.order == 1) {
    g.coeffs.assign(1, f.value({cell}));
    return g;
  }
  for (std::size_t r = 0; r < g.coeffs.size(); ++r) {
    auto m = canon_unrank(r, f.grid.dim(), g.order);
    m.push_back(cell);
    std::sort(m.begin(), m.end());
    g.coeffs[r] = f.coeffs[canon_rank(m, f.grid.dim())];
  }
  return g;
}

std::vector<ChaosVector> malliavin_D(const ChaosVector& F) {
  const int n = F.grid.dim();
  std::vector<ChaosVector> D(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    D[static_cast<std::size_t>(r)].grid = F.grid;
    for (const auto& [q, f] : F.kernels) {
      auto s = kernel_slice(f, r);
      for (double& c : s.coeffs) c *= q;
      if (q == 1)
        D[static_cast<std::size_t>(r)].mean += s.coeffs[0];
      else
        D[static_cast<std::size_t>(r)].kernels.emplace(q - 1, std::move(s));
    }
  }
  return D;
}

ChaosVector L_inverse(const ChaosVector& F) {
  if (F.mean != 0.0)
    throw invalid_param("L_inverse: F must be centered (mean is " +
                        std::to_string(F.mean) + ")");
  ChaosVector G = F;
  for (auto& [q, f] : G.kernels)
    for (double& c : f.coeffs) c = -c / q;
  return G;
}

MomentPair moment_via_formula(const SymmetricKernel& f, int r,
                              std::size_t n_paths, std::uint64_t seed,
                              int threads) {
  if (r < 1) throw invalid_param("moment_via_formula: need r >= 1");
  std::vector<double> x, d;
  sample_with_dnorm(f, n_paths, seed, threads, x, d);
  std::vector<double> lhs(n_paths), rhs(n_paths);
  const double rq = static_cast<double>(r) / f.order;
  for (std::size_t i = 0; i < n_paths; ++i) {
    lhs[i] = std::pow(x[i], r + 1);
    rhs[i] = rq * std::pow(x[i], r - 1) * d[i];
  }
  return {raw_moment(lhs, 1), raw_moment(rhs, 1)};
}

std::map<int, double> contraction_norms(const SymmetricKernel& f) {
  std::map<int, double> out;
  for (int r = 1; r < f.order; ++r)
    out[r] = std::sqrt(tensor_norm_sq(contract(f, f, r), f.grid));
  return out;
}

std::vector<FourthMomentRow> fourth_moment_report(
    const std::vector<SymmetricKernel>& seq, double sigma_sq,
    std::size_t n_paths, std::uint64_t seed, int threads) {
  std::vector<FourthMomentRow> rows;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& f = seq[i];
    FourthMomentRow row;
    row.index = static_cast<int>(i);
    row.second_moment = factorial(f.order) * f.norm_sq();
    std::vector<double> x, d;
    sample_with_dnorm(f, n_paths, seed, threads, x, d);
    std::vector<double> x4(n_paths), dq(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
      x4[p] = x[p] * x[p] * x[p] * x[p];
      dq[p] = d[p] / f.order;
    }
    row.fourth_moment = raw_moment(x4, 1);
    row.contraction = contraction_norms(f);
    // variance of |DF|^2/q with a moment-based standard error
    double m = mean(dq);
    std::vector<double> c2(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
      double c = dq[p] - m;
      c2[p] = c * c;
    }
    row.dnorm_variance = raw_moment(c2, 1);
    row.variance_bound = (f.order - 1.0) / (3.0 * f.order) *
                         (row.fourth_moment.value - 3.0 * sigma_sq * sigma_sq);
    rows.push_back(std::move(row));
  }
  return rows;
}

SymmetricKernel diagonal_clt_kernel(int n) {
  SymmetricKernel f(2, uniform_grid(n));
  const double c = 1.0 / std::sqrt(2.0 * n);
  for (int i = 0; i < n; ++i) f.at({i, i}) = c;
  return f;
}

std::vector<std::string> kernel_to_records(const SymmetricKernel& f) {
  std::vector<std::string> recs;
  for (std::size_t r = 0; r < f.coeffs.size(); ++r) {
    if (f.coeffs[r] == 0.0) continue;
    auto m = canon_unrank(r, f.grid.dim(), f.order);
    std::ostringstream os;
    os << f.order;
    for (int i : m) os << ' ' << i;
    os.precision(17);
    os << ' ' << f.coeffs[r];
    recs.push_back(os.str());
  }
  return recs;
}

SymmetricKernel kernel_from_records(const std::vector<std::string>& recs,
                                    GridMeasure grid) {
  if (recs.empty()) throw invalid_param("kernel_from_records: no records");
  SymmetricKernel f;
  bool first = true;
  for (const auto& rec : recs) {
    std::istringstream is(rec);
    int q;
    if (!(is >> q)) throw invalid_param("kernel_from_records: bad record");
    if (first) {
      f = SymmetricKernel(q, grid);
      first = false;
    } else if (q != f.order) {
      throw invalid_param("kernel_from_records: mixed orders");
    }
    std::vector<int> m(static_cast<std::size_t>(q));
    for (int& i : m)
      if (!(is >> i)) throw invalid_param("kernel_from_records: bad indices");
    double c;
    if (!(is >> c)) throw invalid_param("kernel_from_records: bad coefficient");
    f.at(m) = c;
  }
  return f;
}

} // namespace smlab
