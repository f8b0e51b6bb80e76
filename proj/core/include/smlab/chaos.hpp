#pragma once

// Discretized white-noise chaos: symmetric kernels over a weighted grid,
// contraction / product algebra, exact Hermite-product sampling, and the
// kernel-level derivative and inverse generator.

#include "smlab/rng.hpp"
#include "smlab/stats.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace smlab {

inline constexpr int kMaxCells = 64;
inline constexpr int kMaxOrder = 4;

struct GridMeasure {
  std::vector<double> masses;
  int dim() const { return static_cast<int>(masses.size()); }
};

GridMeasure uniform_grid(int n, double mass = 1.0);

// sorted multi-index (multiset of cell indices) ranking utilities
std::size_t canon_size(int n, int q);
std::size_t canon_rank(const std::vector<int>& m, int n);
std::vector<int> canon_unrank(std::size_t r, int n, int q);
double multiplicity(const std::vector<int>& m); // q! / prod of repeats!

// dense (not necessarily symmetric) tensor, used as contraction work space
struct Tensor {
  int order = 0;
  int n = 0;
  std::vector<double> a;

  Tensor() = default;
  Tensor(int order_, int n_);
  std::size_t flat(const std::vector<int>& idx) const;
  double& at(const std::vector<int>& idx) { return a[flat(idx)]; }
  double at(const std::vector<int>& idx) const { return a[flat(idx)]; }
};

double tensor_norm_sq(const Tensor& t, const GridMeasure& grid);

struct SymmetricKernel {
  int order = 0;
  GridMeasure grid;
  std::vector<double> coeffs; // canonical multiset order, see canon_rank

  SymmetricKernel() = default;
  SymmetricKernel(int order_, GridMeasure grid_);
  double& at(std::vector<int> idx); // any index order
  double value(std::vector<int> idx) const;
  double norm_sq() const;
  Tensor dense() const;
};

SymmetricKernel symmetrize(const Tensor& raw, const GridMeasure& grid);
Tensor contract(const SymmetricKernel& f, const SymmetricKernel& g, int r);
SymmetricKernel contract_sym(const SymmetricKernel& f,
                             const SymmetricKernel& g, int r);

struct ChaosVector {
  GridMeasure grid;
  double mean = 0.0;
  std::map<int, SymmetricKernel> kernels; // q >= 1 only

  double second_moment() const; // E[F^2] - mean^2 = sum q! |f_q|^2
};

ChaosVector product_expand(const SymmetricKernel& f, const SymmetricKernel& g);

// exact samplers (no discretization bias); deterministic in (seed, path index)
std::vector<double> sample(const SymmetricKernel& f, std::size_t n_paths,
                           std::uint64_t seed, int threads = 1);
std::vector<double> sample(const ChaosVector& F, std::size_t n_paths,
                           std::uint64_t seed, int threads = 1);
// F = I_q(f) together with |DF|^2 per path, from the same noise
void sample_with_dnorm(const SymmetricKernel& f, std::size_t n_paths,
                       std::uint64_t seed, int threads,
                       std::vector<double>& out_f,
                       std::vector<double>& out_dnorm_sq);

std::vector<ChaosVector> malliavin_D(const ChaosVector& F);
SymmetricKernel kernel_slice(const SymmetricKernel& f, int cell);
ChaosVector L_inverse(const ChaosVector& F);

struct MomentPair {
  MomentEstimate lhs; // E[F^{r+1}]
  MomentEstimate rhs; // (r/q) E[F^{r-1} |DF|^2]
};
MomentPair moment_via_formula(const SymmetricKernel& f, int r,
                              std::size_t n_paths, std::uint64_t seed,
                              int threads = 1);

std::map<int, double> contraction_norms(const SymmetricKernel& f);

struct FourthMomentRow {
  int index = 0;
  double second_moment = 0.0;
  MomentEstimate fourth_moment;
  std::map<int, double> contraction; // r -> |f (x)_r f|
  MomentEstimate dnorm_variance;     // Var(|DF|^2 / q)
  double variance_bound = 0.0;       // (q-1)/(3q) (E[F^4] - 3 sigma^4)
};
std::vector<FourthMomentRow> fourth_moment_report(
    const std::vector<SymmetricKernel>& seq, double sigma_sq,
    std::size_t n_paths, std::uint64_t seed, int threads = 1);

// f_n = (1/sqrt(2n)) sum_i e_i (x) e_i on n unit cells; the classic
// sequence converging to the normal law inside the second chaos
SymmetricKernel diagonal_clt_kernel(int n);

// flat records "q i1 .. iq c" for persistence
std::vector<std::string> kernel_to_records(const SymmetricKernel& f);
SymmetricKernel kernel_from_records(const std::vector<std::string>& recs,
                                    GridMeasure grid);

} // namespace smlab
