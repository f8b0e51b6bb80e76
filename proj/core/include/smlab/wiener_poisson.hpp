#pragma once

// Mixed Brownian / compensated-Poisson chaos on a finite grid of time cells
// and jump atoms: the weighted cell measure, the (r, s) contraction that
// integrates r variables and shares s jump variables, the corresponding
// product formula, an exact sampler, and the fourth-moment diagnostics.

#include "smlab/chaos.hpp"
#include "smlab/stats.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace smlab {

inline constexpr int kMaxTimeCells = 16;
inline constexpr int kMaxJumpAtoms = 4;

struct JumpAtom {
  double x = 0.0;  // jump size, nonzero
  double nu = 0.0; // intensity
};

// cells are ordered time-major: for each time cell, the Brownian component
// (when sigma > 0) followed by the jump atoms. Cell mass is sigma^2 dt for
// Brownian cells and x^2 dt nu for jump cells.
struct LevyGrid {
  std::vector<double> dt;
  std::vector<JumpAtom> atoms;
  double sigma = 1.0;

  int marks() const;
  int dim() const;
  bool is_jump(int cell) const;
  double jump_x(int cell) const;    // 0 on Brownian cells
  double jump_mean(int cell) const; // nu dt, 0 on Brownian cells
  double mass(int cell) const;
  GridMeasure measure() const; // masses only, for the Gaussian embedding
};

LevyGrid brownian_grid(int n_time, double total_time = 1.0,
                       double sigma = 1.0);

struct WPKernel {
  int order = 0;
  LevyGrid grid;
  std::vector<double> coeffs; // canonical multiset order, see canon_rank

  WPKernel() = default;
  WPKernel(int order_, LevyGrid grid_);
  double& at(std::vector<int> idx); // any index order
  double value(std::vector<int> idx) const;
  double norm_sq() const; // mu-weighted, over off-diagonal and diagonal alike
};

// (f x_r^s g): integrate r variables against mu, share s variables among the
// jump cells (each shared cell contributes a factor x), then symmetrize
WPKernel contract_ws(const WPKernel& f, const WPKernel& g, int r, int s);

struct WPChaosVector {
  LevyGrid grid;
  double mean = 0.0;
  std::map<int, WPKernel> kernels; // q >= 1 only

  double second_moment() const;
};

// I_q(f) I_p(g) = sum_{r,s} r! s! C(p,r) C(q,r) C(p-r,s) C(q-r,s)
//                 I_{q+p-2r-s}(f x_r^s g),   q, p <= 2
WPChaosVector product_expand_wp(const WPKernel& f, const WPKernel& g);

// exact sampler: per cell value is the compensated increment, per-cell
// multiple integrals via the recursion P_{m+1} = (zeta - m x) P_m - m mu
// P_{m-1}, products over distinct cells
std::vector<double> sample_wp(const WPKernel& f, std::size_t n_paths,
                              std::uint64_t seed, int threads = 1);
std::vector<double> sample_wp(const WPChaosVector& F, std::size_t n_paths,
                              std::uint64_t seed, int threads = 1);

// (1/q) E[sum_cells |x| |D_c X|^3 mu(c)] for X = I_q(f), q <= 2
MomentEstimate jump_term_estimate(const WPKernel& f, std::size_t n_paths,
                                  std::uint64_t seed, int threads = 1);

struct WPFourthMomentRow {
  double label = 0.0;
  double second_moment = 0.0; // q! |f|^2
  // flagged contraction norms |f x_r^s f|: (r, s) with 1 <= r < q when
  // s = 0, and r = 0, 1 <= s <= q otherwise
  std::vector<std::pair<std::string, double>> flagged;
  MomentEstimate fourth_moment; // E[X^4], -> 3 along accepted sequences
  double w1_vs_normal = 0.0;
  MomentEstimate dnorm_sq_sq;  // E[(|DX|^2)^2], -> q^2
  MomentEstimate jump_quartic; // E[int x^2 (D X)^4 dmu], -> 0

  double max_flagged() const;
};

std::vector<WPFourthMomentRow> wp_fourth_moment_report(
    const std::vector<WPKernel>& seq, std::size_t n_paths, std::uint64_t seed,
    int threads = 1);

} // namespace smlab
