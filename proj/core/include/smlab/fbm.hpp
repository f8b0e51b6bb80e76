#pragma once

// Fractional Gaussian noise lab: exact stationary simulation via circulant
// embedding (Cholesky fallback), the subordinated quadratic functional of
// the increment field, its moment ladder toward the centered chi-square(1)
// targets, and the long-horizon covariance scaling probes.

#include "smlab/stats.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace smlab {

inline constexpr int kMaxFgnSteps = 1 << 14;

// stationary autocovariance of unit fBm increments,
// C(t) = (|t+1|^{2H} + |t-1|^{2H} - 2|t|^{2H}) / 2, C(0) = 1
double fgn_covariance(double hurst, double t);

// sum_{s,t < n} C(s - t) / n^{2H}; identically 1 since the double sum
// telescopes to Var(B^H_n) = n^{2H}
double fgn_covariance_constant(double hurst, int n);

// row-major paths x n matrix of stationary fGn; exact in distribution.
// force_cholesky switches off the FFT route (n <= 1024 there).
std::vector<double> simulate_fgn(double hurst, int n, std::size_t n_paths,
                                 std::uint64_t seed, int threads = 1,
                                 bool force_cholesky = false);

// coefficients c_q = E[H_q(Z) f(Z)] / q! for q = 0..max_q
std::vector<double> hermite_coeffs(const std::function<double(double)>& f,
                                   int max_q);

struct SubordinatedFunctional {
  std::function<double(double)> f;
  double c1 = 0.0;     // E[Z f(Z)], must be nonzero
  double mean_f = 0.0; // E[f(Z)]
};

SubordinatedFunctional make_functional(const std::function<double(double)>& f,
                                       int max_q = 8);

// per path: H_T = T^{-H} sum_s (f(X_s) - mean_f); the squared statistic is
// normalized by Sigma^2 = c1^2 * kappa_T with kappa_T the covariance
// constant above, then centered with the ensemble mean
struct FunctionalSample {
  std::vector<double> f_tilde; // (H_T / Sigma)^2 per path
  std::vector<double> f_t;     // centered: f_tilde - ensemble mean
  double sigma_sq = 0.0;
  double center = 0.0; // ensemble mean of f_tilde, biased O(1/paths)
};

FunctionalSample functional_FT(const std::vector<double>& paths, int n,
                               const SubordinatedFunctional& f, double hurst);

struct LadderRow {
  int t_steps = 0;
  MomentEstimate m2, m3, m4; // bootstrap stderr
  double center = 0.0;
};

struct FbmConfig {
  double hurst = 0.7;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0;
  int threads = 1;
  int n_boot = 200;
};

// streaming over path blocks; memory stays O(paths), not O(paths * T)
std::vector<LadderRow> moment_ladder(const FbmConfig& cfg,
                                     const SubordinatedFunctional& f,
                                     const std::vector<int>& t_list);

// L(T) = T^{-PH} int over [0,T]^P of prod |C(s_i - s_j)|^{e_ij}, by plain
// MC with a pinned seed; slope of log L against log T
struct ScalingProbe {
  std::vector<double> t_list;
  std::vector<double> l_values;
  double slope = 0.0;
  double envelope = 0.0; // -(1 - H)(2S - P)
};

ScalingProbe lt_scaling_probe(double hurst, int p,
                              const std::vector<std::pair<std::pair<int, int>, double>>& exponents,
                              const std::vector<double>& t_list,
                              std::size_t n_points = 200000,
                              std::uint64_t seed = 1);

} // namespace smlab
