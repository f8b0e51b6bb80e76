#ifndef SMLAB_STATS_HPP
#define SMLAB_STATS_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace smlab {

struct MomentEstimate {
  double value = 0.0;
  double stderr_ = 0.0; // standard error of the mean
};

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x); // unbiased

// Ê[x^p] with its standard error.
MomentEstimate raw_moment(const std::vector<double>& x, int p);

// Ê[f(x_i)] with standard error.
MomentEstimate mc_mean(const std::vector<double>& x,
                       const std::function<double(double)>& f);

// Bootstrap standard error of a statistic of the sample (block bootstrap
// not needed: draws are iid). Deterministic given seed.
double bootstrap_stderr(const std::vector<double>& x,
                        const std::function<double(const std::vector<double>&)>& stat,
                        int n_boot, std::uint64_t seed);

// Exact L1 distance between the empirical CDF of the sample and a reference
// CDF: integral of |F_n - Phi| over the whole line, computed segment by
// segment between order statistics (7-point Gauss with crossing splits) plus
// analytic-free tail integrals by adaptive quadrature.
double wasserstein1_empirical(std::vector<double> sample,
                              const std::function<double(double)>& cdf,
                              double support_lo, double support_hi);

} // namespace smlab

#endif
