#pragma once

// Carre-du-champ machinery for smooth functionals of a finite standard
// Gaussian vector: the Ornstein-Uhlenbeck (Mehler) realization of -DL^{-1},
// the pathwise bridge variable Y = <DF, -DL^{-1}F>, and nonparametric
// estimation of g(x) = E[Y | F = x].

#include "smlab/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace smlab {

struct SmoothFunctional {
  int dim = 0;
  std::function<double(const std::vector<double>&)> eval;
  // optional analytic gradient; when absent a central finite difference is
  // used and the samples are flagged
  std::function<std::vector<double>(const std::vector<double>&)> grad;
  // > 0 declares that F lives in a single chaos of this order, enabling the
  // exact fast path y = |grad F|^2 / q
  int chaos_order = 0;
};

std::vector<double> gradient_of(const SmoothFunctional& F,
                                const std::vector<double>& xi);
// analytic gradient vs central differences on random points
bool check_gradient(const SmoothFunctional& F, std::uint64_t seed,
                    int n_points = 20, double rel_tol = 1e-5);

struct QuadratureSpec {
  int t_nodes = 32;     // Gauss-Legendre nodes on u = e^{-t} in (0,1)
  int inner_paths = 64; // antithetic Gaussian draws per node
};

// integral_0^1 E'[grad F(u xi + sqrt(1-u^2) xi')] du, the Mehler form of
// -DL^{-1}F evaluated at xi; on a chaos of order q this equals grad F / q
std::vector<double> minus_DL_inv(const SmoothFunctional& F,
                                 const std::vector<double>& xi,
                                 const QuadratureSpec& spec, Rng& rng);

struct GammaSamples {
  std::vector<double> x; // F per path
  std::vector<double> y; // <grad F, -DL^{-1}F> per path
  std::uint64_t seed = 0;
  QuadratureSpec spec;
  bool fd_gradient = false;
  bool fast_path = false;
};

GammaSamples gamma_draw(const SmoothFunctional& F, std::size_t n_paths,
                        std::uint64_t seed, QuadratureSpec spec = {},
                        int threads = 1);

struct BinnedRegression {
  std::vector<double> edges;   // bins+1 x-quantile boundaries
  std::vector<double> center;  // mean x per bin
  std::vector<double> ghat;    // mean y per bin
  std::vector<double> stderr_; // standard error of the bin mean
  std::vector<std::size_t> count;

  double operator()(double x) const; // piecewise constant, clamped ends
};

BinnedRegression conditional_regress(const GammaSamples& samples,
                                     int bins = 50);

void export_regression_csv(const BinnedRegression& reg,
                           const std::string& path);

} // namespace smlab
