#ifndef SMLAB_STEIN_HPP
#define SMLAB_STEIN_HPP

#include "smlab/laws.hpp"
#include "smlab/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace smlab {

struct TestFunction {
  std::function<double(double)> h;
  std::function<double(double)> h_prime; // a.e. derivative, 0 at kinks
  std::vector<double> knots;             // breakpoints for quadrature splits
  double lipschitz = 1.0;                // ||h||_L
  double sup_norm = 0.0;                 // ||h||_inf (0 = unknown/unbounded)
  std::string id;
};

// Piecewise-linear interpolant through (knots, values), constant outside the
// knot range (so ||h||_inf is finite).
TestFunction make_piecewise_linear(const std::vector<double>& knots,
                                   const std::vector<double>& values,
                                   const std::string& id = "pwl");

enum class TestFamily { wasserstein, fortet_mourier };

// Random piecewise-linear test function with unit family norm:
// wasserstein: ||h||_L = 1; fortet_mourier: ||h||_L + ||h||_inf = 1.
TestFunction random_test_function(Rng& rng, double lo, double hi, int n_knots,
                                  TestFamily family, const std::string& id);

struct SteinSolution {
  std::vector<double> grid;
  std::vector<double> f, f_prime, f_second; // f_second empty unless full line
  std::vector<double> residual;             // g* f' - x f - (h - m_h)
  std::vector<char> flagged;                // extended past g* rho underflow
  double m_h = 0.0;
  double sup_residual = 0.0;
  std::string law_id, h_id;
};

// Solves the Stein equation for (law, h) on an n-point interior grid
// (h knots merged in) via the two-sided CDF-weighted representation.
SteinSolution stein_solve(const ReferenceLaw& law, const TestFunction& h,
                          int grid_n = 400);

// Double-integral representation of f'(x), all factors by quadrature.
double f_prime_repr(const ReferenceLaw& law, const TestFunction& h, double x);

// f'' via the A/B representation; full-line supports only.
double f_second_repr(const ReferenceLaw& law, const TestFunction& h, double x);

// The sign-definite weights of the f'' representation.
double stein_A(const ReferenceLaw& law, double x);
double stein_B(const ReferenceLaw& law, double x);

struct SteinBoundReport {
  double k1_hat = 0.0;
  double k2_hat = 0.0; // 0 when not applicable (support not full line)
  int worst_index = -1;
  std::vector<double> per_h_k1;
  int grid_n = 0;
};

// Sweeps n_h random test functions of the family and reports the empirical
// derivative-bound constants.
SteinBoundReport bound_constant(const ReferenceLaw& law, TestFamily family,
                           int n_h = 50, int grid_n = 400,
                           std::uint64_t seed = 1, unsigned threads = 1);

void export_solution_csv(const SteinSolution& sol, const std::string& path);

} // namespace smlab

#endif
