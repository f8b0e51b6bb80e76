#ifndef SMLAB_QUAD_HPP
#define SMLAB_QUAD_HPP

#include <functional>
#include <limits>

namespace smlab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive integration of f over (a, b); either endpoint may be infinite.
// Integrable endpoint singularities on finite intervals are handled.
// Throws numeric_failure if the requested relative tolerance is not reached.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

// Fixed-order Gauss-Legendre on [a,b], no adaptivity. Cheap; exact for
// polynomials of degree < 2*points. points in {7, 15, 31}.
double gauss_fixed(const std::function<double(double)>& f, double a, double b,
                   unsigned points = 15);

// Nodes/weights of the n-point Gauss-Legendre rule on (0,1).
void gauss_legendre_01(unsigned n, double* nodes, double* weights);

} // namespace smlab

#endif
