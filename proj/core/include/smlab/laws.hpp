#ifndef SMLAB_LAWS_HPP
#define SMLAB_LAWS_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smlab {

struct Support {
  double lo = 0.0; // may be -inf
  double hi = 0.0; // may be +inf
  bool full_line() const;
  bool finite() const;
  double width() const; // inf if unbounded
};

// g*(z) = alpha z^2 + beta z + gamma on the support.
struct PearsonParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

// A centered target law: mean zero, support (l,u) with l < 0 < u, density
// rho*, CDF Phi, and the Stein kernel g*(z) = int_z^u y rho(y) dy / rho(z).
struct ReferenceLaw {
  std::string name;
  std::map<std::string, double> params;
  Support support;

  std::function<double(double)> density;     // rho*, 0 outside support
  std::function<double(double)> cdf;         // Phi
  std::function<double(double)> ccdf;        // 1 - Phi, accurate in the tail
  std::function<double(double)> gstar;       // > 0 inside, 0 outside
  std::function<double(double)> gstar_prime; // closed form or central FD
  std::function<double(double)> g_tilde;     // smoothing for Assumption B

  double abs_mean = 0.0;  // E|Z|
  double variance = 0.0;  // E[Z^2]
  double scale = 1.0;     // grid scale unit (sqrt of variance)
  bool density_bounded = true;
  std::optional<PearsonParams> pearson;

  // antiderivative of g*, anchored at the lower endpoint when
  // int_l^0 g* is finite, otherwise at 0
  std::function<double(double)> Gstar;
};

// --- catalog -------------------------------------------------------------

// name in {normal, gamma, chi2_centered, exponential, beta, pearson4,
// student_t, inverse_gamma, uniform, pareto, laplace, lognormal}.
// Throws invalid_param for unknown names or out-of-range parameters.
ReferenceLaw catalog(const std::string& name,
                     const std::map<std::string, double>& params);

std::vector<std::string> catalog_names();

// --- kernel calculus -----------------------------------------------------

// int_z^u y rho(y) dy / rho(z), using the single-signed tail integral
// (left tail for z < 0) to avoid cancellation.
double gstar_from_density(const std::function<double(double)>& density,
                          const Support& support, double z);

// (E|Z| / (2 g*(z))) * exp(-int_0^z y/g*(y) dy)
double density_from_gstar(const std::function<double(double)>& gstar,
                          double abs_mean, const Support& support, double z);

// --- growth / assumption audits ------------------------------------------

struct GrowthSide {
  bool ok = false;           // truncated integral diverges toward the endpoint
  bool inconclusive = false;
  double final_value = 0.0;  // last truncated integral
  double slope = 0.0;        // fitted log-increment slope per halving
};

struct GrowthReport {
  GrowthSide left, right;
  bool pass() const { return left.ok && right.ok; }
};

// Tests int_l^0 y/g* = -inf and int_0^u y/g* = +inf by geometric
// truncation (40 halvings); divergence = magnitude escapes 1e3 or the
// per-step increments fail to decay.
GrowthReport check_growth(const std::function<double(double)>& gstar,
                          const Support& support);

struct AssumptionReport {
  bool A = false;
  bool B = false;
  bool Bprime = false;
  bool Bprime_applicable = false;
  std::vector<std::string> notes;
};

AssumptionReport check_assumptions(const ReferenceLaw& law);

// --- Pearson moment machinery ----------------------------------------------

// E[Z^r] by the recursion E[Z^{k+1}] = (k beta E[Z^k] + k gamma E[Z^{k-1}])
// / (1 - k alpha). Throws moment_undefined if a denominator is <= 0.
double pearson_moment(const PearsonParams& p, int r);

struct GzStats {
  double e_gz_sq = 0.0; // E[g*(Z)^2]
  double var_gz = 0.0;  // Var g*(Z)
};

GzStats pearson_gz_stats(const PearsonParams& p);

// --- grids, serialization ---------------------------------------------------

// n-point interior grid: excludes a 1e-4 relative margin at finite endpoints
// and clamps infinite sides at min(50 scale units, density floor 1e-290).
std::vector<double> interior_grid(const ReferenceLaw& law, int n);
std::pair<double, double> interior_range(const ReferenceLaw& law);

std::string law_to_record(const ReferenceLaw& law); // "name k1=v1 k2=v2"
ReferenceLaw law_from_record(const std::string& record);

// CSV with columns z, rho, Phi, gstar, Gstar
void export_curves_csv(const ReferenceLaw& law, const std::vector<double>& grid,
                       const std::string& path);

} // namespace smlab

#endif
