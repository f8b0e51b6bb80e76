#pragma once

// Distance bounds linking a sample (X, Y = <DF,-DL^{-1}F>) to a reference
// law: the L1 / regressed / L2 estimates, the three-term moment bound, the
// law-characterization check, and trend verdicts along kernel ladders.

#include "smlab/laws.hpp"
#include "smlab/malliavin.hpp"
#include "smlab/stats.hpp"

#include <string>
#include <vector>

namespace smlab {

double w1_empirical(const std::vector<double>& samples,
                    const ReferenceLaw& law); // needs >= 1000 samples

// E[g*(Z)^2] under the reference law: Pearson closed form when available,
// quadrature against the density otherwise
double gz_second_moment(const ReferenceLaw& law);

struct BoundReport {
  std::string law_id;
  double k_used = 0.0;
  std::string k_source;
  double d_w_empirical = 0.0;
  double w1_allowance = 0.0;      // sampling noise of the empirical W1
  MomentEstimate np_l1;           // E|g*(X) - Y|
  MomentEstimate np_l1_regressed; // sum_b w_b |g*(center_b) - ghat_b|
  MomentEstimate np_l2_sq;        // same with squared gaps
  double np_l2 = 0.0;             // sqrt of the above
  bool sandwich_ok = false;       // d_w <= k (np_l1 + 3 stderr) + allowance
  bool jensen_ok = false;         // regressed <= raw + 2 joint stderr
};

BoundReport np_estimate(const ReferenceLaw& law, const GammaSamples& gamma,
                        double k, const std::string& k_source = "caller",
                        int bins = 50);

struct MomentBoundReport {
  MomentEstimate t1; // |E[g*(X)^2] - E[g_Z^2]|
  MomentEstimate t2; // |E[X G*(X)] - E[g_Z^2]|
  MomentEstimate t3; // |E[ghat(X)^2] - E[g_Z^2]|
  double gz_sq = 0.0;
  double value = 0.0; // k sqrt(t1 + t2 + t3)
};

MomentBoundReport moment_bound(const ReferenceLaw& law,
                               const GammaSamples& gamma, double k,
                               int bins = 50);

struct CharacterizationReport {
  double cond1 = 0.0, cond2 = 0.0, cond3 = 0.0;
  double tol1 = 0.0, tol2 = 0.0, tol3 = 0.0;
  bool verdict = false;
};

CharacterizationReport characterize(const ReferenceLaw& law,
                                    const GammaSamples& gamma,
                                    double n_sigmas = 4.0, int bins = 50);

// one rung of a kernel ladder, as estimated by the chaos / fbm samplers
struct LadderPoint {
  double label = 0.0; // e.g. number of cells n, or horizon T
  MomentEstimate m2, m3, m4;
  MomentEstimate var_g; // Var(|DX|^2/q) or a regressed equivalent
};

struct TrendLine {
  std::string what;
  double target = 0.0;
  double final_value = 0.0;
  double final_stderr = 0.0;
  bool pass = false;
};

struct TrendVerdict {
  std::string case_name;
  std::vector<TrendLine> lines;
  bool pass = false;
};

// convergence cases for a Pearson target: normal (alpha=beta=0),
// gamma (alpha=0), general (alpha != 0)
TrendVerdict pearson_convergence_check(const PearsonParams& pp,
                                       const std::vector<LadderPoint>& pts,
                                       double n_sigmas = 4.0);

// moment matching up to k = max(2m, m+2) when g* is a polynomial of degree m
TrendVerdict polynomial_gstar_check(const ReferenceLaw& law, int degree,
                                    const std::vector<std::vector<MomentEstimate>>& ladder_moments,
                                    double n_sigmas = 4.0);

} // namespace smlab
