#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "alphasqkd/protocol_sim.hpp"

namespace alphasqkd {

/// lambda(x, y) = (1 + sqrt((|x|^2-|y|^2)^2 + 4 Re^2<x|y>) / (|x|^2+|y|^2)) / 2,
/// given the squared norms and the real part of the inner product.
double lambda_fn(double norm_x_sq, double norm_y_sq, double re_inner);

struct Theorem1Pair {
  double norm_e_sq = 0.0;
  double norm_f_sq = 0.0;
  double re_inner = 0.0;
};

/// Conditional-entropy lower bound for a cq state built from (E_i, F_i) pairs:
///   sum_{i in J} ((nE+nF)/N) (H[nE/(nE+nF)] - H[lambda_i]).
double theorem1_bound(const std::vector<Theorem1Pair>& pairs, double N,
                      const std::vector<int>& subset);

/// Unobservable attack parameters the bound minimizes over.
struct HiddenParams {
  double q3 = 1.0;
  double e2_sq = 0.0;  // <e2|e2>
  double f3_sq = 0.0;  // <f3|f3>
};

struct GridSpec {
  int points = 64;
  int refine_passes = 1;
  // Optional tightening: clamp the adversarial Re<e0|e3> to Cauchy-Schwarz.
  // Off by default; the unclamped value only lowers the bound.
  bool clamp_cauchy_schwarz = false;
};

struct QValues {
  double q0 = 1.0;
  double q1 = 0.0;
  double q3_min = 1.0;
  bool assumption_clamped = false;  // pAB_a_1 < alpha^2 pAB_0_1 forced q3_min = 0
};

/// q0 = sqrt(pAB_0_0), q1 = sqrt(pAB_0_1), and the q3 lower bound
/// (sqrt(pAB_a_1) - alpha sqrt(pAB_0_1)) / beta clamped to [0,1].
QValues derive_qs(const ObservedStatistics& stats, double alpha);

/// {<g0>, <g1>, <g2>, <g3>} from the observable statistics.
std::array<double, 4> g_norms_from_stats(const ObservedStatistics& stats);

struct HiddenCaps {
  double e2_cap = 1.0;
  double f3_cap = 1.0;
  bool e2_degenerate = false;  // q3*beta ~ 0, cap unconstrained
  bool f3_degenerate = false;  // q2*beta ~ 0, cap unconstrained
};

/// Upper bounds on the hidden noise terms <e2|e2> and <f3|f3> at a given q3.
HiddenCaps hidden_noise_caps(const ObservedStatistics& stats, double alpha, double q3);

/// Re<g1|g3> = (pAA_a_R_0/p - <g1> - <g3>) / 2.
double re_g1g3_from_stats(const ObservedStatistics& stats);

/// The six-term Cauchy-Schwarz bound on |chi|.
double chi_abs_max(double alpha, double q0, double q1, double q2, double q3, double q_r,
                   double e2_sq, double f3_sq);

struct ReE0E3 {
  double value = 0.0;
  bool degenerate = false;  // q0 q3 alpha^2 beta^2 below threshold
};

/// Solves the reflection-statistic identity for Re<e0|e3> given chi.
ReE0E3 re_e0e3(const ObservedStatistics& stats, double alpha, double q0, double q3,
               double chi);

/// Lower bound on Re^2<e0|g0>: [max(0, q3 beta Re<e0|e3> - alpha sqrt(pAB_0_1)(1-Q_R))]^2.
double re2_e0g0_lower(const ObservedStatistics& stats, double alpha, double q3,
                      double re_e0e3_val, double q_r);

struct SymmetryCheck {
  bool ok = true;
  double q_r = 0.0;          // 1 - pAA_0_0_0 / p
  double max_deviation = 0.0;
};

/// Verifies the symmetric-statistics relations within an absolute tolerance.
SymmetryCheck check_symmetric(const ObservedStatistics& stats, double tol = 0.02);

struct SaeResult {
  double value = 0.0;
  HiddenParams argmin;
  long long evaluations = 0;
  bool infeasible = false;          // empty feasible grid
  bool assumption_clamped = false;
  bool degenerate = false;          // alpha in {0,1} or similar
};

/// Worst-case lower bound on S(A|E) over the hidden-parameter box.
/// Throws std::runtime_error when the statistics violate the symmetry
/// tolerance (asymmetric inputs would silently mis-evaluate otherwise).
SaeResult sae_lower(const ObservedStatistics& stats, double alpha,
                    const GridSpec& grid = {});

/// H(A|B) from the forward statistics alone.
double h_a_given_b(const ObservedStatistics& stats);

struct KeyRateReport {
  double alpha = 0.0;
  double p = 1.0;
  double sae_lower = 0.0;
  double hab = 0.0;
  double rate = 0.0;
  HiddenParams argmin;
  long long grid_points_evaluated = 0;
  bool infeasible = false;
  bool assumption_clamped = false;
};

KeyRateReport key_rate(const ObservedStatistics& stats, double alpha,
                       const GridSpec& grid = {});

}  // namespace alphasqkd
