#include "alphasqkd/keyrate_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alphasqkd {

namespace {

constexpr double kDegenerateFloor = 1e-12;
constexpr double kDenomFloor = 1e-14;

double sqrt_clamped(double x) {
  if (x < -1e-12) throw std::invalid_argument("negative radicand in chi bound");
  return std::sqrt(std::max(0.0, x));
}

// Same formula as lambda_fn but tolerant of Cauchy-Schwarz violations: the
// inner product is clamped to the feasible range, capping lambda at 1.  Used
// only inside the worst-case minimization where an over-large adversarial
// candidate must not abort the scan.
double lambda_clamped(double nx, double ny, double re_inner) {
  const double s = nx + ny;
  if (s <= 0.0) return 0.5;
  const double re2 = std::min(re_inner * re_inner, nx * ny);
  const double lam = 0.5 * (1.0 + std::sqrt((nx - ny) * (nx - ny) + 4.0 * re2) / s);
  return std::clamp(lam, 0.5, 1.0);
}

double extract_q_r(const ObservedStatistics& stats) {
  return std::clamp(1.0 - stats.pAA_0_0_0 / stats.p, 0.0, 1.0);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (hi < lo) hi = lo;
  if (n < 2 || hi - lo < 1e-15) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo + i * step;
  out.back() = hi;
  return out;
}

}  // namespace

double lambda_fn(double norm_x_sq, double norm_y_sq, double re_inner) {
  if (norm_x_sq < 0.0 || norm_y_sq < 0.0)
    throw std::invalid_argument("lambda_fn: negative squared norm");
  const double s = norm_x_sq + norm_y_sq;
  if (s <= 0.0) throw std::invalid_argument("lambda_fn: both norms zero");
  if (re_inner * re_inner > norm_x_sq * norm_y_sq + 1e-12)
    throw std::invalid_argument("lambda_fn: inner product violates Cauchy-Schwarz");
  return lambda_clamped(norm_x_sq, norm_y_sq, re_inner);
}

double theorem1_bound(const std::vector<Theorem1Pair>& pairs, double N,
                      const std::vector<int>& subset) {
  if (N <= 0.0) throw std::invalid_argument("theorem1_bound: N must be positive");
  double total = 0.0;
  for (const Theorem1Pair& pr : pairs) total += pr.norm_e_sq + pr.norm_f_sq;
  if (std::abs(total - N) > 1e-9)
    throw std::invalid_argument("theorem1_bound: N does not match the pair norms");

  double bound = 0.0;
  for (int i : subset) {
    if (i < 0 || i >= static_cast<int>(pairs.size()))
      throw std::invalid_argument("theorem1_bound: subset index out of range");
    const Theorem1Pair& pr = pairs[i];
    const double w = pr.norm_e_sq + pr.norm_f_sq;
    if (w <= 1e-15) continue;
    const double lam = lambda_fn(pr.norm_e_sq, pr.norm_f_sq, pr.re_inner);
    bound += (w / N) * (binary_entropy(pr.norm_e_sq / w) - binary_entropy(lam));
  }
  return bound;
}

QValues derive_qs(const ObservedStatistics& stats, double alpha) {
  const double beta_sq = 1.0 - alpha * alpha;
  if (beta_sq <= kDegenerateFloor)
    throw std::invalid_argument("derive_qs: beta must be positive");
  const double beta = std::sqrt(beta_sq);

  QValues qs;
  qs.q0 = std::sqrt(stats.pAB_0_0);
  qs.q1 = std::sqrt(stats.pAB_0_1);
  if (stats.pAB_a_1 + 1e-12 < alpha * alpha * stats.pAB_0_1) {
    // Assumption of the q3 quadratic violated; widening the feasible set to
    // q3 >= 0 only lowers the minimum, so the bound stays sound.
    qs.q3_min = 0.0;
    qs.assumption_clamped = true;
  } else {
    qs.q3_min =
        std::max(0.0, (std::sqrt(stats.pAB_a_1) - alpha * std::sqrt(stats.pAB_0_1)) / beta);
  }
  return qs;
}

std::array<double, 4> g_norms_from_stats(const ObservedStatistics& stats) {
  const double p = stats.p;
  return {
      stats.pAB_a_1 * (1.0 - stats.pAA_a_1_0 / p),  // <g0>
      stats.pAB_a_1 * (stats.pAA_a_1_0 / p),        // <g1>
      stats.pAB_a_0 * (1.0 - stats.pAA_a_0_0 / p),  // <g2>
      stats.pAB_a_0 * (stats.pAA_a_0_0 / p),        // <g3>
  };
}

HiddenCaps hidden_noise_caps(const ObservedStatistics& stats, double alpha, double q3) {
  const double beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  const double q_r = extract_q_r(stats);
  const double q0 = std::sqrt(stats.pAB_0_0);
  const double q1 = std::sqrt(stats.pAB_0_1);
  const double q2 = std::sqrt(std::max(0.0, 1.0 - q3 * q3));

  HiddenCaps caps;
  if (q3 * beta <= 1e-12) {
    caps.e2_degenerate = true;
  } else {
    const double s =
        (q1 * alpha * std::sqrt(q_r) + std::sqrt(stats.pAB_a_1 * q_r)) / (q3 * beta);
    caps.e2_cap = std::clamp(s * s, 0.0, 1.0);
  }
  if (q2 * beta <= 1e-12) {
    caps.f3_degenerate = true;
  } else {
    const double s =
        (q0 * alpha * std::sqrt(q_r) + std::sqrt(stats.pAB_a_0 * q_r)) / (q2 * beta);
    caps.f3_cap = std::clamp(s * s, 0.0, 1.0);
  }
  return caps;
}

double re_g1g3_from_stats(const ObservedStatistics& stats) {
  const auto g = g_norms_from_stats(stats);
  return 0.5 * (stats.pAA_a_R_0 / stats.p - g[1] - g[3]);
}

double chi_abs_max(double alpha, double q0, double q1, double q2, double q3, double q_r,
                   double e2_sq, double f3_sq) {
  const double b = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  const double a = alpha;
  const double a2b2 = a * a * b * b;
  const double ab3 = a * b * b * b;
  return q0 * q1 * a * a * a * b                       // (1-Q_R) + Q_R = 1
         + q0 * q3 * a2b2 * sqrt_clamped(q_r * e2_sq)
         + q1 * q2 * a2b2 * sqrt_clamped(q_r * f3_sq)
         + q1 * q2 * a2b2 * sqrt_clamped((1.0 - q_r) * (1.0 - f3_sq))
         + q2 * q3 * ab3 * sqrt_clamped(e2_sq * f3_sq)
         + q2 * q3 * ab3 * sqrt_clamped((1.0 - e2_sq) * (1.0 - f3_sq));
}

ReE0E3 re_e0e3(const ObservedStatistics& stats, double alpha, double q0, double q3,
               double chi) {
  const double beta_sq = 1.0 - alpha * alpha;
  ReE0E3 out;
  const double denom = q0 * q3 * alpha * alpha * beta_sq;
  if (denom <= kDenomFloor) {
    out.degenerate = true;
    return out;
  }
  const double stat_term =
      (stats.pAA_a_R_a - stats.pAB_a_0 * stats.pAA_a_0_a - stats.pAB_a_1 * stats.pAA_a_1_a) /
      (2.0 * stats.p);
  out.value =
      (stat_term - (alpha * alpha - beta_sq) * re_g1g3_from_stats(stats) - chi) / denom;
  return out;
}

double re2_e0g0_lower(const ObservedStatistics& stats, double alpha, double q3,
                      double re_e0e3_val, double q_r) {
  const double beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  const double v = std::max(
      0.0, q3 * beta * re_e0e3_val - alpha * std::sqrt(stats.pAB_0_1) * (1.0 - q_r));
  return v * v;
}

SymmetryCheck check_symmetric(const ObservedStatistics& stats, double tol) {
  SymmetryCheck sym;
  sym.q_r = extract_q_r(stats);
  const double p = stats.p;
  const double dev[] = {std::abs(stats.pAA_0_1_0 / p - sym.q_r),
                        std::abs(stats.pAA_a_0_0 / p - (1.0 - sym.q_r)),
                        std::abs(stats.pAA_a_1_0 / p - sym.q_r)};
  sym.max_deviation = std::max({dev[0], dev[1], dev[2]});
  sym.ok = sym.max_deviation <= tol;
  return sym;
}

namespace {

struct BoundContext {
  const ObservedStatistics* stats;
  double alpha, beta;
  double q0, q1, q_r;
  double n_e, n_f;      // the Theorem-1 pair norms: q0^2 <e0> and <g0>
  double h_first;       // H[n_e / (n_e + n_f)]
  double stat_term;     // (pAA_a_R_a - pAB_a_0 pAA_a_0_a - pAB_a_1 pAA_a_1_a) / 2p
  double re_g1g3;
  bool clamp_cs;
};

double evaluate_candidate(const BoundContext& ctx, double q3, double e2_sq, double f3_sq) {
  const double q2 = std::sqrt(std::max(0.0, 1.0 - q3 * q3));
  const double chi =
      chi_abs_max(ctx.alpha, ctx.q0, ctx.q1, q2, q3, ctx.q_r, e2_sq, f3_sq);

  const double a2 = ctx.alpha * ctx.alpha;
  const double b2 = 1.0 - a2;
  const double denom = ctx.q0 * q3 * a2 * b2;
  if (denom <= kDenomFloor) return 0.0;  // Eve unconstrained; 0 is the sound floor

  // Adversarial chi sign: the bound decreases with Re<e0|e3>, so subtracting
  // the full |chi| bound is the worst case.
  double ree = (ctx.stat_term - (a2 - b2) * ctx.re_g1g3 - chi) / denom;
  if (ctx.clamp_cs) {
    const double cs = std::sqrt(std::max(0.0, (1.0 - ctx.q_r) * (1.0 - e2_sq)));
    ree = std::clamp(ree, -cs, cs);
  }

  const double re2 = re2_e0g0_lower(*ctx.stats, ctx.alpha, q3, ree, ctx.q_r);
  const double re_inner = ctx.q0 * std::sqrt(re2);
  const double lam = lambda_clamped(ctx.n_e, ctx.n_f, re_inner);
  const double term =
      0.5 * (ctx.n_e + ctx.n_f) * (ctx.h_first - binary_entropy(lam));
  return std::max(0.0, term);
}

/// Scans a q3 window (with per-q3 e2/f3 windows intersected with the caps)
/// and folds the minimum into `result`.
void scan_box(const BoundContext& ctx, double q3_lo, double q3_hi,
              const HiddenParams* center, double de2, double df3, int n,
              SaeResult& result) {
  for (double q3 : linspace(q3_lo, q3_hi, n)) {
    const HiddenCaps caps = hidden_noise_caps(*ctx.stats, ctx.alpha, q3);
    double e2_lo = 0.0, e2_hi = caps.e2_cap;
    double f3_lo = 0.0, f3_hi = caps.f3_cap;
    if (center != nullptr) {
      e2_lo = std::clamp(center->e2_sq - de2, 0.0, caps.e2_cap);
      e2_hi = std::clamp(center->e2_sq + de2, 0.0, caps.e2_cap);
      f3_lo = std::clamp(center->f3_sq - df3, 0.0, caps.f3_cap);
      f3_hi = std::clamp(center->f3_sq + df3, 0.0, caps.f3_cap);
    }
    for (double e2 : linspace(e2_lo, e2_hi, n)) {
      for (double f3 : linspace(f3_lo, f3_hi, n)) {
        const double candidate = evaluate_candidate(ctx, q3, e2, f3);
        ++result.evaluations;
        if (candidate < result.value) {
          result.value = candidate;
          result.argmin = {q3, e2, f3};
        }
      }
    }
  }
}

}  // namespace

SaeResult sae_lower(const ObservedStatistics& stats, double alpha, const GridSpec& grid) {
  stats.validate();
  if (grid.points < 2) throw std::invalid_argument("grid must have at least 2 points per axis");

  SaeResult result;
  const double beta_sq = 1.0 - alpha * alpha;
  if (alpha <= kDegenerateFloor || beta_sq <= kDegenerateFloor) {
    // alpha = 0: Eve may set <e0|e3> arbitrarily, the protocol is classical
    // and insecure.  alpha = 1: the pair denominators vanish the same way.
    result.degenerate = true;
    return result;
  }

  const SymmetryCheck sym = check_symmetric(stats);
  if (!sym.ok)
    throw std::runtime_error("statistics violate the symmetric-noise tolerance");

  const QValues qs = derive_qs(stats, alpha);
  result.assumption_clamped = qs.assumption_clamped;
  if (qs.q3_min > 1.0 + 1e-12) {
    result.infeasible = true;
    return result;
  }
  const double q3_min = std::min(qs.q3_min, 1.0);

  BoundContext ctx;
  ctx.stats = &stats;
  ctx.alpha = alpha;
  ctx.beta = std::sqrt(beta_sq);
  ctx.q0 = qs.q0;
  ctx.q1 = qs.q1;
  ctx.q_r = sym.q_r;
  ctx.clamp_cs = grid.clamp_cauchy_schwarz;

  const auto g = g_norms_from_stats(stats);
  ctx.n_e = stats.pAB_0_0 * (1.0 - sym.q_r);
  ctx.n_f = g[0];
  if (ctx.n_e + ctx.n_f <= 1e-15) return result;  // empty pair contributes 0
  ctx.h_first = binary_entropy(ctx.n_e / (ctx.n_e + ctx.n_f));
  ctx.stat_term =
      (stats.pAA_a_R_a - stats.pAB_a_0 * stats.pAA_a_0_a - stats.pAB_a_1 * stats.pAA_a_1_a) /
      (2.0 * stats.p);
  ctx.re_g1g3 = re_g1g3_from_stats(stats);

  result.value = std::numeric_limits<double>::infinity();
  scan_box(ctx, q3_min, 1.0, nullptr, 0.0, 0.0, grid.points, result);

  const double dq3 = (1.0 - q3_min) / std::max(1, grid.points - 1);
  for (int pass = 0; pass < grid.refine_passes; ++pass) {
    const HiddenParams center = result.argmin;
    const HiddenCaps caps = hidden_noise_caps(stats, alpha, center.q3);
    const double de2 = caps.e2_cap / std::max(1, grid.points - 1);
    const double df3 = caps.f3_cap / std::max(1, grid.points - 1);
    scan_box(ctx, std::max(q3_min, center.q3 - dq3), std::min(1.0, center.q3 + dq3),
             &center, std::max(de2, 1e-9), std::max(df3, 1e-9), grid.points, result);
  }

  if (!std::isfinite(result.value)) {
    result.value = 0.0;
    result.infeasible = true;
  }
  return result;
}

double h_a_given_b(const ObservedStatistics& stats) {
  const double joint[4] = {0.5 * stats.pAB_0_0, 0.5 * stats.pAB_0_1, 0.5 * stats.pAB_a_1,
                           0.5 * stats.pAB_a_0};
  return shannon_entropy(joint) - binary_entropy(0.5 * (stats.pAB_0_0 + stats.pAB_a_0));
}

KeyRateReport key_rate(const ObservedStatistics& stats, double alpha, const GridSpec& grid) {
  const SaeResult sae = sae_lower(stats, alpha, grid);
  KeyRateReport report;
  report.alpha = alpha;
  report.p = stats.p;
  report.sae_lower = sae.value;
  report.hab = h_a_given_b(stats);
  report.rate = report.sae_lower - report.hab;
  report.argmin = sae.argmin;
  report.grid_points_evaluated = sae.evaluations;
  report.infeasible = sae.infeasible;
  report.assumption_clamped = sae.assumption_clamped;
  return report;
}

}  // namespace alphasqkd
