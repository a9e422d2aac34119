#include "alphasqkd/ir_analysis.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "alphasqkd/qmath.hpp"

namespace alphasqkd {

double IRJoint::marginal_a(int k_a) const {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += p_abe[4 * k_a + i];
  return s;
}

void IRJoint::validate() const {
  double sum = 0.0;
  for (double v : p_abe) {
    if (v < 0.0) throw std::invalid_argument("IR joint entry must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("IR joint must sum to 1");
  if (std::abs(marginal_a(0) - 0.5) > 1e-12)
    throw std::invalid_argument("IR joint k_A marginal must be uniform");
}

IRJoint ir_joint(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  const double a2 = alpha * alpha;
  const double b2 = 1.0 - a2;

  // Branch tree: A sends |0> or |a> with weight 1/2; B's Z outcome k_B has
  // probability |<k_B|psi>|^2; Eve measures the resent |k_B> in the A basis
  // and guesses 1 on outcome |a>, which occurs with probability
  // |<a|k_B>|^2 (alpha^2 for k_B = 0, beta^2 for k_B = 1).
  IRJoint joint;
  auto set = [&joint](int ka, int kb, int guess, double prob) {
    joint.p_abe[4 * ka + 2 * kb + guess] = prob;
  };
  // k_A = 0, send |0>: k_B = 0 with certainty.
  set(0, 0, 1, 0.5 * a2);
  set(0, 0, 0, 0.5 * (1.0 - a2));
  // k_A = 1, send |a>.
  set(1, 0, 1, 0.5 * a2 * a2);
  set(1, 0, 0, 0.5 * a2 * (1.0 - a2));
  set(1, 1, 1, 0.5 * b2 * b2);
  set(1, 1, 0, 0.5 * b2 * (1.0 - b2));

  joint.validate();
  return joint;
}

IRRates ir_rates(double alpha) {
  const IRJoint joint = ir_joint(alpha);

  auto conditional = [&](int partner_bit) {
    // H(A|X) where X is either k_B (partner_bit picks stride 2) or Eve's
    // guess (stride 1).
    double h = 0.0;
    for (int x = 0; x < 2; ++x) {
      double px = 0.0;
      double pax[2] = {0.0, 0.0};
      for (int ka = 0; ka < 2; ++ka)
        for (int other = 0; other < 2; ++other) {
          const int kb = (partner_bit == 0) ? x : other;
          const int guess = (partner_bit == 0) ? other : x;
          const double v = joint.p_abe[4 * ka + 2 * kb + guess];
          px += v;
          pax[ka] += v;
        }
      if (px <= 1e-15) continue;
      h += px * binary_entropy(pax[0] / px);
    }
    return h;
  };

  IRRates rates;
  rates.h_a_given_b = conditional(0);
  rates.h_a_given_e = conditional(1);
  rates.rate = rates.h_a_given_e - rates.h_a_given_b;
  return rates;
}

double ir_key_rate(double alpha) { return ir_rates(alpha).rate; }

}  // namespace alphasqkd
