#include "alphasqkd/channel_models.hpp"

#include <cmath>
#include <stdexcept>

namespace alphasqkd {

void NoisePoint::validate() const {
  for (double q : {q_f, q_r, q_x})
    if (q < 0.0 || q > 0.5)
      throw std::invalid_argument("depolarization parameter must lie in [0, 0.5]");
}

ObservedStatistics depolarize_statistics(double alpha, const NoisePoint& noise, double p) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  noise.validate();
  if (p <= 0.0) p = max_povm_scale(alpha);
  if (p > max_povm_scale(alpha) + 1e-12)
    throw std::invalid_argument("POVM scale must not exceed 1/(1+alpha)");

  const double a2 = alpha * alpha;
  const double b2 = 1.0 - a2;

  ObservedStatistics st;
  st.p = p;
  st.pAB_0_0 = 1.0 - noise.q_f;
  st.pAB_0_1 = noise.q_f;
  st.pAB_a_0 = (1.0 - 2.0 * noise.q_f) * a2 + noise.q_f;
  st.pAB_a_1 = (1.0 - 2.0 * noise.q_f) * b2 + noise.q_f;

  st.pAA_0_0_0 = p * (1.0 - noise.q_r);
  st.pAA_0_1_0 = p * noise.q_r;
  st.pAA_a_0_0 = p * (1.0 - noise.q_r);
  st.pAA_a_1_0 = p * noise.q_r;
  st.pAA_a_0_a = p * ((1.0 - 2.0 * noise.q_r) * a2 + noise.q_r);
  st.pAA_a_1_a = p * ((1.0 - 2.0 * noise.q_r) * b2 + noise.q_r);

  st.pAA_a_R_a = p * (1.0 - noise.q_x);
  st.pAA_a_R_0 = p * ((1.0 - 2.0 * noise.q_x) * a2 + noise.q_x);

  st.validate();
  return st;
}

}  // namespace alphasqkd
