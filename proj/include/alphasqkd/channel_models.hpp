#pragma once

#include "alphasqkd/protocol_sim.hpp"

namespace alphasqkd {

/// Depolarization parameters for the forward, reverse, and loop channels.
struct NoisePoint {
  double q_f = 0.0;
  double q_r = 0.0;
  double q_x = 0.0;

  void validate() const;
};

/// Statistics of a symmetric attack realized through depolarization channels,
/// E_Q(rho) = (1-2Q) rho + Q I.  Passing p <= 0 selects the maximal scale
/// 1/(1+alpha).
ObservedStatistics depolarize_statistics(double alpha, const NoisePoint& noise,
                                         double p = 0.0);

}  // namespace alphasqkd
