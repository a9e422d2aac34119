#pragma once

#include <array>
#include <cstdint>

#include "alphasqkd/qmath.hpp"

namespace alphasqkd {

/// Public protocol parameters.  q (Bob's measure-resend probability) is kept
/// for documentation; the exact conditional statistics do not depend on it.
struct ProtocolParams {
  double alpha = 0.0;
  double beta = 1.0;  // sqrt(1 - alpha^2)
  double p = 1.0;     // POVM scale, in (0, 1/(1+alpha)]
  double q = 0.9;

  static ProtocolParams make(double alpha, double p, double q = 0.9);
};

/// Largest POVM scale keeping Lambda_? positive semi-definite.
double max_povm_scale(double alpha);

/// {Lambda_0, Lambda_a, Lambda_?} on the qubit space.
std::array<Operator, 3> povm_elements(double alpha, double p);

/// Eve's restricted collective attack: a forward isometry
///   F|0> = q0|0,0> + q1|1,e>,  F|1> = q2|0,f> + q3|1,0>,
/// plus a reverse unitary on the transit-qubit x ancilla space.
struct RestrictedAttack {
  double q0 = 1.0, q1 = 0.0, q2 = 0.0, q3 = 1.0;
  StateVector e_vec, f_vec;  // unit vectors in the ancilla space
  Operator u_reverse;        // unitary on (2 x d_E)

  Eigen::Index ancilla_dim() const { return e_vec.dim(); }
  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

/// The e_i / f_i decomposition of the reverse unitary:
///   U|0,0> = |0,e0> + |1,e1>,   U|1,0> = |0,e2> + |1,e3>,
///   U|1,e> = |0,f0> + |1,f1>,   U|0,f> = |0,f2> + |1,f3>.
struct ReverseVectors {
  std::array<StateVector, 4> e;
  std::array<StateVector, 4> f;
};
ReverseVectors derive_reverse_vectors(const RestrictedAttack& attack);

/// g0 = q1*a*f1 + q3*b*e3, g1 = q1*a*f0 + q3*b*e2,
/// g2 = q0*a*e1 + q2*b*f3, g3 = q0*a*e0 + q2*b*f2.
std::array<StateVector, 4> g_vectors(const RestrictedAttack& attack,
                                     const ProtocolParams& params);

/// Every probability Alice and Bob can estimate.  pAA entries carry the POVM
/// factor p, matching their raw definitions; consumers divide by p.
struct ObservedStatistics {
  double pAB_0_0 = 1.0, pAB_0_1 = 0.0;
  double pAB_a_0 = 0.0, pAB_a_1 = 1.0;
  double pAA_0_0_0 = 0.0, pAA_0_1_0 = 0.0;
  double pAA_a_0_0 = 0.0, pAA_a_1_0 = 0.0;
  double pAA_a_0_a = 0.0, pAA_a_1_a = 0.0;
  double pAA_a_R_a = 0.0, pAA_a_R_0 = 0.0;
  double p = 1.0;

  void validate() const;
};

ObservedStatistics simulate_statistics(const RestrictedAttack& attack,
                                       const ProtocolParams& params);

/// Ground-truth oracle: the post-protocol cq state and its exact entropies.
struct ExactOracle {
  Operator rho_abe;  // factors (A:2, B:2, E:d_E)
  double sae_exact = 0.0;
  double hab_exact = 0.0;
};
ExactOracle build_rho_abe(const RestrictedAttack& attack, const ProtocolParams& params);

RestrictedAttack identity_attack(Eigen::Index d_e);

/// Seeded random attack; same seed, same attack.
RestrictedAttack random_attack(Eigen::Index d_e, std::uint64_t seed);

/// Random attack whose simulated statistics satisfy the symmetric-noise
/// relations exactly (reverse unitary of the form (cos t I - i sin t X) x A).
RestrictedAttack random_symmetric_attack(Eigen::Index d_e, std::uint64_t seed);

}  // namespace alphasqkd
