#pragma once

#include <array>

namespace alphasqkd {

/// Joint distribution over (k_A, k_B, Eve's guess) for the intercept-resend
/// attack against the projective-measurement variant.  Index = 4*k_A + 2*k_B
/// + guess.
struct IRJoint {
  std::array<double, 8> p_abe{};

  double marginal_a(int k_a) const;
  void validate() const;
};

/// Distribution traced through the noiseless intercept-resend attack: Eve
/// measures the reverse channel in the {|a>, |a_bar>} basis and guesses 1 on
/// outcome |a>.
IRJoint ir_joint(double alpha);

struct IRRates {
  double h_a_given_e = 0.0;
  double h_a_given_b = 0.0;
  double rate = 0.0;
};

/// Eve's register is classical under this attack, so the Devetak-Winter rate
/// reduces to r = H(A|E) - H(A|B), Shannon quantities of the joint table.
IRRates ir_rates(double alpha);

double ir_key_rate(double alpha);

}  // namespace alphasqkd
