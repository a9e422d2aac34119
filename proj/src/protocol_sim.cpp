#include "alphasqkd/protocol_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace alphasqkd {

namespace {

constexpr double kAttackTol = 1e-10;
constexpr double kEventFloor = 1e-12;  // conditioning events below this use the paper convention

StateVector slice_component(const Vec& full, Eigen::Index t, Eigen::Index d_e) {
  return StateVector(full.segment(t * d_e, d_e), {d_e});
}

}  // namespace

double max_povm_scale(double alpha) { return 1.0 / (1.0 + alpha); }

ProtocolParams ProtocolParams::make(double alpha, double p, double q) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  if (!(p > 0.0) || p > max_povm_scale(alpha) + 1e-12)
    throw std::invalid_argument("POVM scale must lie in (0, 1/(1+alpha)]");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0,1)");
  ProtocolParams params;
  params.alpha = alpha;
  params.beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  params.p = p;
  params.q = q;
  return params;
}

std::array<Operator, 3> povm_elements(double alpha, double p) {
  const Operator lam0 = Operator(p * outer(basis_ket(2, 0)).entries, {2});
  const Operator lama = Operator(p * outer(ket_a(alpha)).entries, {2});
  const Operator lamq =
      Operator(Mat::Identity(2, 2) - lam0.entries - lama.entries, {2});
  return {lam0, lama, lamq};
}

void RestrictedAttack::validate() const {
  const Eigen::Index d_e = ancilla_dim();
  if (d_e < 2) throw std::invalid_argument("attack ancilla dimension must be >= 2");
  if (q0 < 0 || q1 < 0 || q2 < 0 || q3 < 0)
    throw std::invalid_argument("attack amplitudes must be non-negative");
  if (std::abs(q0 * q0 + q1 * q1 - 1.0) > kAttackTol ||
      std::abs(q2 * q2 + q3 * q3 - 1.0) > kAttackTol)
    throw std::invalid_argument("attack amplitudes must satisfy q0^2+q1^2 = q2^2+q3^2 = 1");
  if (!e_vec.is_normalized(1e-10) || !f_vec.is_normalized(1e-10))
    throw std::invalid_argument("|e> and |f> must be unit vectors");
  if (f_vec.dim() != d_e || u_reverse.dim() != 2 * d_e)
    throw std::invalid_argument("attack component dimensions are inconsistent");

  // Isometry of the forward attack: <F0|F1> = q0 q2 <0|f> + q1 q3 <e|0> = 0.
  const Complex iso = q0 * q2 * f_vec.amps(0) + q1 * q3 * std::conj(e_vec.amps(0));
  if (std::abs(iso) > kAttackTol)
    throw std::invalid_argument("forward attack violates the isometry condition");

  const Mat& u = u_reverse.entries;
  if ((u.adjoint() * u - Mat::Identity(2 * d_e, 2 * d_e)).cwiseAbs().maxCoeff() > kAttackTol)
    throw std::invalid_argument("reverse attack operator must be unitary");

  // Unitarity constraints on the derived vectors.
  const ReverseVectors rv = derive_reverse_vectors(*this);
  const Complex c1 = inner(rv.e[0], rv.e[2]) + inner(rv.e[1], rv.e[3]);
  const Complex c2 = inner(rv.f[0], rv.f[2]) + inner(rv.f[1], rv.f[3]);
  const Complex c3 = inner(rv.e[0], rv.f[0]) + inner(rv.e[1], rv.f[1]);
  const Complex c4 = inner(rv.e[2], rv.f[2]) + inner(rv.e[3], rv.f[3]);
  for (const Complex& c : {c1, c2, c3, c4})
    if (std::abs(c) > 1e-9)
      throw std::invalid_argument("derived reverse vectors violate unitarity constraints");
}

ReverseVectors derive_reverse_vectors(const RestrictedAttack& attack) {
  const Eigen::Index d_e = attack.ancilla_dim();
  const Mat& u = attack.u_reverse.entries;
  if ((u.adjoint() * u - Mat::Identity(2 * d_e, 2 * d_e)).cwiseAbs().maxCoeff() > kAttackTol)
    throw std::invalid_argument("reverse attack operator must be unitary");

  auto apply = [&](Eigen::Index t, const Vec& anc) {
    Vec in = Vec::Zero(2 * d_e);
    in.segment(t * d_e, d_e) = anc;
    return Vec(u * in);
  };

  Vec zero_anc = Vec::Zero(d_e);
  zero_anc(0) = 1.0;

  const Vec u00 = apply(0, zero_anc);
  const Vec u10 = apply(1, zero_anc);
  const Vec u1e = apply(1, attack.e_vec.amps);
  const Vec u0f = apply(0, attack.f_vec.amps);

  ReverseVectors rv;
  rv.e[0] = slice_component(u00, 0, d_e);
  rv.e[1] = slice_component(u00, 1, d_e);
  rv.e[2] = slice_component(u10, 0, d_e);
  rv.e[3] = slice_component(u10, 1, d_e);
  rv.f[0] = slice_component(u1e, 0, d_e);
  rv.f[1] = slice_component(u1e, 1, d_e);
  rv.f[2] = slice_component(u0f, 0, d_e);
  rv.f[3] = slice_component(u0f, 1, d_e);
  return rv;
}

std::array<StateVector, 4> g_vectors(const RestrictedAttack& attack,
                                     const ProtocolParams& params) {
  const ReverseVectors rv = derive_reverse_vectors(attack);
  const double a = params.alpha;
  const double b = params.beta;
  return {
      add(scale(attack.q1 * a, rv.f[1]), scale(attack.q3 * b, rv.e[3])),  // g0
      add(scale(attack.q1 * a, rv.f[0]), scale(attack.q3 * b, rv.e[2])),  // g1
      add(scale(attack.q0 * a, rv.e[1]), scale(attack.q2 * b, rv.f[3])),  // g2
      add(scale(attack.q0 * a, rv.e[0]), scale(attack.q2 * b, rv.f[2])),  // g3
  };
}

void ObservedStatistics::validate() const {
  const double lo = -1e-10, hi = 1.0 + 1e-10;
  const double all[] = {pAB_0_0, pAB_0_1, pAB_a_0,   pAB_a_1,   pAA_0_0_0, pAA_0_1_0,
                        pAA_a_0_0, pAA_a_1_0, pAA_a_0_a, pAA_a_1_a, pAA_a_R_a, pAA_a_R_0};
  for (double v : all)
    if (v < lo || v > hi) throw std::invalid_argument("statistic outside [0,1]");
  if (std::abs(pAB_0_0 + pAB_0_1 - 1.0) > 1e-9 || std::abs(pAB_a_0 + pAB_a_1 - 1.0) > 1e-9)
    throw std::invalid_argument("forward statistics must be normalized");
  const double povm[] = {pAA_0_0_0, pAA_0_1_0, pAA_a_0_0, pAA_a_1_0,
                         pAA_a_0_a, pAA_a_1_a, pAA_a_R_a, pAA_a_R_0};
  for (double v : povm)
    if (v > p + 1e-10) throw std::invalid_argument("POVM statistic exceeds the scale p");
}

ObservedStatistics simulate_statistics(const RestrictedAttack& attack,
                                       const ProtocolParams& params) {
  attack.validate();
  const double a = params.alpha;
  const double b = params.beta;
  const double p = params.p;
  const ReverseVectors rv = derive_reverse_vectors(attack);
  const auto g = g_vectors(attack, params);

  ObservedStatistics st;
  st.p = p;
  st.pAB_0_0 = attack.q0 * attack.q0;
  st.pAB_0_1 = attack.q1 * attack.q1;

  // F|a> = |0>(q0 a|0> + q2 b|f>) + |1>(q1 a|e> + q3 b|0>)
  const Eigen::Index d_e = attack.ancilla_dim();
  StateVector zero_e = basis_ket(d_e, 0);
  const StateVector fa0 = add(scale(attack.q0 * a, zero_e), scale(attack.q2 * b, attack.f_vec));
  const StateVector fa1 = add(scale(attack.q1 * a, attack.e_vec), scale(attack.q3 * b, zero_e));
  st.pAB_a_0 = fa0.norm_sq();
  st.pAB_a_1 = fa1.norm_sq();

  // POVM statistics after Bob's collapse and Eve's reverse attack.  The
  // conditional values are independent of the conditioning amplitude as long
  // as the event has non-zero probability.
  st.pAA_0_0_0 = p * rv.e[0].norm_sq();
  const double q_r = 1.0 - rv.e[0].norm_sq();

  st.pAA_0_1_0 = (st.pAB_0_1 > kEventFloor) ? p * rv.f[0].norm_sq() : p * q_r;

  if (st.pAB_a_0 > kEventFloor) {
    st.pAA_a_0_0 = p * g[3].norm_sq() / st.pAB_a_0;
    st.pAA_a_0_a = p * add(scale(a, g[3]), scale(b, g[2])).norm_sq() / st.pAB_a_0;
  } else {
    st.pAA_a_0_0 = p * (1.0 - q_r);
    st.pAA_a_0_a = p * ((1.0 - 2.0 * q_r) * a * a + q_r);
  }

  if (st.pAB_a_1 > kEventFloor) {
    st.pAA_a_1_0 = p * g[1].norm_sq() / st.pAB_a_1;
    st.pAA_a_1_a = p * add(scale(a, g[1]), scale(b, g[0])).norm_sq() / st.pAB_a_1;
  } else {
    st.pAA_a_1_0 = p * q_r;
    st.pAA_a_1_a = p * ((1.0 - 2.0 * q_r) * b * b + q_r);
  }

  // Reflection: U_R F|a> = |0>(g1+g3) + |1>(g0+g2).
  const StateVector r0 = add(g[1], g[3]);
  const StateVector r1 = add(g[0], g[2]);
  st.pAA_a_R_0 = p * r0.norm_sq();
  st.pAA_a_R_a = p * add(scale(a, r0), scale(b, r1)).norm_sq();

  st.validate();
  return st;
}

ExactOracle build_rho_abe(const RestrictedAttack& attack, const ProtocolParams& params) {
  attack.validate();
  const Eigen::Index d_e = attack.ancilla_dim();
  const ReverseVectors rv = derive_reverse_vectors(attack);
  const auto g = g_vectors(attack, params);

  const Eigen::Index n = 4 * d_e;
  Mat rho = Mat::Zero(n, n);
  auto put = [&](int ka, int kb, double w, const StateVector& v) {
    const Eigen::Index off = (2 * ka + kb) * d_e;
    rho.block(off, off, d_e, d_e) += w * (v.amps * v.amps.adjoint());
  };

  const double w = 0.5;
  put(0, 0, w * attack.q0 * attack.q0, rv.e[0]);
  put(0, 0, w * attack.q0 * attack.q0, rv.e[1]);
  put(0, 1, w * attack.q1 * attack.q1, rv.f[0]);
  put(0, 1, w * attack.q1 * attack.q1, rv.f[1]);
  put(1, 0, w, g[3]);
  put(1, 0, w, g[2]);
  put(1, 1, w, g[1]);
  put(1, 1, w, g[0]);

  ExactOracle oracle;
  oracle.rho_abe = Operator(std::move(rho), {2, 2, d_e});
  const double tr = oracle.rho_abe.trace_real();
  if (std::abs(tr - 1.0) > 1e-6)
    throw std::runtime_error("rho_ABE trace deviates from 1; attack inputs inconsistent");

  const Operator rho_ae = partial_trace(oracle.rho_abe, {0, 2});
  oracle.sae_exact = conditional_entropy(rho_ae, {0}, {1});

  const double joint[4] = {0.5 * attack.q0 * attack.q0, 0.5 * attack.q1 * attack.q1,
                           0.5 * (g[2].norm_sq() + g[3].norm_sq()),
                           0.5 * (g[0].norm_sq() + g[1].norm_sq())};
  const double pb0 = joint[0] + joint[2];
  oracle.hab_exact = shannon_entropy(joint) - binary_entropy(pb0);
  return oracle;
}

RestrictedAttack identity_attack(Eigen::Index d_e) {
  RestrictedAttack attack;
  attack.q0 = attack.q3 = 1.0;
  attack.q1 = attack.q2 = 0.0;
  attack.e_vec = basis_ket(d_e, d_e - 1);
  attack.f_vec = basis_ket(d_e, d_e - 1);
  attack.u_reverse = identity_op({2, d_e});
  return attack;
}

namespace {

Vec random_unit_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v.normalize();
  return v;
}

Mat haar_unitary(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat ginibre(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) ginibre(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Mat> qr(ginibre);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so the distribution is Haar.
  for (Eigen::Index j = 0; j < n; ++j) {
    Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

/// Draws the forward-attack part (q values plus |e>, |f> satisfying the
/// isometry condition) into `attack`.
void draw_forward(RestrictedAttack& attack, Eigen::Index d_e, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int tries = 0; tries < 256; ++tries) {
    attack.q0 = unif(rng);
    attack.q3 = unif(rng);
    attack.q1 = std::sqrt(1.0 - attack.q0 * attack.q0);
    attack.q2 = std::sqrt(1.0 - attack.q3 * attack.q3);

    Vec e = random_unit_vector(d_e, rng);
    Vec f = random_unit_vector(d_e, rng);
    const double c02 = attack.q0 * attack.q2;
    const double c13 = attack.q1 * attack.q3;
    if (c02 > 1e-8) {
      // Pin <0|f> so that q0 q2 <0|f> + q1 q3 <e|0> = 0, then renormalize the tail.
      const Complex f0 = -c13 * std::conj(e(0)) / c02;
      if (std::abs(f0) > 0.95) continue;
      const double tail = std::sqrt(1.0 - std::norm(f0));
      Vec rest = f.segment(1, d_e - 1);
      if (rest.norm() < 1e-12) continue;
      rest *= tail / rest.norm();
      f(0) = f0;
      f.segment(1, d_e - 1) = rest;
    } else if (c13 > 1e-8) {
      // Forward condition reduces to <e|0> = 0.
      e(0) = 0.0;
      if (e.norm() < 1e-12) continue;
      e.normalize();
    }
    attack.e_vec = StateVector(e, {d_e});
    attack.f_vec = StateVector(f, {d_e});
    return;
  }
  throw std::runtime_error("failed to draw a feasible forward attack");
}

}  // namespace

RestrictedAttack random_attack(Eigen::Index d_e, std::uint64_t seed) {
  if (d_e < 2) throw std::invalid_argument("ancilla dimension must be >= 2");
  std::mt19937_64 rng(seed);
  RestrictedAttack attack;
  draw_forward(attack, d_e, rng);
  attack.u_reverse = Operator(haar_unitary(2 * d_e, rng), {2, d_e});
  attack.validate();
  return attack;
}

RestrictedAttack random_symmetric_attack(Eigen::Index d_e, std::uint64_t seed) {
  if (d_e < 2) throw std::invalid_argument("ancilla dimension must be >= 2");
  std::mt19937_64 rng(seed ^ 0x5ee75ee75ee75ee7ULL);
  RestrictedAttack attack;
  draw_forward(attack, d_e, rng);

  // U_R = (cos t I - i sin t X) (x) A with A unitary on the ancilla.  The
  // resulting statistics satisfy the symmetric-noise relations with
  // Q_R = sin^2 t exactly.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double q_r = 0.5 * unif(rng);
  const double ct = std::sqrt(1.0 - q_r);
  const double st = std::sqrt(q_r);
  Mat qubit(2, 2);
  qubit << Complex(ct, 0), Complex(0, -st), Complex(0, -st), Complex(ct, 0);
  const Mat anc = haar_unitary(d_e, rng);
  attack.u_reverse = tensor(Operator(qubit, {2}), Operator(anc, {d_e}));
  attack.validate();
  return attack;
}

}  // namespace alphasqkd
