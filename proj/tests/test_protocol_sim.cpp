#include <doctest.h>

#include <cmath>
#include <random>

#include "alphasqkd/protocol_sim.hpp"

using namespace alphasqkd;

namespace {

/// Samples full protocol iterations (with explicit q) and tallies every
/// conditional statistic; independent of the closed-form path in
/// simulate_statistics.
struct MonteCarloStats {
  ObservedStatistics mean;
  long long n_b0 = 0, n_b1 = 0;   // measure-resend iterations with B outcome 0/1 after |0>
  long long n_a0 = 0, n_a1 = 0;   // same after |a>
  long long n_refl = 0;           // reflect iterations with A measuring, |a> sent
  long long n_fwd0 = 0, n_fwd_a = 0;
};

MonteCarloStats monte_carlo(const RestrictedAttack& attack, const ProtocolParams& params,
                            long long iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Eigen::Index d_e = attack.ancilla_dim();
  const Eigen::Index n = 2 * d_e;

  // Forward isometry columns.
  Vec f_ket0 = Vec::Zero(n), f_ket1 = Vec::Zero(n);
  f_ket0(0) = attack.q0;
  f_ket0.segment(d_e, d_e) = attack.q1 * attack.e_vec.amps;
  f_ket1.segment(0, d_e) = attack.q2 * attack.f_vec.amps;
  f_ket1(d_e) = attack.q3;

  const double a = params.alpha;
  const double b = params.beta;
  const Vec f_keta = a * f_ket0 + b * f_ket1;
  const Mat& u = attack.u_reverse.entries;

  // <0| x I and <a| x I applied to a T (x) E vector.
  auto top = [&](const Vec& v) { return Vec(v.segment(0, d_e)); };
  auto bottom = [&](const Vec& v) { return Vec(v.segment(d_e, d_e)); };

  long long c_ab[2][2] = {};      // B outcome counts per sent state
  long long c_aa0[2][2] = {};     // POVM "0" counts per (sent, B outcome)
  long long c_aaa[2][2] = {};     // POVM "a" counts per (sent, B outcome)
  long long c_refl0 = 0, c_refla = 0;
  long long n_cond[2][2] = {};
  long long n_refl = 0;

  MonteCarloStats out;
  for (long long it = 0; it < iterations; ++it) {
    const int k_a = unif(rng) < 0.5 ? 0 : 1;
    const Vec& sent = (k_a == 0) ? f_ket0 : f_keta;

    const bool measure_resend = unif(rng) < params.q;
    Vec returning;
    int k_b = -1;
    if (measure_resend) {
      const double p0 = top(sent).squaredNorm();
      k_b = (unif(rng) < p0) ? 0 : 1;
      Vec collapsed = Vec::Zero(n);
      if (k_b == 0)
        collapsed.segment(0, d_e) = top(sent) / std::sqrt(p0);
      else
        collapsed.segment(d_e, d_e) = bottom(sent) / std::sqrt(1.0 - p0);
      returning = collapsed;
      ++c_ab[k_a][k_b];
    } else {
      returning = sent;
    }

    const bool a_measures = unif(rng) >= params.q;
    if (!a_measures) continue;

    const Vec back = u * returning;
    const double pr0 = params.p * top(back).squaredNorm();
    const double pra = params.p * (a * top(back) + b * bottom(back)).squaredNorm();
    const double roll = unif(rng);
    const int outcome = (roll < pr0) ? 0 : (roll < pr0 + pra ? 1 : 2);

    if (measure_resend) {
      ++n_cond[k_a][k_b];
      if (outcome == 0) ++c_aa0[k_a][k_b];
      if (outcome == 1) ++c_aaa[k_a][k_b];
    } else if (k_a == 1) {
      ++n_refl;
      if (outcome == 0) ++c_refl0;
      if (outcome == 1) ++c_refla;
    }
  }

  auto ratio = [](long long num, long long den) {
    return den > 0 ? static_cast<double>(num) / den : 0.0;
  };
  out.mean.p = params.p;
  out.mean.pAB_0_0 = ratio(c_ab[0][0], c_ab[0][0] + c_ab[0][1]);
  out.mean.pAB_0_1 = 1.0 - out.mean.pAB_0_0;
  out.mean.pAB_a_0 = ratio(c_ab[1][0], c_ab[1][0] + c_ab[1][1]);
  out.mean.pAB_a_1 = 1.0 - out.mean.pAB_a_0;
  out.mean.pAA_0_0_0 = ratio(c_aa0[0][0], n_cond[0][0]);
  out.mean.pAA_0_1_0 = ratio(c_aa0[0][1], n_cond[0][1]);
  out.mean.pAA_a_0_0 = ratio(c_aa0[1][0], n_cond[1][0]);
  out.mean.pAA_a_1_0 = ratio(c_aa0[1][1], n_cond[1][1]);
  out.mean.pAA_a_0_a = ratio(c_aaa[1][0], n_cond[1][0]);
  out.mean.pAA_a_1_a = ratio(c_aaa[1][1], n_cond[1][1]);
  out.mean.pAA_a_R_0 = ratio(c_refl0, n_refl);
  out.mean.pAA_a_R_a = ratio(c_refla, n_refl);
  out.n_b0 = n_cond[0][0];
  out.n_b1 = n_cond[0][1];
  out.n_a0 = n_cond[1][0];
  out.n_a1 = n_cond[1][1];
  out.n_refl = n_refl;
  return out;
}

void check_binomial(double expected, double observed, long long n) {
  REQUIRE(n > 1000);
  const double sigma = std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / n);
  CHECK(std::abs(observed - expected) < 3.0 * sigma + 1e-9);
}

}  // namespace

TEST_CASE("protocol params and POVM") {
  CHECK_THROWS_AS(ProtocolParams::make(0.5, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(ProtocolParams::make(1.2, 0.4), std::invalid_argument);
  const ProtocolParams params = ProtocolParams::make(0.5, 2.0 / 3.0);
  CHECK(params.beta == doctest::Approx(std::sqrt(0.75)));

  const auto povm = povm_elements(0.5, max_povm_scale(0.5));
  Mat sum = povm[0].entries + povm[1].entries + povm[2].entries;
  CHECK((sum - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("derive_reverse_vectors") {
  const Eigen::Index d_e = 3;

  SUBCASE("identity reverse attack") {
    RestrictedAttack attack = identity_attack(d_e);
    const ReverseVectors rv = derive_reverse_vectors(attack);
    CHECK((rv.e[0].amps - basis_ket(d_e, 0).amps).norm() < 1e-12);
    CHECK(rv.e[1].norm_sq() == 0.0);
    CHECK(rv.e[2].norm_sq() == 0.0);
    CHECK((rv.e[3].amps - basis_ket(d_e, 0).amps).norm() < 1e-12);
  }

  SUBCASE("bit-flip reverse attack") {
    RestrictedAttack attack = identity_attack(d_e);
    Mat x(2, 2);
    x << 0, 1, 1, 0;
    attack.u_reverse = tensor(Operator(x, {2}), identity_op({d_e}));
    const ReverseVectors rv = derive_reverse_vectors(attack);
    CHECK(rv.e[0].norm_sq() == 0.0);
    CHECK((rv.e[1].amps - basis_ket(d_e, 0).amps).norm() < 1e-12);
  }

  SUBCASE("random attacks satisfy the unitarity constraints") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const RestrictedAttack attack = random_attack(4, seed);
      const ReverseVectors rv = derive_reverse_vectors(attack);
      CHECK(rv.e[0].norm_sq() + rv.e[1].norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(rv.e[2].norm_sq() + rv.e[3].norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(rv.f[0].norm_sq() + rv.f[1].norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(rv.f[2].norm_sq() + rv.f[3].norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(std::abs(inner(rv.e[0], rv.e[2]) + inner(rv.e[1], rv.e[3])) < 1e-9);
      CHECK(std::abs(inner(rv.f[0], rv.f[2]) + inner(rv.f[1], rv.f[3])) < 1e-9);
      CHECK(std::abs(inner(rv.e[0], rv.f[0]) + inner(rv.e[1], rv.f[1])) < 1e-9);
      CHECK(std::abs(inner(rv.e[2], rv.f[2]) + inner(rv.e[3], rv.f[3])) < 1e-9);
    }
  }

  SUBCASE("non-unitary operator rejected") {
    RestrictedAttack attack = identity_attack(d_e);
    attack.u_reverse.entries(0, 0) = 2.0;
    CHECK_THROWS_AS(derive_reverse_vectors(attack), std::invalid_argument);
  }
}

TEST_CASE("g_vectors") {
  const Eigen::Index d_e = 3;
  RestrictedAttack attack = identity_attack(d_e);

  SUBCASE("identity attack, alpha = 0") {
    const auto g = g_vectors(attack, ProtocolParams::make(0.0, 1.0));
    CHECK((g[0].amps - basis_ket(d_e, 0).amps).norm() < 1e-12);
    CHECK(g[1].norm_sq() == 0.0);
    CHECK(g[2].norm_sq() == 0.0);
    CHECK(g[3].norm_sq() == 0.0);
  }

  SUBCASE("identity attack, general alpha") {
    const double alpha = 0.35;
    const auto g = g_vectors(attack, ProtocolParams::make(alpha, max_povm_scale(alpha)));
    CHECK(g[3].norm_sq() == doctest::Approx(alpha * alpha).epsilon(1e-12));
    CHECK(g[0].norm_sq() == doctest::Approx(1.0 - alpha * alpha).epsilon(1e-12));
  }

  SUBCASE("random attacks: <g2>+<g3> equals the forward statistic") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const RestrictedAttack rnd = random_attack(4, seed);
      const ProtocolParams params = ProtocolParams::make(0.3, max_povm_scale(0.3));
      const auto g = g_vectors(rnd, params);
      const ObservedStatistics stats = simulate_statistics(rnd, params);
      CHECK(g[2].norm_sq() + g[3].norm_sq() ==
            doctest::Approx(stats.pAB_a_0).epsilon(1e-9));
      CHECK(g[0].norm_sq() + g[1].norm_sq() ==
            doctest::Approx(stats.pAB_a_1).epsilon(1e-9));
    }
  }
}

TEST_CASE("simulate_statistics") {
  SUBCASE("noiseless channel") {
    const double alpha = 0.4;
    const ProtocolParams params = ProtocolParams::make(alpha, max_povm_scale(alpha));
    const ObservedStatistics st = simulate_statistics(identity_attack(4), params);
    CHECK(st.pAB_0_0 == doctest::Approx(1.0));
    CHECK(st.pAB_a_1 == doctest::Approx(params.beta * params.beta));
    CHECK(st.pAA_0_0_0 == doctest::Approx(params.p));
    CHECK(st.pAA_a_R_a == doctest::Approx(params.p));
  }

  SUBCASE("collapse then re-measure") {
    const ProtocolParams params = ProtocolParams::make(0.5, 2.0 / 3.0);
    const ObservedStatistics st = simulate_statistics(identity_attack(4), params);
    CHECK(st.pAA_a_0_a / params.p == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("Monte-Carlo oracle") {
    const RestrictedAttack attack = random_attack(4, 777);
    const ProtocolParams params = ProtocolParams::make(0.3, max_povm_scale(0.3), 0.5);
    const ObservedStatistics exact = simulate_statistics(attack, params);
    const MonteCarloStats mc = monte_carlo(attack, params, 1000000, 4242);

    const long long n_ab0 = 2 * (mc.n_b0 + mc.n_b1);  // rough conditional sample sizes
    check_binomial(exact.pAB_0_0, mc.mean.pAB_0_0, n_ab0);
    check_binomial(exact.pAB_a_0, mc.mean.pAB_a_0, 2 * (mc.n_a0 + mc.n_a1));
    check_binomial(exact.pAA_0_0_0, mc.mean.pAA_0_0_0 * params.p / params.p, mc.n_b0);
    check_binomial(exact.pAA_0_1_0, mc.mean.pAA_0_1_0, mc.n_b1);
    check_binomial(exact.pAA_a_0_0, mc.mean.pAA_a_0_0, mc.n_a0);
    check_binomial(exact.pAA_a_1_0, mc.mean.pAA_a_1_0, mc.n_a1);
    check_binomial(exact.pAA_a_0_a, mc.mean.pAA_a_0_a, mc.n_a0);
    check_binomial(exact.pAA_a_1_a, mc.mean.pAA_a_1_a, mc.n_a1);
    check_binomial(exact.pAA_a_R_0, mc.mean.pAA_a_R_0, mc.n_refl);
    check_binomial(exact.pAA_a_R_a, mc.mean.pAA_a_R_a, mc.n_refl);
  }

  SUBCASE("statistic identities over random attacks") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const double alpha = 0.05 + 0.9 * (seed / 31.0);
      const ProtocolParams params = ProtocolParams::make(alpha, max_povm_scale(alpha));
      const RestrictedAttack attack = random_attack(4, seed);
      const ObservedStatistics st = simulate_statistics(attack, params);
      const auto g = g_vectors(attack, params);
      const double p = params.p;

      // Eq-11 style norm identities from the statistics.
      CHECK(g[3].norm_sq() ==
            doctest::Approx(st.pAB_a_0 * st.pAA_a_0_0 / p).epsilon(1e-9));
      CHECK(g[0].norm_sq() ==
            doctest::Approx(st.pAB_a_1 * (1.0 - st.pAA_a_1_0 / p)).epsilon(1e-9));

      // Reflection decomposition and the V-vector identity.
      CHECK(st.pAA_a_R_0 == doctest::Approx(p * add(g[1], g[3]).norm_sq()).epsilon(1e-9));
      const StateVector v_sum =
          add(add(scale(alpha, g[3]), scale(params.beta, g[2])),
              add(scale(alpha, g[1]), scale(params.beta, g[0])));
      CHECK(st.pAA_a_R_a == doctest::Approx(p * v_sum.norm_sq()).epsilon(1e-9));
    }
  }
}

TEST_CASE("build_rho_abe") {
  SUBCASE("identity attack anchors") {
    const double alpha = 0.45;
    const ProtocolParams params = ProtocolParams::make(alpha, max_povm_scale(alpha));
    const ExactOracle oracle = build_rho_abe(identity_attack(3), params);

    const Operator ab = partial_trace(oracle.rho_abe, {0, 1});
    const double a2 = alpha * alpha;
    const double expect[4] = {0.5, 0.0, 0.5 * a2, 0.5 * (1.0 - a2)};
    for (int i = 0; i < 4; ++i)
      CHECK(ab.entries(i, i).real() == doctest::Approx(expect[i]).epsilon(1e-9));

    CHECK(oracle.sae_exact == doctest::Approx(1.0).epsilon(1e-9));
    const double joint[4] = {0.5, 0.0, 0.5 * a2, 0.5 * (1.0 - a2)};
    const double expect_hab =
        shannon_entropy(joint) - binary_entropy(0.5 * (1.0 + a2));
    CHECK(oracle.hab_exact == doctest::Approx(expect_hab).epsilon(1e-9));
  }

  SUBCASE("random attacks") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const RestrictedAttack attack = random_attack(4, seed);
      const ProtocolParams params = ProtocolParams::make(0.3, max_povm_scale(0.3));
      const ExactOracle oracle = build_rho_abe(attack, params);
      CHECK(oracle.rho_abe.trace_real() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(oracle.sae_exact >= -1e-9);
      oracle.rho_abe.assert_density(1e-9);
    }
  }
}

TEST_CASE("random_attack") {
  SUBCASE("determinism") {
    const RestrictedAttack a = random_attack(4, 99);
    const RestrictedAttack b = random_attack(4, 99);
    CHECK(a.q0 == b.q0);
    CHECK((a.u_reverse.entries - b.u_reverse.entries).cwiseAbs().maxCoeff() == 0.0);
    const RestrictedAttack c = random_attack(4, 100);
    CHECK(a.q0 != c.q0);
  }

  SUBCASE("invariants over many draws") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      CHECK_NOTHROW(random_attack(seed % 2 ? 2 : 4, seed).validate());
    }
  }

  SUBCASE("symmetric attacks satisfy the symmetric relations") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const RestrictedAttack attack = random_symmetric_attack(4, seed);
      const ProtocolParams params = ProtocolParams::make(0.4, max_povm_scale(0.4));
      const ObservedStatistics st = simulate_statistics(attack, params);
      const double q_r = 1.0 - st.pAA_0_0_0 / st.p;
      CHECK(st.pAA_0_1_0 / st.p == doctest::Approx(q_r).epsilon(1e-9));
      CHECK(st.pAA_a_0_0 / st.p == doctest::Approx(1.0 - q_r).epsilon(1e-9));
      CHECK(st.pAA_a_1_0 / st.p == doctest::Approx(q_r).epsilon(1e-9));
    }
  }

  SUBCASE("identity corner accepts any ancilla states") {
    RestrictedAttack attack = identity_attack(4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec e(4), f(4);
    for (int i = 0; i < 4; ++i) {
      e(i) = Complex(gauss(rng), gauss(rng));
      f(i) = Complex(gauss(rng), gauss(rng));
    }
    e.normalize();
    f.normalize();
    attack.e_vec = StateVector(e, {4});
    attack.f_vec = StateVector(f, {4});
    CHECK_NOTHROW(attack.validate());
  }
}
