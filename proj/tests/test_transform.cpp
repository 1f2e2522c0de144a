#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "core/errors.hpp"
#include "ermakov/ermakov.hpp"
#include "oracles.hpp"
#include "transform/transform.hpp"

using namespace extphase;

namespace {

HamiltonianSpec td_oscillator() {
  return HamiltonianSpec(
      ScalarFunction::constant(1.0),
      ScalarFunction::binary(
          [](double q, double t) { return 0.5 * (1.0 + 0.5 * std::sin(0.3 * t)) * q * q; },
          [](double q, double t) { return (1.0 + 0.5 * std::sin(0.3 * t)) * q; },
          [](double q, double t) { return 0.5 * 0.3 * 0.5 * std::cos(0.3 * t) * q * q; },
          [](double, double t) { return 1.0 + 0.5 * std::sin(0.3 * t); }),
      true);
}

HamiltonianSpec oscillator(double w2 = 1.0) {
  return HamiltonianSpec(
      ScalarFunction::constant(1.0),
      ScalarFunction::binary([w2](double q, double) { return 0.5 * w2 * q * q; }), true);
}

// A = a0, B = bslope * T: exact constant-coefficient spec on [-5, 5]
TransformSpec manual_spec(double a0, double bslope, double m0 = 1.0, double h0 = 0.5,
                          ScalarFunction kappa = ScalarFunction::constant(0.0),
                          const std::string& tag = "0") {
  std::vector<double> T, A, Ad, B, Bd;
  for (int i = 0; i <= 40; ++i) {
    const double t = -5.0 + 0.25 * i;
    T.push_back(t);
    A.push_back(a0);
    Ad.push_back(0.0);
    B.push_back(bslope * t);
    Bd.push_back(bslope);
  }
  return TransformSpec(HermiteCurve(T, A, Ad), HermiteCurve(T, B, Bd), m0, h0,
                       std::move(kappa), tag);
}

TransformSpec identity_spec() { return manual_spec(1.0, 1.0); }

TransformSpec solved_td(double T1 = 12.0) {
  return solve_coefficients(td_oscillator(), 1.0, 0.5, 1.0, 0.0, 0.0, 0.0, T1, 1e-11);
}

} // namespace

TEST_CASE("solve_coefficients: constant solutions") {
  auto tf1 = solve_coefficients(oscillator(), 1.0, 0.5, 1.0, 0.0, 0.0, 0.0, 5.0, 1e-11);
  for (double T : {0.3, 2.0, 4.9}) {
    CHECK(tf1.A(T) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tf1.B(T) == doctest::Approx(T).epsilon(1e-10));
  }

  const double w0 = 2.0; // V = (1/2) w0^2 q^2
  auto tf2 = solve_coefficients(oscillator(w0 * w0), 1.0, 0.5, 1.0 / std::sqrt(w0), 0.0,
                                0.0, 0.0, 5.0, 1e-11);
  for (double T : {0.5, 3.7}) {
    CHECK(tf2.A(T) == doctest::Approx(1.0 / std::sqrt(w0)).epsilon(1e-9));
    CHECK(tf2.B(T) == doctest::Approx(T / w0).epsilon(1e-9));
  }
}

TEST_CASE("solve_coefficients refuses non-quadratic potentials") {
  HamiltonianSpec quartic(
      ScalarFunction::constant(1.0),
      ScalarFunction::binary([](double q, double) { return 0.25 * q * q * q * q; }),
      false);
  CHECK_THROWS_AS(solve_coefficients(quartic, 1, 0.5, 1, 0, 0, 0, 1, 1e-9),
                  SeparabilityError);
  HamiltonianSpec lying(
      ScalarFunction::constant(1.0),
      ScalarFunction::binary([](double q, double) { return 0.25 * q * q * q * q; }),
      true); // declared quadratic but is not
  CHECK_THROWS_AS(solve_coefficients(lying, 1, 0.5, 1, 0, 0, 0, 1, 1e-9),
                  SeparabilityError);
}

TEST_CASE("solved TD coefficients equal the Ermakov solution composed with B") {
  auto tf = solved_td(52.0);
  auto rho = solve_ermakov(
      ScalarFunction::unary([](double t) { return std::sqrt(1.0 + 0.5 * std::sin(0.3 * t)); }),
      1.0, 0.0, 0.0, tf.B(tf.T_end()) + 1e-9, 1e-11);
  const double Tmax = tf.B_inverse(50.0);
  for (int i = 0; i <= 200; ++i) {
    const double T = Tmax * i / 200.0;
    CHECK(std::fabs(tf.A(T) - rho.rho(tf.B(T))) < 1e-7);
  }
  // Bdot consistency invariant
  for (double T : {0.1, 7.3, 31.0}) {
    CHECK(tf.Bdot(T) ==
          doctest::Approx(td_oscillator().mass(tf.B(T)) * tf.A(T) * tf.A(T)).epsilon(1e-9));
    CHECK(tf.A(T) > 0.0);
    CHECK(tf.Bdot(T) > 0.0);
  }
}

TEST_CASE("forward_map closed forms") {
  auto id = identity_spec();
  const auto r = forward_map(id, 0.7, 1.3, -0.4, 0.9);
  CHECK(r[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(1.3).epsilon(1e-14));
  CHECK(r[2] == doctest::Approx(-0.4).epsilon(1e-14));
  CHECK(r[3] == doctest::Approx(0.9).epsilon(1e-14));

  auto sc = manual_spec(2.0, 4.0); // Bdot = m A^2 / m0 = 4
  const auto s = forward_map(sc, 1.0, 0.0, 1.0, 0.0);
  CHECK(s[0] == doctest::Approx(2.0));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(0.5));
  CHECK(s[3] == doctest::Approx(0.0));
}

TEST_CASE("inverse_map recovers the new coordinates (root-finding oracle)") {
  auto tf = solved_td();
  auto g = oracle::rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    std::array<double, 4> X{oracle::uniform(g, -1.5, 1.5), oracle::uniform(g, 0.5, 10.0),
                            oracle::uniform(g, -2, 2), oracle::uniform(g, -2, 2)};
    const auto old = forward_map(tf, X[0], X[1], X[2], X[3]);
    const auto back = inverse_map(tf, old[0], old[1], old[2], old[3]);
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(back[i] - X[i]) < 1e-10);

    // independent inversion: damped Newton on the forward map with a
    // finite-difference Jacobian
    std::array<double, 4> Y{old[0] / tf.A(5.0), 5.0, old[2], old[3]}; // crude seed
    for (int it = 0; it < 60; ++it) {
      const auto fy = forward_map(tf, Y[0], Y[1], Y[2], Y[3]);
      Eigen::Vector4d r;
      for (int i = 0; i < 4; ++i) r(i) = fy[i] - old[i];
      if (r.cwiseAbs().maxCoeff() < 1e-12) break;
      const auto J = jacobian(tf, Y[0], Y[1], Y[2], Y[3]).M;
      Eigen::Vector4d dYv = J.partialPivLu().solve(r);
      double damp = 1.0;
      if (it < 5) damp = 0.7;
      for (int i = 0; i < 4; ++i) Y[i] -= damp * dYv(i);
      Y[1] = std::clamp(Y[1], tf.T_begin(), tf.T_end());
    }
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(Y[i] - X[i]) < 1e-8);
  }
}

TEST_CASE("jacobian closed forms and analytic oracle") {
  auto id = identity_spec();
  const auto J_id = jacobian(id, 0.2, 0.9, -1.1, 0.4).M;
  CHECK((J_id - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);

  auto sc = manual_spec(2.0, 4.0);
  const auto J_sc = jacobian(sc, 0.5, 0.25, 1.0, -0.7).M;
  Eigen::Vector4d diag_expect(2.0, 4.0, 0.5, 0.25);
  CHECK((J_sc - Eigen::Matrix4d(diag_expect.asDiagonal())).cwiseAbs().maxCoeff() < 1e-9);

  // coordinate rows never depend on the momenta
  auto tf = solved_td();
  auto g = oracle::rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const double Q = oracle::uniform(g, -1.5, 1.5), T = oracle::uniform(g, 1.0, 11.0);
    const double P = oracle::uniform(g, -2, 2), PT = oracle::uniform(g, -2, 2);
    const auto J = jacobian(tf, Q, T, P, PT).M;
    CHECK(std::fabs(J(0, 2)) < 1e-10);
    CHECK(std::fabs(J(0, 3)) < 1e-10);
    CHECK(std::fabs(J(1, 2)) < 1e-10);
    CHECK(std::fabs(J(1, 3)) < 1e-10);

    // analytic partials of the map, written out independently from the
    // solved coefficient curves
    const double m0 = tf.m0();
    const double a = tf.A(T), ad = tf.Adot(T), add = tf.Addot(T), a3 = tf.a_curve().third(T);
    const double bd = tf.Bdot(T), bdd = tf.b_curve().second(T);
    Eigen::Matrix4d E = Eigen::Matrix4d::Zero();
    E(0, 0) = a;
    E(0, 1) = ad * Q;
    E(1, 1) = bd;
    E(2, 0) = m0 * ad / (a * a); // D' with kappa = 0
    E(2, 1) = -ad / (a * a) * P + m0 * Q * (add / (a * a) - 2.0 * ad * ad / (a * a * a));
    E(2, 2) = 1.0 / a;
    const double cross = -(m0 * 0.0) + m0 * Q * (add / a - 3.0 * ad * ad / (a * a));
    E(3, 0) = (-ad * P / a + cross) / bd;
    const double intterm = 0.5 * m0 * Q * Q * (add / a - 3.0 * ad * ad / (a * a));
    const double dint_dT =
        0.5 * m0 * Q * Q *
        (a3 / a - add * ad / (a * a) - 3.0 * (2.0 * ad * add / (a * a) - 2.0 * ad * ad * ad / (a * a * a)));
    E(3, 1) = (-(add / a - ad * ad / (a * a)) * Q * P + dint_dT) / bd -
              bdd / (bd * bd) * (PT - ad * Q * P / a + intterm);
    E(3, 2) = -ad * Q / (a * bd);
    E(3, 3) = 1.0 / bd;
    CHECK((J - E).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("symplectic residual") {
  Jacobian4 ident;
  ident.M = Eigen::Matrix4d::Identity();
  CHECK(symplectic_residual(ident) == 0.0);

  // q = Q, t = T, p = 2P, pt = PT breaks the unit bracket by exactly 1
  Jacobian4 bad;
  bad.M = Eigen::Matrix4d::Identity();
  bad.M(2, 2) = 2.0;
  CHECK(symplectic_residual(bad) == doctest::Approx(1.0));

  auto tf = solved_td();
  auto g = oracle::rng(17);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double Q = oracle::uniform(g, -2, 2), T = oracle::uniform(g, 0.5, 11.5);
    const double P = oracle::uniform(g, -3, 3), PT = oracle::uniform(g, -3, 3);
    worst = std::max(worst, symplectic_residual(jacobian(tf, Q, T, P, PT)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("new_potential") {
  auto inv_id = new_potential(identity_spec(), oscillator());
  for (double Q : {0.0, 0.5, -1.7}) {
    CHECK(inv_id.Vbar(Q) == doctest::Approx(0.5 * Q * Q).epsilon(1e-10));
  }

  const double w0 = 2.0;
  auto tf_c = solve_coefficients(oscillator(w0 * w0), 1.0, 0.5, 1.0 / std::sqrt(w0), 0.0,
                                 0.0, 0.0, 5.0, 1e-11);
  auto inv_c = new_potential(tf_c, oscillator(w0 * w0));
  for (double Q : {0.4, 1.2}) {
    CHECK(inv_c.Vbar(Q) == doctest::Approx(0.5 * Q * Q).epsilon(1e-8));
  }

  auto tf = solved_td();
  auto inv = new_potential(tf, td_oscillator());
  for (double Q : {0.3, 1.0, 2.0}) {
    CHECK(std::fabs(inv.Vbar(Q) - 0.5 * Q * Q) < 1e-7);
  }

  // a quartic leaking in must be flagged: declare quadratic, sneak quartic
  HamiltonianSpec lying(
      ScalarFunction::constant(1.0),
      ScalarFunction::binary([](double q, double) { return 0.5 * q * q + 0.1 * q * q * q * q; }),
      true);
  CHECK_THROWS_AS(new_potential(solved_td(2.0), lying, 1e-9), SeparabilityError);
}

TEST_CASE("invariant_I values and Lewis correspondence") {
  InvariantSpec inv;
  inv.m0 = 1.0;
  inv.kappa = ScalarFunction::constant(0.0);
  inv.Vbar = ScalarFunction::unary([](double Q) { return 0.5 * Q * Q; });
  CHECK(invariant_I(inv, 1.0, 1.0) == doctest::Approx(1.0));

  InvariantSpec invc = inv;
  const double c = 0.8;
  invc.kappa = ScalarFunction::constant(c);
  invc.Vbar = ScalarFunction::unary([](double Q) { return 0.5 * Q * Q + 0.32; });
  // I = P^2/2 + c P + Vbar(0) at Q = 0
  CHECK(invariant_I(invc, 0.0, 2.0) == doctest::Approx(2.0 + 2.0 * c + 0.32));

  // pulled back through the inverse map along a TD trajectory: constant and
  // equal to the classic invariant built on rho = A o B^{-1}
  auto spec = td_oscillator();
  auto tf = solve_coefficients(spec, 1.0, 0.5, 1.0, 0.0, 0.0, 0.0, 52.0, 1e-12);
  auto invt = new_potential(tf, spec);
  auto rho = solve_ermakov(
      ScalarFunction::unary([](double t) { return std::sqrt(1.0 + 0.5 * std::sin(0.3 * t)); }),
      1.0, 0.0, 0.0, 50.0 + 1e-6, 1e-12);
  auto traj = integrate_reduced(spec, {1.0, 0.0, 0.0}, 50.0, 1e-11);
  double I0 = -1.0;
  for (std::size_t i = 0; i < traj.size(); i += 5) {
    const auto& s = traj.reduced_states[i];
    const double H = eval_hamiltonian(spec, s);
    const auto X = inverse_map(tf, s.q, s.t, s.p, -H);
    const double I = invariant_I(invt, X[0], X[2]);
    if (I0 < 0)
      I0 = I;
    else
      CHECK(std::fabs(I - I0) < 1e-7);
    const double Ilewis = lewis_invariant(s.q, s.p, rho.rho(s.t), rho.rhodot(s.t));
    CHECK(std::fabs(I - Ilewis) < 1e-8);
  }
}

TEST_CASE("boundary_term") {
  auto id = identity_spec();
  CHECK(id.F(1.7, 0.3) == doctest::Approx(0.0));

  auto with_c = manual_spec(1.0, 1.0, 1.0, 0.5, ScalarFunction::constant(0.8), "0.8");
  CHECK(with_c.F(2.0, 0.0) == doctest::Approx(0.8 * 2.0).epsilon(1e-12));

  // TD spec, kappa = 0: F(1, T*) = (1/2) Adot/A, cross-checked by Simpson
  // quadrature of A' D over Q
  auto tf = solved_td();
  for (double Tstar : {1.0, 6.5}) {
    const double expect = 0.5 * tf.Adot(Tstar) / tf.A(Tstar);
    CHECK(tf.F(1.0, Tstar) == doctest::Approx(expect).epsilon(1e-10));
    const int n = 200;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double Q = static_cast<double>(i) / n;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * tf.A(Tstar) * tf.D(Q, Tstar);
    }
    acc /= 3.0 * n;
    CHECK(tf.F(1.0, Tstar) == doctest::Approx(acc).epsilon(1e-9));
  }
}

TEST_CASE("generating_F3") {
  auto id = identity_spec();
  CHECK(generating_F3(id, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(-2.0));

  auto sc = manual_spec(2.0, 4.0);
  CHECK(generating_F3(sc, 1.0, 0.0, 1.0, 1.0) == doctest::Approx(-2.0));

  // -dF3/dQ and -dF3/dT reproduce the new momenta of the inverse map
  auto tf = solved_td();
  auto g = oracle::rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const double Q = oracle::uniform(g, -1, 1), T = oracle::uniform(g, 1.0, 10.0);
    const double P = oracle::uniform(g, -2, 2), PT = oracle::uniform(g, -2, 2);
    const auto old = forward_map(tf, Q, T, P, PT);
    const double h = 1e-6;
    const double dQ = (generating_F3(tf, old[2], old[3], Q + h, T) -
                       generating_F3(tf, old[2], old[3], Q - h, T)) / (2 * h);
    const double dT = (generating_F3(tf, old[2], old[3], Q, T + h) -
                       generating_F3(tf, old[2], old[3], Q, T - h)) / (2 * h);
    CHECK(std::fabs(-dQ - P) < 1e-8);
    CHECK(std::fabs(-dT - PT) < 1e-7);
  }
}

TEST_CASE("tilde_hamiltonian") {
  auto id = identity_spec();
  InvariantSpec inv;
  inv.m0 = 1.0;
  inv.kappa = ScalarFunction::constant(0.0);
  inv.Vbar = ScalarFunction::unary([](double Q) { return 0.5 * Q * Q; });
  CHECK(tilde_hamiltonian(inv, id, 0.7, 1.1, 2.0) ==
        doctest::Approx(invariant_I(inv, 0.7, 1.1)));

  // kappa = c, Adot = 0: Itilde(Q, Pt) = I(Q, Pt - m0 c)
  const double c = 0.6;
  auto tfc = manual_spec(1.0, 1.0, 1.0, 0.5, ScalarFunction::constant(c), "0.6");
  InvariantSpec invc;
  invc.m0 = 1.0;
  invc.kappa = ScalarFunction::constant(c);
  invc.Vbar = ScalarFunction::unary([c](double Q) { return 0.5 * Q * Q + 0.5 * c * c; });
  CHECK(tilde_hamiltonian(invc, tfc, 0.4, 1.0, 0.0) ==
        doctest::Approx(invariant_I(invc, 0.4, 1.0 - c)));

  // Hamilton flows of I in (Q,P) and Itilde in (Q,Pt) give the same Q(T)
  auto tf = solved_td();
  auto inv_td = new_potential(tf, td_oscillator());
  const double T0 = 1.0, T1 = 6.0, tol = 1e-10;
  const double Q0 = 1.0, P0 = 0.3;
  oracle::Rhs<2> flow_I = [&](double, const std::array<double, 2>& y,
                              std::array<double, 2>& dy) {
    dy[0] = y[1] / inv_td.m0 + inv_td.kappa(y[0]);
    dy[1] = -inv_td.kappa.deriv(y[0]) * y[1] - inv_td.Vbar.deriv(y[0]);
  };
  oracle::Rhs<2> flow_tilde = [&](double T, const std::array<double, 2>& y,
                                  std::array<double, 2>& dy) {
    const double h = 1e-6;
    dy[0] = (tilde_hamiltonian(inv_td, tf, y[0], y[1] + h, T) -
             tilde_hamiltonian(inv_td, tf, y[0], y[1] - h, T)) / (2 * h);
    dy[1] = -(tilde_hamiltonian(inv_td, tf, y[0] + h, y[1], T) -
              tilde_hamiltonian(inv_td, tf, y[0] - h, y[1], T)) / (2 * h);
  };
  (void)tol;
  const auto yI = oracle::rk4<2>(flow_I, T0, T1, {Q0, P0}, 1e-4);
  const auto yT = oracle::rk4<2>(flow_tilde, T0, T1, {Q0, P0 + tf.dF_dQ(Q0, T0)}, 1e-4);
  CHECK(std::fabs(yI[0] - yT[0]) < 1e-6);
  CHECK(std::fabs(yT[1] - (yI[1] + tf.dF_dQ(yI[0], T1))) < 1e-6);
}

TEST_CASE("constraint_new") {
  auto id = identity_spec();
  auto osc = oscillator();
  // on-shell point through the identity map
  const double H = eval_hamiltonian(osc, {1.0, 0.5, 0.0});
  CHECK(constraint_new(id, osc, 1.0, 0.0, 0.5, -H) == doctest::Approx(0.0).epsilon(1e-14));

  // off-shell by delta in P_T shifts phi by delta / Bdot
  auto tf = solved_td();
  auto spec = td_oscillator();
  const double base = constraint_new(tf, spec, 0.7, 3.0, 0.2, 0.1);
  const double delta = 0.37;
  CHECK(constraint_new(tf, spec, 0.7, 3.0, 0.2, 0.1 + delta) - base ==
        doctest::Approx(delta / tf.Bdot(3.0)).epsilon(1e-10));

  // composition identity: the new-variable constraint equals the old one
  // evaluated through the forward map (the 1/Bdot factor of the paper's
  // expression makes the two coincide exactly)
  auto g = oracle::rng(29);
  for (int i = 0; i < 20; ++i) {
    const double Q = oracle::uniform(g, -1.5, 1.5), T = oracle::uniform(g, 0.5, 11.0);
    const double P = oracle::uniform(g, -2, 2), PT = oracle::uniform(g, -2, 2);
    const auto old = forward_map(tf, Q, T, P, PT);
    const double phi_old =
        eval_constraint(spec, ExtendedState{old[0], old[1], old[2], old[3], 0.0});
    CHECK(constraint_new(tf, spec, Q, T, P, PT) ==
          doctest::Approx(phi_old).epsilon(1e-10));
  }
}

TEST_CASE("dirac_brackets_new") {
  auto tf = solved_td();
  auto spec = td_oscillator();
  auto g = oracle::rng(31);
  for (int i = 0; i < 8; ++i) {
    // build an on-shell state in the new variables
    const double Q = oracle::uniform(g, -1.5, 1.5), T = oracle::uniform(g, 0.5, 11.0);
    const double P = oracle::uniform(g, -2, 2);
    const double bracketless = constraint_new(tf, spec, Q, T, P, 0.0);
    const double PT = -bracketless * tf.Bdot(T); // phi linear in PT with slope 1/Bdot
    CHECK(std::fabs(constraint_new(tf, spec, Q, T, P, PT)) < 1e-12);
    auto rep = dirac_brackets_new(tf, spec, {Q, T, P, PT});
    CHECK(rep.get("Q", "P") == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::fabs(rep.get("T", "PT")) < 1e-7);
    // closed forms for the cross brackets
    const double h = 1e-6;
    const double dphi_dP = (constraint_new(tf, spec, Q, T, P + h, PT) -
                            constraint_new(tf, spec, Q, T, P - h, PT)) / (2 * h);
    const double dphi_dQ = (constraint_new(tf, spec, Q + h, T, P, PT) -
                            constraint_new(tf, spec, Q - h, T, P, PT)) / (2 * h);
    CHECK(rep.get("Q", "PT") == doctest::Approx(-tf.Bdot(T) * dphi_dP).epsilon(1e-5));
    CHECK(rep.get("P", "PT") == doctest::Approx(tf.Bdot(T) * dphi_dQ).epsilon(1e-5));
  }

  // identity spec reduces to the old-variable values
  auto id = identity_spec();
  auto osc = oscillator();
  const double H = eval_hamiltonian(osc, {1.2, 0.4, 0.0});
  auto rep_new = dirac_brackets_new(id, osc, {1.2, 0.0, 0.4, -H});
  auto rep_old = dirac_brackets_old(osc, ExtendedState{1.2, 0.0, 0.4, -H, 0.0});
  CHECK(rep_new.get("Q", "P") == doctest::Approx(rep_old.get("q", "p")).epsilon(1e-7));
  CHECK(rep_new.get("Q", "PT") == doctest::Approx(rep_old.get("q", "pt")).epsilon(1e-6));
  CHECK(rep_new.get("P", "PT") == doctest::Approx(rep_old.get("p", "pt")).epsilon(1e-6));
}

TEST_CASE("reduced brackets are not preserved by the extended map") {
  auto tf = solved_td();
  auto spec = td_oscillator();
  const double Q = 1.2, T = 4.0, P = 0.8;
  const double PT = -constraint_new(tf, spec, Q, T, P, 0.0) * tf.Bdot(T);
  auto rep_new = dirac_brackets_new(tf, spec, {Q, T, P, PT});
  const auto old = forward_map(tf, Q, T, P, PT);
  auto rep_old = dirac_brackets_old(spec, ExtendedState{old[0], old[1], old[2], old[3], 0.0});
  CHECK(std::fabs(rep_old.get("q", "pt") - rep_new.get("Q", "PT")) > 1e-3);
}

TEST_CASE("gauge invariance of I and autonomy of P_T along new-variable flows") {
  auto tf = solved_td();
  auto spec = td_oscillator();
  auto inv = new_potential(tf, spec);
  const double Q0 = 1.0, P0 = 0.0, T0 = 0.5;
  const double PT0 = -constraint_new(tf, spec, Q0, T0, P0, 0.0) * tf.Bdot(T0);

  for (int gauge_id = 0; gauge_id < 2; ++gauge_id) {
    ScalarFunction lam =
        gauge_id == 0 ? ScalarFunction::constant(1.0)
                      : ScalarFunction::unary([](double tau) { return 1.0 + tau * tau; },
                                              [](double tau) { return 2.0 * tau; },
                                              [](double) { return 2.0; });
    const double tau_end = gauge_id == 0 ? 8.0 : 2.6;
    auto traj = integrate_extended_new(tf, spec, lam, {Q0, T0, P0, PT0}, 0.0, tau_end,
                                       1e-10);
    const double I0 = invariant_I(inv, traj.states.front()[0], traj.states.front()[2]);
    double dPT_max = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const double I = invariant_I(inv, traj.states[i][0], traj.states[i][2]);
      CHECK(std::fabs(I - I0) < 100 * 1e-8);
      if (i > 0) {
        const double dT = traj.states[i][1] - traj.states[i - 1][1];
        if (dT > 1e-4)
          dPT_max = std::max(dPT_max,
                             std::fabs(traj.states[i][3] - traj.states[i - 1][3]) / dT);
      }
    }
    CHECK(dPT_max < 1e-7);
  }
}

TEST_CASE("gauge variation of F along new-variable trajectories") {
  // constant F: identity spec with kappa = const gives F = c Q, but along a
  // trajectory {F, lambda phi} must equal dF/dtau; both vanish when F = 0
  auto id = identity_spec();
  auto osc = oscillator();
  const double H0 = eval_hamiltonian(osc, {1.0, 0.0, 0.0});
  std::vector<double> samples;
  for (int i = 0; i <= 3000; ++i) samples.push_back(i * 1e-3);
  auto traj0 = integrate_extended_new(id, osc, ScalarFunction::constant(1.0),
                                      {1.0, 0.0, 0.0, -H0}, 0.0, 3.0, 1e-10, samples);
  CHECK(gauge_variation_F(id, osc, traj0) < 1e-9); // F identically zero

  auto tf = solved_td();
  auto spec = td_oscillator();
  const double Q0 = 1.0, T0 = 0.5, P0 = 0.2;
  const double PT0 = -constraint_new(tf, spec, Q0, T0, P0, 0.0) * tf.Bdot(T0);
  samples.clear();
  for (int i = 0; i <= 5000; ++i) samples.push_back(0.5 + i * 1e-3);
  auto traj = integrate_extended_new(tf, spec, ScalarFunction::constant(1.0),
                                     {Q0, T0, P0, PT0}, 0.5, 5.5, 1e-10, samples);
  CHECK(gauge_variation_F(tf, spec, traj) < 1e-6);
}

TEST_CASE("JSON round trip") {
  auto tf = solved_td(6.0);
  const std::string text = tf.to_json();
  auto back = TransformSpec::from_json(text, td_oscillator().mass_fn());
  CHECK(back.m0() == tf.m0());
  CHECK(back.h0() == tf.h0());
  for (double T : {0.3, 2.2, 5.7}) {
    CHECK(back.A(T) == doctest::Approx(tf.A(T)).epsilon(1e-14));
    CHECK(back.B(T) == doctest::Approx(tf.B(T)).epsilon(1e-14));
    CHECK(back.Bdot(T) == doctest::Approx(tf.Bdot(T)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(TransformSpec::from_json("{oops", td_oscillator().mass_fn()),
                  ParseError);
}
