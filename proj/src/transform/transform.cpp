#include "transform/transform.hpp"

#include <cmath>

#include "json.hpp"

#include "core/errors.hpp"
#include "dynamics/ode.hpp"

namespace extphase {

namespace {

// adaptive Simpson on [a, b]
double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol = 1e-12) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

TransformSpec::TransformSpec(HermiteCurve a_curve, HermiteCurve b_curve, double m0,
                             double h0, ScalarFunction kappa, std::string kappa_tag)
    : a_(std::move(a_curve)), b_(std::move(b_curve)), m0_(m0), h0_(h0),
      kappa_(std::move(kappa)), kappa_tag_(std::move(kappa_tag)) {
  if (!(m0_ > 0.0)) throw InputError("TransformSpec: m0 must be positive");
}

double TransformSpec::kappa_integral(double Q) const {
  // common fast paths: zero and constant kappa
  const double k0 = kappa_(0.0);
  const double kq = kappa_(Q);
  if (k0 == 0.0 && kq == 0.0 && kappa_(0.5 * Q) == 0.0) return 0.0;
  return integrate_1d([this](double u) { return kappa_(u); }, 0.0, Q);
}

double TransformSpec::D(double Q, double T) const {
  const double a = A(T);
  return m0_ / a * (kappa_(Q) + Adot(T) / a * Q);
}

double TransformSpec::cross_integral(double Q, double T) const {
  const double a = A(T), ad = Adot(T), add = Addot(T);
  return -(m0_ * ad / a) * Q * kappa_(Q) +
         0.5 * m0_ * Q * Q * (add / a - 3.0 * ad * ad / (a * a));
}

double TransformSpec::F(double Q, double T) const {
  return m0_ * (kappa_integral(Q) + 0.5 * Adot(T) / A(T) * Q * Q);
}

double TransformSpec::dF_dQ(double Q, double T) const {
  return m0_ * (kappa_(Q) + Adot(T) / A(T) * Q);
}

double TransformSpec::dF_dT(double Q, double T) const {
  const double a = A(T), ad = Adot(T);
  return 0.5 * m0_ * Q * Q * (Addot(T) / a - ad * ad / (a * a));
}

std::string TransformSpec::to_json() const {
  nlohmann::json j;
  j["m0"] = m0_;
  j["h0"] = h0_;
  j["kappa"] = kappa_tag_;
  auto& ag = j["A_grid"] = nlohmann::json::array();
  const auto& ax = a_.grid();
  const auto& av = a_.values();
  const auto& ad = a_.derivs();
  for (std::size_t i = 0; i < ax.size(); ++i)
    ag.push_back({ax[i], av[i], ad[i]});
  auto& bg = j["B_grid"] = nlohmann::json::array();
  const auto& bv = b_.values();
  for (std::size_t i = 0; i < ax.size(); ++i)
    bg.push_back({ax[i], bv[i]});
  return j.dump();
}

TransformSpec TransformSpec::from_json(const std::string& text,
                                       const ScalarFunction& mass,
                                       const ScalarFunction& kappa) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("TransformSpec JSON: ") + e.what());
  }
  const double m0 = j.at("m0").get<double>();
  const double h0 = j.at("h0").get<double>();
  const std::string tag = j.at("kappa").get<std::string>();
  std::vector<double> T, A, Adot, B, Bdot;
  for (const auto& row : j.at("A_grid")) {
    T.push_back(row.at(0).get<double>());
    A.push_back(row.at(1).get<double>());
    Adot.push_back(row.at(2).get<double>());
  }
  for (const auto& row : j.at("B_grid")) {
    if (B.size() >= T.size() || row.at(0).get<double>() != T[B.size()])
      throw ParseError("TransformSpec JSON: A_grid and B_grid share the T axis");
    B.push_back(row.at(1).get<double>());
  }
  if (B.size() != T.size())
    throw ParseError("TransformSpec JSON: grid size mismatch");
  // Bdot nodes are reconstructed from the determining relation
  Bdot.resize(T.size());
  for (std::size_t i = 0; i < T.size(); ++i)
    Bdot[i] = mass(B[i]) * A[i] * A[i] / m0;
  return TransformSpec(HermiteCurve(T, A, Adot), HermiteCurve(T, B, Bdot), m0, h0,
                       kappa, tag);
}

TransformSpec solve_coefficients(const HamiltonianSpec& spec, double m0, double h0,
                                 double A0, double Adot0, double B0, double T0,
                                 double T1, double tol, ScalarFunction kappa,
                                 const std::string& kappa_tag) {
  if (!spec.quadratic())
    throw SeparabilityError("solve_coefficients: potential must be declared quadratic");
  if (!(A0 > 0.0)) throw InputError("solve_coefficients: A(T0) must be positive");
  if (!(m0 > 0.0)) throw InputError("solve_coefficients: m0 must be positive");
  if (!(T1 > T0)) throw InputError("solve_coefficients: empty T span");

  const double a_floor = 1e-4 * A0;
  // y = (A, Adot, B)
  OdeRhs<3> rhs = [&](double, const std::array<double, 3>& y, std::array<double, 3>& dy) {
    const double a = std::max(y[0], a_floor);
    const double m = spec.mass(y[2]);
    const double v2 = spec.curvature(y[2]); // m w^2
    dy[0] = y[1];
    dy[1] = 2.0 * y[1] * y[1] / a + 2.0 * h0 / m0 * a -
            m * v2 * a * a * a * a * a / (m0 * m0);
    dy[2] = m * a * a / m0;
  };

  OdeOptions<3> opt;
  opt.rtol = opt.atol = tol;
  const double span = T1 - T0;
  const std::size_t n_store =
      std::clamp<std::size_t>(static_cast<std::size_t>(span / 5e-4), 500, 200000);
  opt.forced.resize(n_store);
  for (std::size_t i = 0; i < n_store; ++i)
    opt.forced[i] = T0 + span * (i + 1) / n_store;
  opt.keep_going = [a_floor](double, const std::array<double, 3>& y) {
    return y[0] > a_floor;
  };
  const auto sol = integrate_rk45<3>(rhs, T0, T1, {A0, Adot0, B0}, opt);
  if (sol.y.back()[0] <= a_floor)
    throw SingularityError("solve_coefficients: A(T) collapsed toward zero",
                           sol.t.back());

  // sanity check the quadratic declaration over the reached t interval
  const double res = spec.quadratic_residual(2.0, B0, sol.y.back()[2]);
  if (res > 1e-6)
    throw SeparabilityError("solve_coefficients: potential is not a pure quadratic, "
                            "sampled residual " + std::to_string(res));

  std::vector<double> T(sol.t), A(sol.t.size()), Adot(sol.t.size()), B(sol.t.size()),
      Bdot(sol.t.size());
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    A[i] = sol.y[i][0];
    Adot[i] = sol.y[i][1];
    B[i] = sol.y[i][2];
    Bdot[i] = sol.f[i][2]; // = m(B) A^2 / m0 at the node
  }
  HermiteCurve a_curve(T, std::move(A), std::move(Adot));
  HermiteCurve b_curve(std::move(T), std::move(B), std::move(Bdot));
  return TransformSpec(std::move(a_curve), std::move(b_curve), m0, h0, std::move(kappa),
                       kappa_tag);
}

std::array<double, 4> forward_map(const TransformSpec& tf, double Q, double T,
                                  double P, double PT) {
  const double a = tf.A(T);
  if (!(a > 0.0)) throw NumericalError("forward_map: A(T) must be positive");
  const double ad = tf.Adot(T);
  const double bd = tf.Bdot(T);
  const double d = tf.D(Q, T);
  const double q = a * Q;
  const double t = tf.B(T);
  const double p = P / a + d;
  const double pt = (PT - ad * Q / a * P + tf.cross_integral(Q, T)) / bd;
  return {q, t, p, pt};
}

std::array<double, 4> inverse_map(const TransformSpec& tf, double q, double t,
                                  double p, double pt) {
  const double T = tf.B_inverse(t);
  const double a = tf.A(T);
  const double Q = q / a;
  const double P = (p - tf.D(Q, T)) * a;
  const double PT = tf.Bdot(T) * pt + tf.Adot(T) * Q / a * P - tf.cross_integral(Q, T);
  return {Q, T, P, PT};
}

Jacobian4 jacobian(const TransformSpec& tf, double Q, double T, double P, double PT) {
  Jacobian4 jac;
  jac.at = {Q, T, P, PT};
  std::array<double, 4> x{Q, T, P, PT};
  // fifth-order-accurate central stencil; a wider step keeps rounding noise
  // out of the symplectic residual
  for (int col = 0; col < 4; ++col) {
    const double h = 1e-4 * std::max(1.0, std::fabs(x[col]));
    auto at = [&](double offset) {
      auto xx = x;
      xx[col] += offset;
      return forward_map(tf, xx[0], xx[1], xx[2], xx[3]);
    };
    const auto fp2 = at(2 * h), fp1 = at(h), fm1 = at(-h), fm2 = at(-2 * h);
    for (int row = 0; row < 4; ++row)
      jac.M(row, col) =
          (-fp2[row] + 8.0 * fp1[row] - 8.0 * fm1[row] + fm2[row]) / (12.0 * h);
  }
  return jac;
}

double symplectic_residual(const Jacobian4& jac) {
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J(0, 2) = 1.0;
  J(1, 3) = 1.0;
  J(2, 0) = -1.0;
  J(3, 1) = -1.0;
  const Eigen::Matrix4d R = jac.M.transpose() * J * jac.M - J;
  return R.cwiseAbs().maxCoeff();
}

InvariantSpec new_potential(const TransformSpec& tf, const HamiltonianSpec& spec,
                            double sep_tol) {
  const double Tlo = tf.T_begin(), Thi = tf.T_end();
  const double T_ref = 0.5 * (Tlo + Thi);
  const double m0 = tf.m0();

  // captured by value: the returned spec must outlive the arguments
  auto vbar_at = [tf, spec, m0](double Q, double T) {
    const double a = tf.A(T), ad = tf.Adot(T), add = tf.Addot(T);
    const double k = tf.kappa(Q);
    const double m = spec.mass(tf.B(T));
    return 0.5 * m0 * k * k +
           0.5 * m0 * Q * Q * (add / a - 2.0 * ad * ad / (a * a)) +
           m * a * a / m0 * spec.potential(a * Q, tf.B(T));
  };

  // T-independence check at a spread of reference times and positions
  for (int i = 0; i < 8; ++i) {
    const double T = Tlo + (Thi - Tlo) * (i + 0.5) / 8.0;
    for (double Q : {0.3, 1.0, 2.0}) {
      const double dev = std::fabs(vbar_at(Q, T) - vbar_at(Q, T_ref));
      if (dev > sep_tol)
        throw SeparabilityError("new_potential: T-dependence " + std::to_string(dev) +
                                " beyond sep_tol (non-quadratic potential leaked in)");
    }
  }

  InvariantSpec inv;
  inv.m0 = m0;
  inv.kappa = ScalarFunction::unary([tf](double Q) { return tf.kappa(Q); },
                                    [tf](double Q) { return tf.kappa_prime(Q); },
                                    [tf](double Q) {
                                      const double h = fd_step2(Q);
                                      return (tf.kappa(Q + h) - 2 * tf.kappa(Q) +
                                              tf.kappa(Q - h)) / (h * h);
                                    },
                                    "kappa");
  inv.Vbar = ScalarFunction::unary([vbar_at, T_ref](double Q) { return vbar_at(Q, T_ref); },
                                   "Vbar");
  return inv;
}

double invariant_I(const InvariantSpec& inv, double Q, double P) {
  return P * P / (2.0 * inv.m0) + inv.kappa(Q) * P + inv.Vbar(Q);
}

double generating_F3(const TransformSpec& tf, double p, double pt, double Q, double T) {
  return -tf.B(T) * pt - tf.A(T) * Q * p + tf.F(Q, T);
}

double tilde_hamiltonian(const InvariantSpec& inv, const TransformSpec& tf, double Q,
                         double Ptilde, double T) {
  return invariant_I(inv, Q, Ptilde - tf.dF_dQ(Q, T)) - tf.dF_dT(Q, T);
}

double constraint_new(const TransformSpec& tf, const HamiltonianSpec& spec, double Q,
                      double T, double P, double PT) {
  const double a = tf.A(T), ad = tf.Adot(T), bd = tf.Bdot(T);
  const double t = tf.B(T);
  const double m = spec.mass(t);
  const double d = tf.D(Q, T);
  const double bracket = -bd * P * P / (2.0 * m * a * a) +
                         (ad * Q / a - bd * d / (m * a)) * P - tf.cross_integral(Q, T) -
                         bd * d * d / (2.0 * m) - bd * spec.potential(a * Q, t);
  return (PT - bracket) / bd;
}

namespace {

using Obs4 = std::function<double(const std::array<double, 4>&)>;

std::array<double, 4> gradient4(const Obs4& f, const std::array<double, 4>& s) {
  std::array<double, 4> g{};
  for (int i = 0; i < 4; ++i) {
    const double h = fd_step1(s[i]);
    auto hi = s, lo = s;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// {f,g} in the new variables (Q, T, P, P_T)
double poisson4(const Obs4& f, const Obs4& g, const std::array<double, 4>& s) {
  const auto df = gradient4(f, s);
  const auto dg = gradient4(g, s);
  return df[0] * dg[2] + df[1] * dg[3] - df[2] * dg[0] - df[3] * dg[1];
}

// Partials of the new-variable constraint. The T step spans several stored
// interpolation segments, averaging out their curvature granularity; the
// other directions are smooth and take the standard step.
std::array<double, 4> phi_gradient(const TransformSpec& tf, const HamiltonianSpec& spec,
                                   const std::array<double, 4>& s) {
  auto phi = [&](double Q, double T, double P, double PT) {
    return constraint_new(tf, spec, Q, T, P, PT);
  };
  std::array<double, 4> g{};
  const double hQ = fd_step1(s[0]);
  g[0] = (phi(s[0] + hQ, s[1], s[2], s[3]) - phi(s[0] - hQ, s[1], s[2], s[3])) / (2 * hQ);
  const double hT = std::max(1e-3, fd_step1(s[1]));
  g[1] = (phi(s[0], s[1] + hT, s[2], s[3]) - phi(s[0], s[1] - hT, s[2], s[3])) / (2 * hT);
  const double hP = fd_step1(s[2]);
  g[2] = (phi(s[0], s[1], s[2] + hP, s[3]) - phi(s[0], s[1], s[2] - hP, s[3])) / (2 * hP);
  const double hPT = fd_step1(s[3]);
  g[3] = (phi(s[0], s[1], s[2], s[3] + hPT) - phi(s[0], s[1], s[2], s[3] - hPT)) / (2 * hPT);
  return g;
}

double poisson_with_phi(const Obs4& f, const std::array<double, 4>& dphi,
                        const std::array<double, 4>& s) {
  const auto df = gradient4(f, s);
  return df[0] * dphi[2] + df[1] * dphi[3] - df[2] * dphi[0] - df[3] * dphi[1];
}

} // namespace

double dirac_bracket_new(const TransformSpec& tf, const HamiltonianSpec& spec,
                         const Obs4& f, const Obs4& g, const std::array<double, 4>& s) {
  const auto dphi = phi_gradient(tf, spec, s);
  Obs4 eta = [](const std::array<double, 4>& x) { return x[1]; };
  const double phi_eta = -poisson_with_phi(eta, dphi, s); // {phi, eta}
  if (std::fabs(phi_eta) < 1e-14)
    throw NumericalError("dirac_bracket_new: {phi, eta} vanished");
  const double f_phi = poisson_with_phi(f, dphi, s);
  const double eta_g = -poisson4(g, eta, s);
  const double f_eta = poisson4(f, eta, s);
  const double phi_g = -poisson_with_phi(g, dphi, s);
  return poisson4(f, g, s) + (f_phi * eta_g - f_eta * phi_g) / phi_eta;
}

BracketReport dirac_brackets_new(const TransformSpec& tf, const HamiltonianSpec& spec,
                                 const std::array<double, 4>& s) {
  Obs4 Q = [](const std::array<double, 4>& x) { return x[0]; };
  Obs4 T = [](const std::array<double, 4>& x) { return x[1]; };
  Obs4 P = [](const std::array<double, 4>& x) { return x[2]; };
  Obs4 PT = [](const std::array<double, 4>& x) { return x[3]; };
  BracketReport rep;
  rep.kind = BracketReport::Kind::dirac;
  rep.at = ExtendedState{s[0], s[1], s[2], s[3], 0.0};
  rep.entries[{"Q", "P"}] = dirac_bracket_new(tf, spec, Q, P, s);
  rep.entries[{"Q", "PT"}] = dirac_bracket_new(tf, spec, Q, PT, s);
  rep.entries[{"P", "PT"}] = dirac_bracket_new(tf, spec, P, PT, s);
  rep.entries[{"T", "PT"}] = dirac_bracket_new(tf, spec, T, PT, s);
  return rep;
}

TransformedTrajectory integrate_extended_new(const TransformSpec& tf,
                                             const HamiltonianSpec& spec,
                                             const ScalarFunction& lambda,
                                             const std::array<double, 4>& init,
                                             double tau0, double tau_end, double tol,
                                             const std::vector<double>& samples) {
  OdeRhs<4> rhs = [&](double tau, const std::array<double, 4>& y,
                      std::array<double, 4>& dy) {
    const double lam = lambda(tau);
    const auto g = phi_gradient(tf, spec, y);
    dy[0] = lam * g[2];
    dy[1] = lam * g[3];
    dy[2] = -lam * g[0];
    dy[3] = -lam * g[1];
  };
  OdeOptions<4> opt;
  opt.rtol = opt.atol = tol;
  opt.forced = samples;
  const auto sol = integrate_rk45<4>(rhs, tau0, tau_end, init, opt);
  TransformedTrajectory traj;
  traj.tau = sol.t;
  traj.states = sol.y;
  traj.lambda.reserve(sol.t.size());
  for (double tau : sol.t) traj.lambda.push_back(lambda(tau));
  return traj;
}

double gauge_variation_F(const TransformSpec& tf, const HamiltonianSpec& spec,
                         const TransformedTrajectory& traj) {
  if (traj.tau.size() < 3) throw InputError("gauge_variation_F: too few samples");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < traj.tau.size(); ++i) {
    const auto& s = traj.states[i];
    const double lam = traj.lambda[i];
    // {F, lambda phi} at fixed tau; F carries no momentum dependence
    const auto dphi = phi_gradient(tf, spec, s);
    const double bracket =
        lam * (tf.dF_dQ(s[0], s[1]) * dphi[2] + tf.dF_dT(s[0], s[1]) * dphi[3]);
    // dF/dtau by a second-order non-uniform three-point stencil
    const auto& sm = traj.states[i - 1];
    const auto& sp = traj.states[i + 1];
    const double a = traj.tau[i] - traj.tau[i - 1];
    const double b = traj.tau[i + 1] - traj.tau[i];
    const double Fm = tf.F(sm[0], sm[1]);
    const double F0 = tf.F(s[0], s[1]);
    const double Fp = tf.F(sp[0], sp[1]);
    const double dF = (a * a * Fp - b * b * Fm + (b * b - a * a) * F0) /
                      (a * b * (a + b));
    worst = std::max(worst, std::fabs(bracket - dF));
  }
  return worst;
}

} // namespace extphase
