#include "dynamics/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/errors.hpp"
#include "dynamics/ode.hpp"

namespace extphase {

GaugeSpec GaugeSpec::multiplier(ScalarFunction lambda, double tau1, double tau2) {
  GaugeSpec g;
  g.kind = Kind::multiplier;
  g.fn = std::move(lambda);
  g.tau1 = tau1;
  g.tau2 = tau2;
  return g;
}

GaugeSpec GaugeSpec::time_map(ScalarFunction gfn, double tau1, double tau2) {
  GaugeSpec g;
  g.kind = Kind::time_map;
  g.fn = std::move(gfn);
  g.tau1 = tau1;
  g.tau2 = tau2;
  g.t1 = g.fn(tau1);
  g.t2 = g.fn(tau2);
  return g;
}

double GaugeSpec::lambda(double tau) const {
  return kind == Kind::multiplier ? fn(tau) : fn.deriv(tau);
}

void GaugeSpec::validate() const {
  if (!(tau2 > tau1)) throw InputError("gauge: tau2 must exceed tau1");
  const int n = 64;
  double prev = kind == Kind::time_map ? fn(tau1) : 0.0;
  for (int i = 0; i <= n; ++i) {
    const double tau = tau1 + (tau2 - tau1) * i / n;
    if (kind == Kind::multiplier) {
      if (!(fn(tau) > 0.0))
        throw InputError("gauge: lambda(tau) must stay positive");
    } else if (i > 0) {
      const double cur = fn(tau);
      if (!(cur > prev))
        throw InputError("gauge: g(tau) must be strictly increasing");
      prev = cur;
    }
  }
}

void Trajectory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const bool has_I = diagnostics.count("I") > 0;
  const bool has_H = diagnostics.count("H") > 0;
  std::string header = "param,q,p,t";
  if (extended) header += ",p_t,phi";
  if (has_H) header += ",H";
  if (has_I) header += ",I";
  out << header << "\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < param.size(); ++i) {
    out << fmt(param[i]);
    if (extended) {
      const auto& s = extended_states[i];
      out << ',' << fmt(s.q) << ',' << fmt(s.p) << ',' << fmt(s.t) << ','
          << fmt(s.pt) << ',' << fmt(diagnostics.at("phi")[i]);
    } else {
      const auto& s = reduced_states[i];
      out << ',' << fmt(s.q) << ',' << fmt(s.p) << ',' << fmt(s.t);
    }
    if (has_H) out << ',' << fmt(diagnostics.at("H")[i]);
    if (has_I) out << ',' << fmt(diagnostics.at("I")[i]);
    out << "\n";
  }
}

double BracketReport::get(const std::string& a, const std::string& b) const {
  auto it = entries.find({a, b});
  if (it != entries.end()) return it->second;
  it = entries.find({b, a});
  if (it != entries.end()) return -it->second;
  throw InputError("bracket report has no entry (" + a + ", " + b + ")");
}

Trajectory integrate_reduced(const HamiltonianSpec& spec, const ReducedState& init,
                             double t_end, double tol,
                             const std::vector<double>& samples) {
  if (!(t_end > init.t)) throw InputError("integrate_reduced: t_end must exceed init.t");
  if (!(tol > 0.0)) throw InputError("integrate_reduced: tol must be positive");

  OdeRhs<2> rhs = [&spec](double t, const std::array<double, 2>& y,
                          std::array<double, 2>& dy) {
    dy[0] = y[1] / spec.mass(t);
    dy[1] = -spec.dV_dq(y[0], t);
  };
  OdeOptions<2> opt;
  opt.rtol = opt.atol = tol;
  opt.forced = samples;
  const auto sol = integrate_rk45<2>(rhs, init.t, t_end, {init.q, init.p}, opt);

  Trajectory traj;
  traj.extended = false;
  traj.param = sol.t;
  traj.reduced_states.reserve(sol.t.size());
  auto& H = traj.diagnostics["H"];
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    ReducedState s{sol.y[i][0], sol.y[i][1], sol.t[i]};
    traj.reduced_states.push_back(s);
    H.push_back(eval_hamiltonian(spec, s));
  }
  return traj;
}

Trajectory integrate_extended(const HamiltonianSpec& spec, const GaugeSpec& gauge,
                              const ExtendedState& init, double tau_end, double tol,
                              double constraint_tol,
                              const std::vector<double>& samples) {
  gauge.validate();
  if (!(tau_end > init.tau))
    throw InputError("integrate_extended: tau_end must exceed init.tau");
  const double phi0 = eval_constraint(spec, init);
  if (std::fabs(phi0) > constraint_tol)
    throw InputError("integrate_extended: initial state is off-shell, |phi| = " +
                     std::to_string(std::fabs(phi0)));

  // y = (q, t, p, pt)
  OdeRhs<4> rhs = [&](double tau, const std::array<double, 4>& y,
                      std::array<double, 4>& dy) {
    const double lam = gauge.lambda(tau);
    const ReducedState rs{y[0], y[2], y[1]};
    dy[0] = lam * y[2] / spec.mass(y[1]);
    dy[1] = lam;
    dy[2] = -lam * spec.dV_dq(y[0], y[1]);
    dy[3] = -lam * energy_rate(spec, rs);
  };
  OdeOptions<4> opt;
  opt.rtol = opt.atol = tol;
  opt.forced = samples;
  const auto sol = integrate_rk45<4>(rhs, init.tau, tau_end,
                                     {init.q, init.t, init.p, init.pt}, opt);

  Trajectory traj;
  traj.extended = true;
  traj.param = sol.t;
  auto& phi_d = traj.diagnostics["phi"];
  auto& H_d = traj.diagnostics["H"];
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    ExtendedState s{sol.y[i][0], sol.y[i][1], sol.y[i][2], sol.y[i][3], sol.t[i]};
    const double phi = eval_constraint(spec, s);
    if (std::fabs(phi) > 100.0 * constraint_tol)
      throw ConstraintViolation("constraint drift |phi| = " + std::to_string(std::fabs(phi)) +
                                " at tau = " + std::to_string(sol.t[i]));
    traj.extended_states.push_back(s);
    phi_d.push_back(phi);
    H_d.push_back(eval_hamiltonian(spec, ReducedState{s.q, s.p, s.t}));
  }
  return traj;
}

namespace {

// central differences of an observable in each extended coordinate
std::array<double, 4> observable_gradient(const Observable& f, const ExtendedState& s) {
  std::array<double, 4> g{};
  ExtendedState lo = s, hi = s;
  auto diff = [&](double ExtendedState::*field, double v) {
    const double h = fd_step1(v);
    hi = s;
    lo = s;
    hi.*field = v + h;
    lo.*field = v - h;
    return (f(hi) - f(lo)) / (2.0 * h);
  };
  g[0] = diff(&ExtendedState::q, s.q);
  g[1] = diff(&ExtendedState::t, s.t);
  g[2] = diff(&ExtendedState::p, s.p);
  g[3] = diff(&ExtendedState::pt, s.pt);
  return g;
}

} // namespace

double poisson_bracket(const Observable& f, const Observable& g, const ExtendedState& s) {
  const auto df = observable_gradient(f, s);
  const auto dg = observable_gradient(g, s);
  // {f,g} = f_q g_p + f_t g_pt - f_p g_q - f_pt g_t
  const double v = df[0] * dg[2] + df[1] * dg[3] - df[2] * dg[0] - df[3] * dg[1];
  if (!std::isfinite(v)) throw NumericalError("poisson_bracket non-finite");
  return v;
}

double dirac_bracket_old(const HamiltonianSpec& spec, const Observable& f,
                         const Observable& g, const ExtendedState& s) {
  Observable phi = [&spec](const ExtendedState& x) { return eval_constraint(spec, x); };
  // eta = t - g(tau); at fixed tau only the t-dependence matters
  Observable eta = [](const ExtendedState& x) { return x.t; };
  const double denom = poisson_bracket(phi, eta, s);
  if (std::fabs(denom) < 1e-12)
    throw NumericalError("dirac_bracket: {phi, eta} vanished");
  return poisson_bracket(f, g, s) +
         (poisson_bracket(f, phi, s) * poisson_bracket(eta, g, s) -
          poisson_bracket(f, eta, s) * poisson_bracket(phi, g, s)) /
             denom;
}

BracketReport dirac_brackets_old(const HamiltonianSpec& spec, const ExtendedState& s,
                                 double constraint_tol) {
  const double phi = eval_constraint(spec, s);
  if (std::fabs(phi) > constraint_tol)
    throw InputError("dirac_brackets_old: state is off-shell");
  Observable q = [](const ExtendedState& x) { return x.q; };
  Observable t = [](const ExtendedState& x) { return x.t; };
  Observable p = [](const ExtendedState& x) { return x.p; };
  Observable pt = [](const ExtendedState& x) { return x.pt; };
  BracketReport rep;
  rep.kind = BracketReport::Kind::dirac;
  rep.at = s;
  rep.entries[{"q", "p"}] = dirac_bracket_old(spec, q, p, s);
  rep.entries[{"q", "pt"}] = dirac_bracket_old(spec, q, pt, s);
  rep.entries[{"p", "pt"}] = dirac_bracket_old(spec, p, pt, s);
  rep.entries[{"t", "pt"}] = dirac_bracket_old(spec, t, pt, s);
  return rep;
}

double hessian_rank_check(const HamiltonianSpec& spec, double qdot, double tdot,
                          const ExtendedState& s) {
  if (tdot == 0.0) throw InputError("hessian_rank_check: tdot must be nonzero");
  auto L = [&](double qd, double td) {
    return (spec.mass(s.t) / 2.0 * (qd / td) * (qd / td) -
            spec.potential(s.q, s.t)) * td;
  };
  // fourth-order stencils: the 1/tdot tail of L makes second-order ones too
  // blunt near small tdot
  const double hq = fd_step2(qdot);
  const double ht = fd_step2(tdot) * std::min(1.0, std::fabs(tdot));
  auto second = [](auto f, double h) {
    return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) /
           (12 * h * h);
  };
  const double Lqq = second([&](double d) { return L(qdot + d, tdot); }, hq);
  const double Ltt = second([&](double d) { return L(qdot, tdot + d); }, ht);
  auto dq4 = [&](double td) {
    return (-L(qdot + 2 * hq, td) + 8 * L(qdot + hq, td) - 8 * L(qdot - hq, td) +
            L(qdot - 2 * hq, td)) / (12 * hq);
  };
  const double Lqt = (-dq4(tdot + 2 * ht) + 8 * dq4(tdot + ht) - 8 * dq4(tdot - ht) +
                      dq4(tdot - 2 * ht)) / (12 * ht);
  return Lqq * Ltt - Lqt * Lqt;
}

} // namespace extphase
