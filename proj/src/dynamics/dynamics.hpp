#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "core/hamiltonian.hpp"

namespace extphase {

// Gauge choice for the extended system: either a Lagrange multiplier
// lambda(tau) > 0 or a time map t = g(tau), strictly monotone with
// g(tau1) = t1, g(tau2) = t2. For a time map the multiplier is g'(tau).
struct GaugeSpec {
  enum class Kind { multiplier, time_map };
  Kind kind = Kind::multiplier;
  ScalarFunction fn; // lambda(tau) or g(tau)
  double tau1 = 0.0, tau2 = 1.0;
  double t1 = 0.0, t2 = 1.0;

  static GaugeSpec multiplier(ScalarFunction lambda, double tau1, double tau2);
  static GaugeSpec time_map(ScalarFunction g, double tau1, double tau2);

  double lambda(double tau) const;
  void validate() const;
};

// Time-ordered samples of a reduced or extended flow with per-sample
// diagnostics keyed by name.
struct Trajectory {
  bool extended = false;
  std::vector<double> param; // t for reduced flows, tau for extended ones
  std::vector<ReducedState> reduced_states;
  std::vector<ExtendedState> extended_states;
  std::map<std::string, std::vector<double>> diagnostics;

  std::size_t size() const { return param.size(); }
  void write_csv(const std::string& path) const;
};

using Observable = std::function<double(const ExtendedState&)>;

struct BracketReport {
  enum class Kind { poisson, dirac };
  Kind kind = Kind::dirac;
  ExtendedState at;
  std::map<std::pair<std::string, std::string>, double> entries;
  double get(const std::string& a, const std::string& b) const;
};

// dq/dt = p/m(t), dp/dt = -dV/dq. Diagnostics: H.
// Points in `samples` are hit exactly in addition to the adaptive nodes.
Trajectory integrate_reduced(const HamiltonianSpec& spec, const ReducedState& init,
                             double t_end, double tol,
                             const std::vector<double>& samples = {});

// Gauge-fixed extended flow q' = lambda p/m, p' = -lambda dV/dq, t' = lambda,
// pt' = -lambda dH/dt. The initial state must satisfy |phi| <= constraint_tol;
// drift beyond 100x constraint_tol aborts. Diagnostics: phi, H.
Trajectory integrate_extended(const HamiltonianSpec& spec, const GaugeSpec& gauge,
                              const ExtendedState& init, double tau_end, double tol,
                              double constraint_tol = 1e-8,
                              const std::vector<double>& samples = {});

// Canonical Poisson bracket on the extended phase space, by central finite
// differences in (q, t, p, pt).
double poisson_bracket(const Observable& f, const Observable& g, const ExtendedState& s);

// Dirac bracket eliminating the pair (phi, eta) with eta = t - g(tau);
// the denominator {phi, eta} is evaluated numerically.
double dirac_bracket_old(const HamiltonianSpec& spec, const Observable& f,
                         const Observable& g, const ExtendedState& s);

// The four non-trivial coordinate brackets (q,p), (q,pt), (p,pt), (t,pt).
BracketReport dirac_brackets_old(const HamiltonianSpec& spec, const ExtendedState& s,
                                 double constraint_tol = 1e-8);

// Determinant of the velocity Hessian of the extended Lagrangian
// L = [m/2 (q'/t')^2 - V] t', by finite differences. Expected ~ 0.
double hessian_rank_check(const HamiltonianSpec& spec, double qdot, double tdot,
                          const ExtendedState& s);

} // namespace extphase
