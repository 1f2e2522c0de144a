#pragma once

#include "core/scalar_function.hpp"

namespace extphase {

// Point of the reduced phase space (q, p) at time t.
struct ReducedState {
  double q = 0.0;
  double p = 0.0;
  double t = 0.0;
};

// Point of the extended phase space. Time is a dynamical coordinate with
// conjugate momentum pt; tau is the evolution parameter.
struct ExtendedState {
  double q = 0.0;  // position coordinate
  double t = 0.0;  // time coordinate
  double p = 0.0;  // momentum conjugate to q
  double pt = 0.0; // momentum conjugate to t
  double tau = 0.0;
};

// H = p^2 / (2 m(t)) + V(q, t). The quadratic flag declares V to be a pure
// ~q^2 potential; it is verified by sampling, never inferred.
class HamiltonianSpec {
public:
  HamiltonianSpec() = default;
  HamiltonianSpec(ScalarFunction mass, ScalarFunction potential, bool quadratic);

  double mass(double t) const; // validated positive
  double mass_deriv(double t) const;
  const ScalarFunction& mass_fn() const { return mass_; }
  const ScalarFunction& potential_fn() const { return potential_; }
  bool quadratic() const { return quadratic_; }

  double potential(double q, double t) const { return potential_(q, t); }
  double dV_dq(double q, double t) const { return potential_.dx(q, t); }
  double dV_dt(double q, double t) const { return potential_.dy(q, t); }
  // curvature m(t) w^2(t) of a quadratic potential, from d^2V/dq^2
  double curvature(double t) const { return potential_.dxx(0.0, t); }

  // max |V - (1/2) d2V/dq2 q^2| over a sample box; 0 for a pure quadratic
  double quadratic_residual(double q_max, double t0, double t1, int samples = 25) const;

private:
  ScalarFunction mass_;
  ScalarFunction potential_;
  bool quadratic_ = false;
};

// p^2/(2m) + V
double eval_hamiltonian(const HamiltonianSpec& spec, const ReducedState& s);

// primary constraint phi = pt + H(q, p, t)
double eval_constraint(const HamiltonianSpec& spec, const ExtendedState& s);

// dH/dt along the flow = -(mdot/m^2) p^2/2 + dV/dt
double energy_rate(const HamiltonianSpec& spec, const ReducedState& s);

} // namespace extphase
