#include "core/hamiltonian.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace extphase {

HamiltonianSpec::HamiltonianSpec(ScalarFunction mass, ScalarFunction potential,
                                 bool quadratic)
    : mass_(std::move(mass)), potential_(std::move(potential)), quadratic_(quadratic) {
  if (mass_.arity() != 1) throw InputError("mass must be a function of t only");
  if (potential_.arity() != 2) throw InputError("potential must be a function of (q, t)");
}

double HamiltonianSpec::mass(double t) const {
  const double m = mass_(t);
  if (!(m > 0.0)) throw InputError("mass(t) must be positive, got m(" +
                                   std::to_string(t) + ") = " + std::to_string(m));
  return m;
}

double HamiltonianSpec::mass_deriv(double t) const { return mass_.deriv(t); }

double HamiltonianSpec::quadratic_residual(double q_max, double t0, double t1,
                                           int samples) const {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      const double q = -q_max + 2.0 * q_max * i / (samples - 1);
      const double t = t0 + (t1 - t0) * j / (samples - 1);
      const double v = potential_(q, t);
      const double fit = 0.5 * potential_.dxx(q, t) * q * q;
      worst = std::max(worst, std::fabs(v - fit));
    }
  }
  return worst;
}

double eval_hamiltonian(const HamiltonianSpec& spec, const ReducedState& s) {
  const double m = spec.mass(s.t);
  const double h = s.p * s.p / (2.0 * m) + spec.potential(s.q, s.t);
  if (!std::isfinite(h))
    throw NumericalError("eval_hamiltonian produced a non-finite value");
  return h;
}

double eval_constraint(const HamiltonianSpec& spec, const ExtendedState& s) {
  const double h = eval_hamiltonian(spec, ReducedState{s.q, s.p, s.t});
  const double phi = s.pt + h;
  if (!std::isfinite(phi))
    throw NumericalError("eval_constraint produced a non-finite value");
  return phi;
}

double energy_rate(const HamiltonianSpec& spec, const ReducedState& s) {
  const double m = spec.mass(s.t);
  const double mdot = spec.mass_deriv(s.t);
  const double r = -(mdot / (m * m)) * s.p * s.p / 2.0 + spec.dV_dt(s.q, s.t);
  if (!std::isfinite(r))
    throw NumericalError("energy_rate produced a non-finite value");
  return r;
}

} // namespace extphase
