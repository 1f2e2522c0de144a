#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/hamiltonian.hpp"
#include "core/hermite.hpp"
#include "core/scalar_function.hpp"
#include "dynamics/dynamics.hpp"

namespace extphase {

// Solved coefficient functions of the extended-phase-space canonical map
//
//   q = A(T) Q,   t = B(T),   p = P/A + D(Q,T),
//   pt = [P_T - (Adot Q / A) P + Int(Q,T)] / Bdot,
//
// with D = (m0/A)[kappa(Q) + (Adot/A) Q] and Int the closed form of
// the integral of (A' Ddot - Adot D') in Q. A and B are stored as dense
// Hermite node grids; every derivative used by the map is the derivative
// of the interpolant itself, which keeps the map symplectic to rounding
// between nodes.
class TransformSpec {
public:
  TransformSpec() = default;
  TransformSpec(HermiteCurve a_curve, HermiteCurve b_curve, double m0, double h0,
                ScalarFunction kappa, std::string kappa_tag = "0");

  double m0() const { return m0_; }
  double h0() const { return h0_; }
  const std::string& kappa_tag() const { return kappa_tag_; }
  double T_begin() const { return a_.x_begin(); }
  double T_end() const { return a_.x_end(); }

  double A(double T) const { return a_.value(T); }
  double Adot(double T) const { return a_.deriv(T); }
  double Addot(double T) const { return a_.second(T); }
  double B(double T) const { return b_.value(T); }
  double Bdot(double T) const { return b_.deriv(T); }
  double B_inverse(double t) const { return b_.inverse(t); }

  double kappa(double Q) const { return kappa_(Q); }
  double kappa_prime(double Q) const { return kappa_.deriv(Q); }
  double kappa_integral(double Q) const; // from 0 by adaptive Simpson

  double D(double Q, double T) const;
  // closed form of Int(Q,T) = integral_0^Q (A' Ddot - Adot D') dQ
  double cross_integral(double Q, double T) const;

  // boundary term F(Q,T) = m0 [ int_0^Q kappa + (Adot/A) Q^2 / 2 ]
  double F(double Q, double T) const;
  double dF_dQ(double Q, double T) const;
  double dF_dT(double Q, double T) const;

  std::string to_json() const;
  static TransformSpec from_json(const std::string& text,
                                 const ScalarFunction& mass,
                                 const ScalarFunction& kappa = ScalarFunction::constant(0.0));

  const HermiteCurve& a_curve() const { return a_; }
  const HermiteCurve& b_curve() const { return b_; }

private:
  HermiteCurve a_, b_;
  double m0_ = 1.0, h0_ = 0.5;
  ScalarFunction kappa_ = ScalarFunction::constant(0.0);
  std::string kappa_tag_ = "0";
};

// Autonomous side of the transformation: I(Q,P) = P^2/2m0 + kappa(Q) P + Vbar(Q).
struct InvariantSpec {
  double m0 = 1.0;
  ScalarFunction kappa = ScalarFunction::constant(0.0);
  ScalarFunction Vbar; // unary in Q
};

struct Jacobian4 {
  Eigen::Matrix4d M;          // rows (q,t,p,pt) x cols (Q,T,P,P_T)
  std::array<double, 4> at{}; // base point (Q,T,P,P_T)
};

// Trajectory of the gauge-fixed extended flow in the new variables.
struct TransformedTrajectory {
  std::vector<double> tau;
  std::vector<std::array<double, 4>> states; // (Q, T, P, P_T)
  std::vector<double> lambda;                // multiplier at the samples
};

// Integrate Bdot = m(B) A^2 / m0 jointly with the h0-reduced determining
// equation for A(T); requires a pure quadratic potential. kappa passes
// through into the returned spec.
TransformSpec solve_coefficients(const HamiltonianSpec& spec, double m0, double h0,
                                 double A0, double Adot0, double B0, double T0,
                                 double T1, double tol,
                                 ScalarFunction kappa = ScalarFunction::constant(0.0),
                                 const std::string& kappa_tag = "0");

std::array<double, 4> forward_map(const TransformSpec& tf, double Q, double T,
                                  double P, double PT);
std::array<double, 4> inverse_map(const TransformSpec& tf, double q, double t,
                                  double p, double pt);

Jacobian4 jacobian(const TransformSpec& tf, double Q, double T, double P, double PT);

// max-norm of M^T J M - J
double symplectic_residual(const Jacobian4& jac);

// Time-independent potential of the transformed system, Eq-level definition
// evaluated at a reference T with a separability cross-check at other T.
InvariantSpec new_potential(const TransformSpec& tf, const HamiltonianSpec& spec,
                            double sep_tol = 1e-6);

double invariant_I(const InvariantSpec& inv, double Q, double P);

// F3(p, pt, Q, T) = -B pt - A Q p + F(Q,T)
double generating_F3(const TransformSpec& tf, double p, double pt, double Q, double T);

// Itilde(Q, Ptilde, T) = I(Q, Ptilde - dF/dQ) - dF/dT
double tilde_hamiltonian(const InvariantSpec& inv, const TransformSpec& tf, double Q,
                         double Ptilde, double T);

// Constraint in the new variables, with the overall 1/Bdot factor; equals
// the old-variable constraint composed with the forward map.
double constraint_new(const TransformSpec& tf, const HamiltonianSpec& spec, double Q,
                      double T, double P, double PT);

// Brackets in the new variables, eliminating (phi, eta = T - g(tau)).
double dirac_bracket_new(const TransformSpec& tf, const HamiltonianSpec& spec,
                         const std::function<double(const std::array<double, 4>&)>& f,
                         const std::function<double(const std::array<double, 4>&)>& g,
                         const std::array<double, 4>& s);
BracketReport dirac_brackets_new(const TransformSpec& tf, const HamiltonianSpec& spec,
                                 const std::array<double, 4>& s);

// Extended flow of lambda * phi in the new variables via finite-difference
// partials of the constraint. Samples are forced points in tau.
TransformedTrajectory integrate_extended_new(const TransformSpec& tf,
                                             const HamiltonianSpec& spec,
                                             const ScalarFunction& lambda,
                                             const std::array<double, 4>& init,
                                             double tau0, double tau_end, double tol,
                                             const std::vector<double>& samples = {});

// max_j |{F, lambda phi}_PB - dF/dtau| along a transformed trajectory with
// uniform tau samples; dF/dtau by central differences of the samples.
double gauge_variation_F(const TransformSpec& tf, const HamiltonianSpec& spec,
                         const TransformedTrajectory& traj);

} // namespace extphase
