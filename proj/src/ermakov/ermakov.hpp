#pragma once

#include <string>
#include <vector>

#include "core/scalar_function.hpp"
#include "dynamics/dynamics.hpp"

namespace extphase {

// Solution of rho'' + w^2(t) rho = 1/rho^3 on a node grid, with C1 cubic
// Hermite evaluation between nodes. rho stays positive by construction;
// the solver aborts with SingularityError when it collapses toward 0.
class ErmakovSolution {
public:
  ErmakovSolution() = default;
  ErmakovSolution(std::vector<double> t, std::vector<double> rho,
                  std::vector<double> rhodot, ScalarFunction omega);

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  const std::vector<double>& grid() const { return t_; }
  const std::vector<double>& rho_nodes() const { return rho_; }
  const std::vector<double>& rhodot_nodes() const { return rhodot_; }
  const ScalarFunction& omega() const { return omega_; }

  double rho(double t) const;
  double rhodot(double t) const;

  // |rho'' + w^2 rho - 1/rho^3| at an interior node, rho'' by finite
  // differences of the stored rhodot samples
  double residual(std::size_t node) const;

  void write_csv(const std::string& path) const;

private:
  std::size_t segment(double t) const;
  std::vector<double> t_, rho_, rhodot_, rhoddot_;
  ScalarFunction omega_;
};

// Integrate the auxiliary equation from (rho0 > 0, rhodot0).
ErmakovSolution solve_ermakov(const ScalarFunction& omega, double rho0, double rhodot0,
                              double t0, double t1, double tol,
                              const std::vector<double>& samples = {});

// Classic invariant I = (rho p - rhodot q)^2 / 2 + q^2 / (2 rho^2).
double lewis_invariant(double q, double p, double rho, double rhodot);

// Max relative deviation of I along a reduced trajectory, measured against
// its initial value with a small floor against I(0) ~ 0.
double invariant_drift(const Trajectory& traj, const ErmakovSolution& sol,
                       double floor = 1e-12);

} // namespace extphase
