#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/hamiltonian.hpp"
#include "transform/transform.hpp"

namespace extphase {

using cplx = std::complex<double>;

struct GridSpec {
  double q_min = -10.0, q_max = 10.0;
  int n_points = 256;
  int n_slices = 128;
  double hbar = 1.0;

  double dq() const { return (q_max - q_min) / (n_points - 1); }
  double q(int i) const { return q_min + dq() * i; }
  void validate() const;
};

// Finite-time propagator sampled on the spatial grid: k(f, i) advances from
// grid point i at t_i to grid point f at t_f.
struct Kernel {
  Eigen::MatrixXcd k;
  double t_i = 0.0, t_f = 0.0;
  GridSpec grid;

  // Riemann composition: (this after earlier), matrix product x dq
  Kernel compose_with(const Kernel& earlier) const;
  // Frobenius-relative difference, optionally restricted to the middle
  // half of the columns (wall-free region)
  double rel_l2_diff(const Kernel& other, bool interior_columns = false) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const; // dq * K * psi

  void save(const std::string& path) const;
  static Kernel load(const std::string& path);
};

struct WaveFunction {
  GridSpec grid; // n_slices unused here
  Eigen::VectorXcd psi;

  double norm() const;
  void normalize();
  static WaveFunction gaussian(const GridSpec& grid, double q0, double p0, double sigma);
  void write_csv(const std::string& path) const;
};

// Closed Gaussian form c * exp(i (a2 qf^2 + b qf qi + g2 qi^2 + d qf + z qi + e)).
// Slices of quadratic Hamiltonians live in this family and compose exactly,
// the intermediate integral running over the whole line as in the continuum
// expression; the spatial grid only samples the result.
struct GaussForm {
  cplx prefactor{1.0, 0.0};
  double a2 = 0, b = 0, g2 = 0, d = 0, z = 0, e = 0;

  cplx eval(double qf, double qi) const;
  GaussForm after(const GaussForm& earlier) const;
};

// Per-slice Gaussian from mass m, width eps, drift kappa(Q) ~ k0 + k1 Q and
// potential w0 + w1 q + w2 q^2, all midpoint-evaluated.
GaussForm slice_gauss(double m, double eps, double hbar, double k0, double k1,
                      double w0, double w1, double w2);

// Midpoint-rule short-time amplitude: the momentum integral done analytically.
cplx short_time_kernel(const HamiltonianSpec& spec, double q_j, double q_jm1,
                       double t_mid, double eps, double hbar);

// Product of n_slices short-time kernels over a uniform partition of
// [t_i, t_f]; quadratic potentials only (grid evolution covers the rest).
Kernel compose_kernel(const HamiltonianSpec& spec, const GridSpec& grid, double t_i,
                      double t_f);
// Same, over an explicit partition (used by the gauge-fixed construction).
Kernel compose_kernel_partition(const HamiltonianSpec& spec, const GridSpec& grid,
                                const std::vector<double>& t_nodes);

// Extended-phase-space amplitude with explicit time-slice variables and both
// delta families integrated out. tau_nodes defaults to a uniform grid of
// n_slices slices. The slice condition on g is checked per slice.
Kernel extended_kernel(const HamiltonianSpec& spec, const GridSpec& grid,
                       const ScalarFunction& g, double tau_i, double tau_f,
                       double gauge_tol = 1e-3,
                       const std::vector<double>& tau_nodes = {});

struct MeasureFactor {
  cplx value;        // endpoint formula 1/sqrt(A(T_0) A(T_N))
  double telescoped; // literal product with the midpoint pairing
};
MeasureFactor measure_factor(const TransformSpec& tf,
                             const std::vector<double>& slice_times);

// Factorized propagator: endpoint measure factor x boundary-term phase x
// autonomous kernel of I, mapped back to the q grid through q = A(T) Q.
Kernel factorized_kernel(const TransformSpec& tf, const InvariantSpec& inv,
                         const GridSpec& grid, double T_i, double T_f);

// Per-slice midpoint increments of the boundary term along a discrete path
// (the B_j sum) and the telescoped endpoint difference of F.
struct BoundaryTelescope {
  double slice_sum;
  double endpoint_diff;
};
BoundaryTelescope boundary_telescope(const TransformSpec& tf,
                                     const std::vector<double>& T_nodes,
                                     const std::vector<double>& Q_nodes);

struct EvolveResult {
  WaveFunction psi;
  bool accuracy_warning = false; // eps * max|V| / hbar exceeded 0.5 in a step
};

// Cayley (Crank-Nicolson) unitary grid evolution, hard walls at the grid
// ends. Time-dependent coefficients are evaluated at the step midpoint.
EvolveResult evolve_reduced(const HamiltonianSpec& spec, const WaveFunction& psi0,
                            double t_i, double t_f, int n_steps);
EvolveResult evolve_invariant(const InvariantSpec& inv, const WaveFunction& psi0,
                              double T_i, double T_f, int n_steps);
// Evolution under Itilde = I(Q, P - dF/dQ) - dF/dT (momentum-shifted system).
EvolveResult evolve_tilde(const InvariantSpec& inv, const TransformSpec& tf,
                          const WaveFunction& psi0, double T_i, double T_f,
                          int n_steps);

// Pointwise multiplication by exp(+i F(Q,T) / hbar).
WaveFunction phase_map(const TransformSpec& tf, const WaveFunction& psi, double T);

} // namespace extphase
