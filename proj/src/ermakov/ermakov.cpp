#include "ermakov/ermakov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/errors.hpp"
#include "dynamics/ode.hpp"

namespace extphase {

ErmakovSolution::ErmakovSolution(std::vector<double> t, std::vector<double> rho,
                                 std::vector<double> rhodot, ScalarFunction omega)
    : t_(std::move(t)), rho_(std::move(rho)), rhodot_(std::move(rhodot)),
      omega_(std::move(omega)) {
  if (t_.size() < 2 || t_.size() != rho_.size() || t_.size() != rhodot_.size())
    throw InputError("ErmakovSolution: inconsistent grid");
  rhoddot_.resize(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) {
    const double w = omega_(t_[i]);
    rhoddot_[i] = 1.0 / (rho_[i] * rho_[i] * rho_[i]) - w * w * rho_[i];
  }
}

std::size_t ErmakovSolution::segment(double t) const {
  if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12)
    throw InputError("ErmakovSolution: t outside solved interval");
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = (it == t_.begin()) ? 0 : (it - t_.begin() - 1);
  return std::min(i, t_.size() - 2);
}

double ErmakovSolution::rho(double t) const {
  const std::size_t s = segment(t);
  const double h = t_[s + 1] - t_[s], u = (t - t_[s]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * rho_[s] + h * h10 * rhodot_[s] + h01 * rho_[s + 1] +
         h * h11 * rhodot_[s + 1];
}

double ErmakovSolution::rhodot(double t) const {
  const std::size_t s = segment(t);
  const double h = t_[s + 1] - t_[s], u = (t - t_[s]) / h;
  return (6 * u * u - 6 * u) * (rho_[s] - rho_[s + 1]) / h +
         (3 * u * u - 4 * u + 1) * rhodot_[s] + (3 * u * u - 2 * u) * rhodot_[s + 1];
}

double ErmakovSolution::residual(std::size_t node) const {
  if (node == 0 || node + 1 >= t_.size())
    throw InputError("residual: interior nodes only");
  // centered, non-uniform three-point second derivative of rho
  const double h1 = t_[node] - t_[node - 1];
  const double h2 = t_[node + 1] - t_[node];
  const double dd = 2.0 * (h1 * rho_[node + 1] - (h1 + h2) * rho_[node] +
                           h2 * rho_[node - 1]) /
                    (h1 * h2 * (h1 + h2));
  const double w = omega_(t_[node]);
  return std::fabs(dd + w * w * rho_[node] -
                   1.0 / (rho_[node] * rho_[node] * rho_[node]));
}

void ErmakovSolution::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "t,rho,rhodot,residual\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < t_.size(); ++i) {
    const double res = (i == 0 || i + 1 == t_.size()) ? 0.0 : residual(i);
    out << fmt(t_[i]) << ',' << fmt(rho_[i]) << ',' << fmt(rhodot_[i]) << ','
        << fmt(res) << "\n";
  }
}

ErmakovSolution solve_ermakov(const ScalarFunction& omega, double rho0, double rhodot0,
                              double t0, double t1, double tol,
                              const std::vector<double>& samples) {
  if (!(rho0 > 0.0)) throw InputError("solve_ermakov: rho0 must be positive");
  const double rho_floor = 1e-4 * rho0;
  OdeRhs<2> rhs = [&omega, rho_floor](double t, const std::array<double, 2>& y,
                                      std::array<double, 2>& dy) {
    const double r = std::max(y[0], rho_floor); // keep 1/r^3 finite mid-step
    const double w = omega(t);
    dy[0] = y[1];
    dy[1] = 1.0 / (r * r * r) - w * w * y[0];
  };
  OdeOptions<2> opt;
  opt.rtol = opt.atol = tol;
  opt.forced = samples;
  opt.keep_going = [rho_floor](double, const std::array<double, 2>& y) {
    return y[0] > rho_floor;
  };
  const auto sol = integrate_rk45<2>(rhs, t0, t1, {rho0, rhodot0}, opt);
  if (sol.y.back()[0] <= rho_floor)
    throw SingularityError("solve_ermakov: rho collapsed toward zero (1/rho^3 blow-up)",
                           sol.t.back());

  std::vector<double> rho(sol.t.size()), rhodot(sol.t.size());
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    rho[i] = sol.y[i][0];
    rhodot[i] = sol.y[i][1];
  }
  return ErmakovSolution(sol.t, std::move(rho), std::move(rhodot), omega);
}

double lewis_invariant(double q, double p, double rho, double rhodot) {
  if (!(rho > 0.0)) throw InputError("lewis_invariant: rho must be positive");
  const double a = rho * p - rhodot * q;
  return 0.5 * a * a + q * q / (2.0 * rho * rho);
}

double invariant_drift(const Trajectory& traj, const ErmakovSolution& sol, double floor) {
  if (traj.extended || traj.reduced_states.empty())
    throw InputError("invariant_drift: reduced trajectory required");
  if (traj.param.front() < sol.t_begin() - 1e-9 ||
      traj.param.back() > sol.t_end() + 1e-9)
    throw InputError("invariant_drift: trajectory interval not covered by the "
                     "Ermakov solution grid");
  double I0 = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.reduced_states[i];
    const double I = lewis_invariant(s.q, s.p, sol.rho(s.t), sol.rhodot(s.t));
    if (i == 0)
      I0 = I;
    else
      worst = std::max(worst, std::fabs(I - I0) / std::max(std::fabs(I0), floor));
  }
  return worst;
}

} // namespace extphase
