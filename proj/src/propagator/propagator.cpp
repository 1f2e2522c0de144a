#include "propagator/propagator.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

#include "core/errors.hpp"

namespace extphase {

namespace {

const double kPi = 3.14159265358979323846;

int worker_count() {
  if (const char* env = std::getenv("EXTPHASE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(std::min(hc, 8u)) : 1;
}

void parallel_columns(int n, const std::function<void(int, int)>& work) {
  const int nt = std::min(worker_count(), n);
  if (nt <= 1 || n < 64) {
    work(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + nt - 1) / nt;
  for (int k = 0; k < nt; ++k) {
    const int lo = k * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(work, lo, hi);
  }
  for (auto& th : pool) th.join();
}

struct QuadFit {
  double w0, w1, w2;
};

// quadratic coefficients of V(., t) about q = 0, verified at probe points
QuadFit fit_quadratic_potential(const HamiltonianSpec& spec, double t, double q_probe) {
  QuadFit f{spec.potential(0.0, t), spec.dV_dq(0.0, t), 0.5 * spec.curvature(t)};
  for (double q : {0.5 * q_probe, -q_probe}) {
    const double v = spec.potential(q, t);
    const double fit = f.w0 + f.w1 * q + f.w2 * q * q;
    const double scale = std::max({1.0, std::fabs(v), std::fabs(f.w2 * q * q)});
    if (std::fabs(v - fit) > 1e-7 * scale)
      throw CapabilityError("sliced kernels require a quadratic potential; "
                            "use the grid evolution for general V");
  }
  return f;
}

} // namespace

void GridSpec::validate() const {
  if (n_points < 16) throw InputError("grid: n_points must be at least 16");
  if (n_slices < 1) throw InputError("grid: n_slices must be at least 1");
  if (!(q_max > q_min)) throw InputError("grid: q_max must exceed q_min");
  if (!(hbar > 0.0)) throw InputError("grid: hbar must be positive");
  if (!std::isfinite(dq()) || !(dq() > 0.0)) throw InputError("grid: bad spacing");
}

cplx GaussForm::eval(double qf, double qi) const {
  const double phase = a2 * qf * qf + b * qf * qi + g2 * qi * qi + d * qf + z * qi + e;
  return prefactor * std::polar(1.0, phase);
}

GaussForm GaussForm::after(const GaussForm& earlier) const {
  const double Ac = g2 + earlier.a2;
  if (std::fabs(Ac) < 1e-12)
    throw NumericalError("kernel composition hit a degenerate (caustic) slice pairing");
  const double bx = b, by = earlier.b, c0 = z + earlier.d;
  GaussForm out;
  out.a2 = a2 - bx * bx / (4.0 * Ac);
  out.g2 = earlier.g2 - by * by / (4.0 * Ac);
  out.b = -bx * by / (2.0 * Ac);
  out.d = d - bx * c0 / (2.0 * Ac);
  out.z = earlier.z - by * c0 / (2.0 * Ac);
  out.e = e + earlier.e - c0 * c0 / (4.0 * Ac);
  const double sgn = Ac > 0.0 ? 1.0 : -1.0;
  out.prefactor = prefactor * earlier.prefactor *
                  std::sqrt(kPi / std::fabs(Ac)) * std::polar(1.0, sgn * kPi / 4.0);
  return out;
}

GaussForm slice_gauss(double m, double eps, double hbar, double k0, double k1,
                      double w0, double w1, double w2) {
  if (!(eps > 0.0)) throw InputError("slice width must be positive");
  if (!(m > 0.0)) throw InputError("slice mass must be positive");
  const double ax = 1.0 - eps * k1 / 2.0;
  const double ay = -(1.0 + eps * k1 / 2.0);
  const double c = -eps * k0;
  const double kin = m / (2.0 * eps * hbar);
  GaussForm g;
  g.a2 = kin * ax * ax - eps * w2 / (4.0 * hbar);
  g.g2 = kin * ay * ay - eps * w2 / (4.0 * hbar);
  g.b = 2.0 * kin * ax * ay - eps * w2 / (2.0 * hbar);
  g.d = 2.0 * kin * ax * c - eps * w1 / (2.0 * hbar);
  g.z = 2.0 * kin * ay * c - eps * w1 / (2.0 * hbar);
  g.e = kin * c * c - eps * w0 / hbar;
  g.prefactor = std::sqrt(m / (2.0 * kPi * hbar * eps)) * std::polar(1.0, -kPi / 4.0);
  return g;
}

cplx short_time_kernel(const HamiltonianSpec& spec, double q_j, double q_jm1,
                       double t_mid, double eps, double hbar) {
  if (!(eps > 0.0)) throw InputError("short_time_kernel: eps must be positive");
  const double m = spec.mass(t_mid); // throws InputError if not positive
  const double dq = q_j - q_jm1;
  const double qbar = 0.5 * (q_j + q_jm1);
  const double phase = (m * dq * dq / (2.0 * eps) - eps * spec.potential(qbar, t_mid)) / hbar;
  return std::sqrt(m / (2.0 * kPi * hbar * eps)) * std::polar(1.0, -kPi / 4.0) *
         std::polar(1.0, phase);
}

namespace {

Kernel materialize(const GaussForm& g, const GridSpec& grid, double t_i, double t_f) {
  Kernel out;
  out.grid = grid;
  out.t_i = t_i;
  out.t_f = t_f;
  out.k.resize(grid.n_points, grid.n_points);
  parallel_columns(grid.n_points, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const double qi = grid.q(i);
      for (int f = 0; f < grid.n_points; ++f)
        out.k(f, i) = g.eval(grid.q(f), qi);
    }
  });
  return out;
}

GaussForm fold_partition(const HamiltonianSpec& spec, const GridSpec& grid,
                         const std::vector<double>& t_nodes) {
  const double q_probe = std::max(std::fabs(grid.q_min), std::fabs(grid.q_max));
  GaussForm total;
  bool first = true;
  for (std::size_t j = 1; j < t_nodes.size(); ++j) {
    const double eps = t_nodes[j] - t_nodes[j - 1];
    const double t_mid = 0.5 * (t_nodes[j] + t_nodes[j - 1]);
    const QuadFit v = fit_quadratic_potential(spec, t_mid, q_probe);
    const GaussForm slice =
        slice_gauss(spec.mass(t_mid), eps, grid.hbar, 0.0, 0.0, v.w0, v.w1, v.w2);
    total = first ? slice : slice.after(total);
    first = false;
  }
  return total;
}

} // namespace

Kernel compose_kernel(const HamiltonianSpec& spec, const GridSpec& grid, double t_i,
                      double t_f) {
  grid.validate();
  if (!(t_f > t_i)) throw InputError("compose_kernel: t_f must exceed t_i");
  std::vector<double> nodes(grid.n_slices + 1);
  for (int j = 0; j <= grid.n_slices; ++j)
    nodes[j] = t_i + (t_f - t_i) * j / grid.n_slices;
  return materialize(fold_partition(spec, grid, nodes), grid, t_i, t_f);
}

Kernel compose_kernel_partition(const HamiltonianSpec& spec, const GridSpec& grid,
                                const std::vector<double>& t_nodes) {
  grid.validate();
  if (t_nodes.size() < 2) throw InputError("compose_kernel_partition: need >= 2 nodes");
  return materialize(fold_partition(spec, grid, t_nodes), grid, t_nodes.front(),
                     t_nodes.back());
}

Kernel extended_kernel(const HamiltonianSpec& spec, const GridSpec& grid,
                       const ScalarFunction& g, double tau_i, double tau_f,
                       double gauge_tol, const std::vector<double>& tau_nodes) {
  grid.validate();
  if (!(tau_f > tau_i)) throw InputError("extended_kernel: tau_f must exceed tau_i");

  // slice variables t_j = g(tau_j): the delta family delta(t_j - g(tau_j))
  // pins the allocated time coordinates
  std::vector<double> taus = tau_nodes;
  if (taus.empty()) {
    taus.resize(grid.n_slices + 1);
    for (int j = 0; j <= grid.n_slices; ++j)
      taus[j] = tau_i + (tau_f - tau_i) * j / grid.n_slices;
  }
  std::vector<double> t_nodes(taus.size());
  for (std::size_t j = 0; j < taus.size(); ++j) t_nodes[j] = g(taus[j]);

  // gauge validity: strict monotonicity plus the first-order slice condition,
  // measured as the Taylor defect of a unit-curvature probe trajectory
  for (std::size_t j = 1; j < t_nodes.size(); ++j) {
    const double eps = t_nodes[j] - t_nodes[j - 1];
    if (!(eps > 0.0))
      throw GaugeConditionError("extended_kernel: g(tau) is not strictly increasing");
    if (0.5 * eps * eps > gauge_tol)
      throw GaugeConditionError("extended_kernel: slice condition residual " +
                                std::to_string(0.5 * eps * eps) + " exceeds gauge_tol");
  }

  // per slice, integrating the delta in p_t(j) substitutes p_t = -H into the
  // exponent (the lambda*phi term then vanishes identically on the support),
  // leaving the standard short-time slice over [t_{j-1}, t_j]
  const double q_probe = std::max(std::fabs(grid.q_min), std::fabs(grid.q_max));
  GaussForm total;
  bool first = true;
  for (std::size_t j = 1; j < t_nodes.size(); ++j) {
    const double eps = t_nodes[j] - t_nodes[j - 1];
    const double t_mid = 0.5 * (t_nodes[j] + t_nodes[j - 1]);
    // residual of the constraint at the substituted slice point; exactly zero
    const double H_probe = eval_hamiltonian(spec, ReducedState{0.5 * q_probe, 1.0, t_mid});
    const double phi_probe = (-H_probe) + H_probe;
    if (phi_probe != 0.0)
      throw NumericalError("extended_kernel: delta elimination left a constraint residue");
    const QuadFit v = fit_quadratic_potential(spec, t_mid, q_probe);
    const GaussForm slice =
        slice_gauss(spec.mass(t_mid), eps, grid.hbar, 0.0, 0.0, v.w0, v.w1, v.w2);
    total = first ? slice : slice.after(total);
    first = false;
  }
  return materialize(total, grid, t_nodes.front(), t_nodes.back());
}

MeasureFactor measure_factor(const TransformSpec& tf,
                             const std::vector<double>& slice_times) {
  if (slice_times.size() < 2) throw InputError("measure_factor: need >= 2 slice times");
  const std::size_t N = slice_times.size() - 1;
  // log-accumulated literal products: the dt and dp_t measure factors against
  // the two delta-family factors, with A(Tbar) paired as sqrt(A_j A_{j-1})
  double log_num = 0.0, log_den = 0.0;
  for (std::size_t j = 1; j <= N; ++j) {
    const double Tb = 0.5 * (slice_times[j] + slice_times[j - 1]);
    log_num += std::log(tf.Bdot(Tb)); // delta(P_T - K_j) factor
    log_den += std::log(tf.Bdot(Tb)); // dp_t(j) measure factor
    log_den += 0.5 * (std::log(tf.A(slice_times[j])) + std::log(tf.A(slice_times[j - 1])));
  }
  for (std::size_t j = 1; j < N; ++j) {
    log_num += std::log(tf.A(slice_times[j])) + std::log(tf.Bdot(slice_times[j]));
    log_den += std::log(tf.Bdot(slice_times[j])); // delta(T_j - T_j^0) factor
  }
  MeasureFactor out;
  out.telescoped = std::exp(log_num - log_den);
  out.value = 1.0 / std::sqrt(tf.A(slice_times.front()) * tf.A(slice_times.back()));
  return out;
}

Kernel factorized_kernel(const TransformSpec& tf, const InvariantSpec& inv,
                         const GridSpec& grid, double T_i, double T_f) {
  grid.validate();
  if (!(T_f > T_i)) throw InputError("factorized_kernel: T_f must exceed T_i");

  // kappa must be affine for the slice integrals to stay Gaussian
  const double k0 = inv.kappa(0.0);
  const double k1 = inv.kappa(1.0) - k0;
  for (double Qp : {-0.7, 0.4}) {
    if (std::fabs(inv.kappa(Qp) - (k0 + k1 * Qp)) > 1e-9 * std::max(1.0, std::fabs(k0)))
      throw CapabilityError("factorized_kernel: kappa must be affine in Q for "
                            "sliced kernels");
  }
  const double w0 = inv.Vbar(0.0);
  const double w1 = inv.Vbar.deriv(0.0);
  const double w2 = 0.5 * inv.Vbar.deriv2(0.0);
  for (double Qp : {-1.3, 0.8}) {
    const double v = inv.Vbar(Qp);
    const double fit = w0 + w1 * Qp + w2 * Qp * Qp;
    if (std::fabs(v - fit) > 1e-7 * std::max(1.0, std::fabs(v)))
      throw CapabilityError("factorized_kernel: Vbar must be quadratic for "
                            "sliced kernels");
  }

  const double dT = (T_f - T_i) / grid.n_slices;
  const GaussForm slice = slice_gauss(inv.m0, dT, grid.hbar, k0, k1, w0, w1, w2);
  GaussForm KI = slice;
  for (int j = 1; j < grid.n_slices; ++j) KI = slice.after(KI);

  const double Ai = tf.A(T_i), Af = tf.A(T_f);
  const double pre = 1.0 / std::sqrt(Ai * Af);
  Kernel out;
  out.grid = grid;
  out.t_i = tf.B(T_i);
  out.t_f = tf.B(T_f);
  out.k.resize(grid.n_points, grid.n_points);
  parallel_columns(grid.n_points, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const double Qi = grid.q(i) / Ai;
      const double Fi = tf.F(Qi, T_i);
      for (int f = 0; f < grid.n_points; ++f) {
        const double Qf = grid.q(f) / Af;
        const double dF = tf.F(Qf, T_f) - Fi;
        out.k(f, i) = pre * std::polar(1.0, -dF / grid.hbar) * KI.eval(Qf, Qi);
      }
    }
  });
  return out;
}

BoundaryTelescope boundary_telescope(const TransformSpec& tf,
                                     const std::vector<double>& T_nodes,
                                     const std::vector<double>& Q_nodes) {
  if (T_nodes.size() != Q_nodes.size() || T_nodes.size() < 2)
    throw InputError("boundary_telescope: inconsistent path");
  double sum = 0.0;
  const double m0 = tf.m0();
  for (std::size_t j = 1; j < T_nodes.size(); ++j) {
    const double Tb = 0.5 * (T_nodes[j] + T_nodes[j - 1]);
    const double Qb = 0.5 * (Q_nodes[j] + Q_nodes[j - 1]);
    const double dT = T_nodes[j] - T_nodes[j - 1];
    const double dQ = Q_nodes[j] - Q_nodes[j - 1];
    const double a = tf.A(Tb), ad = tf.Adot(Tb), add = tf.Addot(Tb);
    sum += m0 * (tf.kappa(Qb) + ad / a * Qb) * dQ +
           0.5 * m0 * Qb * Qb * (add / a - ad * ad / (a * a)) * dT;
  }
  BoundaryTelescope out;
  out.slice_sum = sum;
  out.endpoint_diff = tf.F(Q_nodes.back(), T_nodes.back()) -
                      tf.F(Q_nodes.front(), T_nodes.front());
  return out;
}

// ---- grid wavefunction machinery ----

double WaveFunction::norm() const {
  return std::sqrt(psi.squaredNorm() * grid.dq());
}

void WaveFunction::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize a null wavefunction");
  psi /= n;
}

WaveFunction WaveFunction::gaussian(const GridSpec& grid, double q0, double p0,
                                    double sigma) {
  if (!(sigma > 0.0)) throw InputError("gaussian: sigma must be positive");
  WaveFunction w;
  w.grid = grid;
  w.psi.resize(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const double x = grid.q(i) - q0;
    w.psi(i) = std::exp(-x * x / (4.0 * sigma * sigma)) *
               std::polar(1.0, p0 * x / grid.hbar);
  }
  w.normalize();
  return w;
}

void WaveFunction::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "q,re,im,abs2\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (int i = 0; i < grid.n_points; ++i)
    out << fmt(grid.q(i)) << ',' << fmt(psi(i).real()) << ',' << fmt(psi(i).imag())
        << ',' << fmt(std::norm(psi(i))) << "\n";
}

namespace {

struct StepCoeffs {
  double mass;
  Eigen::VectorXd b; // symmetrized first-order coefficient (kP + Pk)/2 style
  Eigen::VectorXd W; // scalar potential on the grid
};

EvolveResult cayley_evolve(const GridSpec& grid, const WaveFunction& psi0, double t_i,
                           double t_f, int n_steps,
                           const std::function<StepCoeffs(double)>& coeffs) {
  if (n_steps < 1) throw InputError("evolve: n_steps must be >= 1");
  if (!(t_f > t_i)) throw InputError("evolve: t_f must exceed t_i");
  const int n = grid.n_points;
  const double dq = grid.dq();
  const double hbar = grid.hbar;
  const double eps = (t_f - t_i) / n_steps;

  EvolveResult res;
  res.psi = psi0;
  Eigen::VectorXcd& psi = res.psi.psi;

  Eigen::VectorXcd diag(n), lower(n - 1), upper(n - 1), rhs(n);
  Eigen::VectorXcd cp(n - 1), dp(n);
  for (int s = 0; s < n_steps; ++s) {
    const double t_mid = t_i + (s + 0.5) * eps;
    const StepCoeffs c = coeffs(t_mid);
    if (eps * c.W.cwiseAbs().maxCoeff() / hbar > 0.5) res.accuracy_warning = true;

    const double kin = hbar * hbar / (2.0 * c.mass * dq * dq);
    const cplx ic = cplx(0.0, eps / (2.0 * hbar));
    for (int j = 0; j < n; ++j) {
      const cplx H_jj = 2.0 * kin + c.W(j);
      diag(j) = 1.0 + ic * H_jj;
      rhs(j) = (1.0 - ic * H_jj) * psi(j);
    }
    for (int j = 0; j < n - 1; ++j) {
      const cplx H_up = -kin - cplx(0.0, hbar * (c.b(j) + c.b(j + 1)) / (4.0 * dq));
      const cplx H_lo = -kin + cplx(0.0, hbar * (c.b(j) + c.b(j + 1)) / (4.0 * dq));
      upper(j) = ic * H_up;
      lower(j) = ic * H_lo;
      rhs(j) -= ic * H_up * psi(j + 1);
      rhs(j + 1) -= ic * H_lo * psi(j);
    }
    // Thomas solve of (1 + i eps H / 2hbar) psi' = rhs
    cp(0) = upper(0) / diag(0);
    dp(0) = rhs(0) / diag(0);
    for (int j = 1; j < n; ++j) {
      const cplx m = diag(j) - lower(j - 1) * cp(j - 1);
      if (j < n - 1) cp(j) = upper(j) / m;
      dp(j) = (rhs(j) - lower(j - 1) * dp(j - 1)) / m;
    }
    psi(n - 1) = dp(n - 1);
    for (int j = n - 2; j >= 0; --j) psi(j) = dp(j) - cp(j) * psi(j + 1);
  }
  return res;
}

} // namespace

EvolveResult evolve_reduced(const HamiltonianSpec& spec, const WaveFunction& psi0,
                            double t_i, double t_f, int n_steps) {
  const GridSpec grid = psi0.grid;
  return cayley_evolve(grid, psi0, t_i, t_f, n_steps, [&](double t) {
    StepCoeffs c;
    c.mass = spec.mass(t);
    c.b = Eigen::VectorXd::Zero(grid.n_points);
    c.W.resize(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) c.W(j) = spec.potential(grid.q(j), t);
    return c;
  });
}

EvolveResult evolve_invariant(const InvariantSpec& inv, const WaveFunction& psi0,
                              double T_i, double T_f, int n_steps) {
  const GridSpec grid = psi0.grid;
  return cayley_evolve(grid, psi0, T_i, T_f, n_steps, [&](double) {
    StepCoeffs c;
    c.mass = inv.m0;
    c.b.resize(grid.n_points);
    c.W.resize(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
      c.b(j) = inv.kappa(grid.q(j));
      c.W(j) = inv.Vbar(grid.q(j));
    }
    return c;
  });
}

EvolveResult evolve_tilde(const InvariantSpec& inv, const TransformSpec& tf,
                          const WaveFunction& psi0, double T_i, double T_f,
                          int n_steps) {
  const GridSpec grid = psi0.grid;
  return cayley_evolve(grid, psi0, T_i, T_f, n_steps, [&](double T) {
    StepCoeffs c;
    c.mass = inv.m0;
    c.b.resize(grid.n_points);
    c.W.resize(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
      const double Q = grid.q(j);
      const double a = tf.dF_dQ(Q, T);
      const double kap = inv.kappa(Q);
      c.b(j) = kap - a / inv.m0;
      c.W(j) = a * a / (2.0 * inv.m0) - kap * a + inv.Vbar(Q) - tf.dF_dT(Q, T);
    }
    return c;
  });
}

WaveFunction phase_map(const TransformSpec& tf, const WaveFunction& psi, double T) {
  WaveFunction out = psi;
  for (int j = 0; j < out.grid.n_points; ++j)
    out.psi(j) *= std::polar(1.0, tf.F(out.grid.q(j), T) / out.grid.hbar);
  return out;
}

// ---- kernel utilities and IO ----

Kernel Kernel::compose_with(const Kernel& earlier) const {
  if (grid.n_points != earlier.grid.n_points ||
      std::fabs(grid.q_min - earlier.grid.q_min) > 1e-12 ||
      std::fabs(grid.q_max - earlier.grid.q_max) > 1e-12)
    throw InputError("kernel composition: grids differ");
  if (std::fabs(t_i - earlier.t_f) > 1e-9)
    throw InputError("kernel composition: time intervals not adjacent");
  Kernel out;
  out.grid = grid;
  out.t_i = earlier.t_i;
  out.t_f = t_f;
  out.k = k * earlier.k * grid.dq();
  return out;
}

double Kernel::rel_l2_diff(const Kernel& other, bool interior_columns) const {
  if (k.rows() != other.k.rows() || k.cols() != other.k.cols())
    throw InputError("rel_l2_diff: size mismatch");
  if (!interior_columns) return (k - other.k).norm() / other.k.norm();
  const int n = static_cast<int>(k.cols());
  const int lo = n / 4, len = n / 2;
  return (k.middleCols(lo, len) - other.k.middleCols(lo, len)).norm() /
         other.k.middleCols(lo, len).norm();
}

Eigen::VectorXcd Kernel::apply(const Eigen::VectorXcd& psi) const {
  if (psi.size() != k.cols()) throw InputError("kernel apply: size mismatch");
  return k * psi * grid.dq();
}

void Kernel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write("KRNL1", 5);
  const std::uint32_t n = static_cast<std::uint32_t>(grid.n_points);
  out.write(reinterpret_cast<const char*>(&n), 4);
  const double header[5] = {t_i, t_f, grid.q_min, grid.q_max, grid.hbar};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (int r = 0; r < k.rows(); ++r)
    for (int c = 0; c < k.cols(); ++c) {
      const double re = k(r, c).real(), im = k(r, c).imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
  if (!out) throw IoError("short write on " + path);
}

Kernel Kernel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "KRNL1", 5) != 0)
    throw IoError(path + " is not a KRNL1 kernel file");
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  double header[5];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || n < 2 || n > 100000) throw IoError(path + ": bad kernel header");
  Kernel out;
  out.t_i = header[0];
  out.t_f = header[1];
  out.grid.q_min = header[2];
  out.grid.q_max = header[3];
  out.grid.hbar = header[4];
  out.grid.n_points = static_cast<int>(n);
  out.grid.n_slices = 1;
  out.k.resize(n, n);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) {
      double re, im;
      in.read(reinterpret_cast<char*>(&re), 8);
      in.read(reinterpret_cast<char*>(&im), 8);
      out.k(r, c) = cplx(re, im);
    }
  if (!in) throw IoError(path + ": truncated kernel data");
  return out;
}

} // namespace extphase
