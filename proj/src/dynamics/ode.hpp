#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "core/errors.hpp"

namespace extphase {

// Dormand-Prince 5(4) embedded pair with adaptive step control.
// Accepted step nodes are recorded together with the RHS values, so a C1
// cubic Hermite reconstruction is available downstream. Points listed in
// `forced` are hit exactly (the step is clipped), which keeps matched-point
// comparisons free of interpolation error.

template <std::size_t N>
struct OdeSolution {
  std::vector<double> t;
  std::vector<std::array<double, N>> y;
  std::vector<std::array<double, N>> f; // RHS at the nodes
};

template <std::size_t N>
using OdeRhs = std::function<void(double, const std::array<double, N>&,
                                  std::array<double, N>&)>;

template <std::size_t N>
struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-9;
  double max_step = 0.0;               // 0 = unlimited
  std::vector<double> forced;          // ascending sample points to hit exactly
  std::size_t max_steps = 50'000'000;
  // Return false to stop integration after an accepted step (e.g. a
  // singularity guard). The solution then ends at that node.
  std::function<bool(double, const std::array<double, N>&)> keep_going;
};

namespace detail {

template <std::size_t N>
double error_norm(const std::array<double, N>& e, const std::array<double, N>& y0,
                  const std::array<double, N>& y1, double atol, double rtol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double r = e[i] / sk;
    acc += r * r;
  }
  return std::sqrt(acc / N);
}

} // namespace detail

template <std::size_t N>
OdeSolution<N> integrate_rk45(const OdeRhs<N>& rhs, double t0, double t1,
                              const std::array<double, N>& y0,
                              const OdeOptions<N>& opt = {}) {
  if (!(t1 > t0)) throw InputError("integrate_rk45: t1 must exceed t0");

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  OdeSolution<N> sol;
  std::array<double, N> y = y0, k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, yt{}, ynew{}, err{};
  double t = t0;
  rhs(t, y, k1);
  sol.t.push_back(t);
  sol.y.push_back(y);
  sol.f.push_back(k1);

  std::size_t next_forced = 0;
  while (next_forced < opt.forced.size() && opt.forced[next_forced] <= t0) ++next_forced;

  double h = (t1 - t0) / 100.0;
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  h = std::min(h, 1e-3 * (t1 - t0) + 1e-12); // conservative start

  std::size_t n_steps = 0;
  while (t < t1) {
    if (++n_steps > opt.max_steps)
      throw StiffnessError("integrate_rk45: step budget exhausted");
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    h = std::min(h, t1 - t);
    bool hit_forced = false;
    if (next_forced < opt.forced.size() && t + h >= opt.forced[next_forced] - 1e-14) {
      h = opt.forced[next_forced] - t;
      hit_forced = true;
    }
    if (h < 1e-14 * std::max(1.0, std::fabs(t))) {
      if (hit_forced) { // coincident forced point; just record it
        ++next_forced;
        continue;
      }
      throw StiffnessError("integrate_rk45: step size underflow at t = " +
                           std::to_string(t));
    }

    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, yt, k2);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, yt, k3);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, yt, k4);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, yt, k5);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                          a65 * k5[i]);
    rhs(t + h, yt, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    rhs(t + h, ynew, k7); // FSAL
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                    e7 * k7[i]);

    const double en = detail::error_norm(err, y, ynew, opt.atol, opt.rtol);
    if (en <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;
      sol.t.push_back(t);
      sol.y.push_back(y);
      sol.f.push_back(k1);
      if (hit_forced) ++next_forced;
      if (opt.keep_going && !opt.keep_going(t, y)) return sol;
      const double fac = (en > 0.0) ? 0.8 * std::pow(en, -0.2) : 4.0;
      h *= std::clamp(fac, 0.2, 4.0);
    } else {
      const double fac = 0.8 * std::pow(en, -0.2);
      h *= std::clamp(fac, 0.1, 0.9);
    }
  }
  return sol;
}

// Cubic Hermite evaluation on a solution node interval.
template <std::size_t N>
std::array<double, N> hermite_eval(const OdeSolution<N>& s, std::size_t seg, double t) {
  const double t0 = s.t[seg], t1 = s.t[seg + 1];
  const double h = t1 - t0;
  const double u = (t - t0) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i)
    out[i] = h00 * s.y[seg][i] + h * h10 * s.f[seg][i] + h01 * s.y[seg + 1][i] +
             h * h11 * s.f[seg + 1][i];
  return out;
}

} // namespace extphase
