#pragma once

#include <algorithm>
#include <vector>

#include "core/errors.hpp"

namespace extphase {

// Piecewise-cubic Hermite curve through (x_k, y_k, y'_k) nodes. deriv() and
// second() differentiate the interpolant itself, so the triple
// (value, deriv, second) is an exact derivative chain segment by segment.
class HermiteCurve {
public:
  HermiteCurve() = default;
  HermiteCurve(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
      : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != dy_.size())
      throw InputError("HermiteCurve: inconsistent node data");
  }

  double x_begin() const { return x_.front(); }
  double x_end() const { return x_.back(); }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& derivs() const { return dy_; }

  double value(double x) const {
    const auto [s, h, u] = locate(x);
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * y_[s] + h * h10 * dy_[s] + h01 * y_[s + 1] + h * h11 * dy_[s + 1];
  }

  double deriv(double x) const {
    const auto [s, h, u] = locate(x);
    return (6 * u * u - 6 * u) * (y_[s] - y_[s + 1]) / h +
           (3 * u * u - 4 * u + 1) * dy_[s] + (3 * u * u - 2 * u) * dy_[s + 1];
  }

  double second(double x) const {
    const auto [s, h, u] = locate(x);
    return ((12 * u - 6) * (y_[s] - y_[s + 1]) / h + (6 * u - 4) * dy_[s] +
            (6 * u - 2) * dy_[s + 1]) / h;
  }

  double third(double x) const {
    const auto [s, h, u] = locate(x);
    (void)u;
    return (12 * (y_[s] - y_[s + 1]) / h + 6 * (dy_[s] + dy_[s + 1])) / (h * h);
  }

  // inverse for strictly monotone increasing curves (Newton + bisection)
  double inverse(double y, double tol = 1e-12) const {
    if (y < y_.front() - 1e-9 || y > y_.back() + 1e-9)
      throw InputError("HermiteCurve::inverse: value outside range");
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t s = (it == y_.begin()) ? 0 : (it - y_.begin() - 1);
    s = std::min(s, x_.size() - 2);
    double lo = x_[s], hi = x_[s + 1];
    double x = lo + (hi - lo) * 0.5;
    for (int iter = 0; iter < 100; ++iter) {
      const double f = value(x) - y;
      if (f > 0)
        hi = x;
      else
        lo = x;
      const double d = deriv(x);
      double step = (d != 0.0) ? -f / d : 0.0;
      double xn = x + step;
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (std::abs(xn - x) < tol * std::max(1.0, std::abs(x))) return xn;
      x = xn;
    }
    return x;
  }

private:
  std::tuple<std::size_t, double, double> locate(double x) const {
    if (x < x_.front() - 1e-9 || x > x_.back() + 1e-9)
      throw InputError("HermiteCurve: evaluation outside grid");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t s = (it == x_.begin()) ? 0 : (it - x_.begin() - 1);
    s = std::min(s, x_.size() - 2);
    const double h = x_[s + 1] - x_[s];
    return {s, h, (x - x_[s]) / h};
  }

  std::vector<double> x_, y_, dy_;
};

} // namespace extphase
