#pragma once

#include <functional>
#include <memory>
#include <string>

namespace extphase {

// Finite-difference steps. First derivatives use the classic cbrt(eps)
// scaling, second derivatives the quarter-power step; both scale with the
// magnitude of the evaluation point.
double fd_step1(double x);
double fd_step2(double x);

// Real function of one or two real variables with derivative access up to
// order 2. Derivatives are analytic when supplied at construction and
// central finite differences otherwise. Instances are immutable and cheap
// to copy; evaluation is pure.
class ScalarFunction {
public:
  using Fn1 = std::function<double(double)>;
  using Fn2 = std::function<double(double, double)>;

  ScalarFunction() = default;

  static ScalarFunction constant(double c);

  // unary f(x), optional analytic f' and f''
  static ScalarFunction unary(Fn1 f, std::string name = {});
  static ScalarFunction unary(Fn1 f, Fn1 df, Fn1 d2f, std::string name = {});

  // binary f(x,y), optional analytic partials (dx, dy, dxx)
  static ScalarFunction binary(Fn2 f, std::string name = {});
  static ScalarFunction binary(Fn2 f, Fn2 fx, Fn2 fy, Fn2 fxx, std::string name = {});

  int arity() const;
  bool analytic() const;
  const std::string& name() const;

  double operator()(double x) const;
  double operator()(double x, double y) const;

  // unary derivatives
  double deriv(double x) const;
  double deriv2(double x) const;

  // binary partials; dx = first argument, dy = second
  double dx(double x, double y) const;
  double dy(double x, double y) const;
  double dxx(double x, double y) const;

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

} // namespace extphase
