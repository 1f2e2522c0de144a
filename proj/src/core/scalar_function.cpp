#include "core/scalar_function.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace extphase {

namespace {
const double kEps = std::numeric_limits<double>::epsilon();
const double kH1 = std::cbrt(kEps);            // ~6.06e-6
const double kH2 = std::pow(kEps, 0.25);       // ~1.22e-4
} // namespace

double fd_step1(double x) { return kH1 * std::max(1.0, std::fabs(x)); }
double fd_step2(double x) { return kH2 * std::max(1.0, std::fabs(x)); }

struct ScalarFunction::Impl {
  int arity = 1;
  bool analytic = false;
  std::string name;
  Fn1 f1, df1, d2f1;
  Fn2 f2, fx2, fy2, fxx2;
};

ScalarFunction ScalarFunction::constant(double c) {
  return unary([c](double) { return c; },
               [](double) { return 0.0; },
               [](double) { return 0.0; }, "const");
}

ScalarFunction ScalarFunction::unary(Fn1 f, std::string name) {
  ScalarFunction s;
  auto impl = std::make_shared<Impl>();
  impl->arity = 1;
  impl->f1 = std::move(f);
  impl->name = std::move(name);
  s.impl_ = impl;
  return s;
}

ScalarFunction ScalarFunction::unary(Fn1 f, Fn1 df, Fn1 d2f, std::string name) {
  ScalarFunction s;
  auto impl = std::make_shared<Impl>();
  impl->arity = 1;
  impl->analytic = true;
  impl->f1 = std::move(f);
  impl->df1 = std::move(df);
  impl->d2f1 = std::move(d2f);
  impl->name = std::move(name);
  s.impl_ = impl;
  return s;
}

ScalarFunction ScalarFunction::binary(Fn2 f, std::string name) {
  ScalarFunction s;
  auto impl = std::make_shared<Impl>();
  impl->arity = 2;
  impl->f2 = std::move(f);
  impl->name = std::move(name);
  s.impl_ = impl;
  return s;
}

ScalarFunction ScalarFunction::binary(Fn2 f, Fn2 fx, Fn2 fy, Fn2 fxx, std::string name) {
  ScalarFunction s;
  auto impl = std::make_shared<Impl>();
  impl->arity = 2;
  impl->analytic = true;
  impl->f2 = std::move(f);
  impl->fx2 = std::move(fx);
  impl->fy2 = std::move(fy);
  impl->fxx2 = std::move(fxx);
  impl->name = std::move(name);
  s.impl_ = impl;
  return s;
}

int ScalarFunction::arity() const {
  if (!impl_) throw CapabilityError("empty ScalarFunction");
  return impl_->arity;
}

bool ScalarFunction::analytic() const {
  if (!impl_) throw CapabilityError("empty ScalarFunction");
  return impl_->analytic;
}

const std::string& ScalarFunction::name() const {
  static const std::string empty;
  return impl_ ? impl_->name : empty;
}

double ScalarFunction::operator()(double x) const {
  if (!impl_ || impl_->arity != 1)
    throw CapabilityError("ScalarFunction: unary call on non-unary function");
  return impl_->f1(x);
}

double ScalarFunction::operator()(double x, double y) const {
  if (!impl_ || impl_->arity != 2)
    throw CapabilityError("ScalarFunction: binary call on non-binary function");
  return impl_->f2(x, y);
}

double ScalarFunction::deriv(double x) const {
  if (!impl_ || impl_->arity != 1)
    throw CapabilityError("ScalarFunction: deriv on non-unary function");
  if (impl_->df1) return impl_->df1(x);
  const double h = fd_step1(x);
  return (impl_->f1(x + h) - impl_->f1(x - h)) / (2.0 * h);
}

double ScalarFunction::deriv2(double x) const {
  if (!impl_ || impl_->arity != 1)
    throw CapabilityError("ScalarFunction: deriv2 on non-unary function");
  if (impl_->d2f1) return impl_->d2f1(x);
  const double h = fd_step2(x);
  return (impl_->f1(x + h) - 2.0 * impl_->f1(x) + impl_->f1(x - h)) / (h * h);
}

double ScalarFunction::dx(double x, double y) const {
  if (!impl_ || impl_->arity != 2)
    throw CapabilityError("ScalarFunction: dx on non-binary function");
  if (impl_->fx2) return impl_->fx2(x, y);
  const double h = fd_step1(x);
  return (impl_->f2(x + h, y) - impl_->f2(x - h, y)) / (2.0 * h);
}

double ScalarFunction::dy(double x, double y) const {
  if (!impl_ || impl_->arity != 2)
    throw CapabilityError("ScalarFunction: dy on non-binary function");
  if (impl_->fy2) return impl_->fy2(x, y);
  const double h = fd_step1(y);
  return (impl_->f2(x, y + h) - impl_->f2(x, y - h)) / (2.0 * h);
}

double ScalarFunction::dxx(double x, double y) const {
  if (!impl_ || impl_->arity != 2)
    throw CapabilityError("ScalarFunction: dxx on non-binary function");
  if (impl_->fxx2) return impl_->fxx2(x, y);
  const double h = fd_step2(x);
  return (impl_->f2(x + h, y) - 2.0 * impl_->f2(x, y) + impl_->f2(x - h, y)) / (h * h);
}

} // namespace extphase
