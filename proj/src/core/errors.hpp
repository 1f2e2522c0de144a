#pragma once

#include <stdexcept>
#include <string>

namespace extphase {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode : int {
  ok = 0,
  input = 1,        // invalid argument or malformed data
  parse = 2,        // scenario / expression syntax error
  numerical = 3,    // non-finite result or ill-conditioned evaluation
  capability = 4,   // requested derivative or feature not available
  stiffness = 5,    // step-size underflow in an adaptive integrator
  singularity = 6,  // solution ran into a pole (rho -> 0, A -> 0)
  constraint = 7,   // constraint drift beyond tolerance
  separability = 8, // potential not quadratic where the theory requires it
  gauge = 9,        // gauge function fails monotonicity / slice condition
  io = 10,          // file read/write failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

struct InputError : Error {
  explicit InputError(const std::string& m) : Error(ErrorCode::input, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorCode::parse, m) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error(ErrorCode::numerical, m) {}
};
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& m) : Error(ErrorCode::capability, m) {}
};
struct StiffnessError : Error {
  explicit StiffnessError(const std::string& m) : Error(ErrorCode::stiffness, m) {}
};
struct SingularityError : Error {
  // last_valid: parameter value up to which the solution is trustworthy
  SingularityError(const std::string& m, double last_valid)
      : Error(ErrorCode::singularity, m), last_valid_t(last_valid) {}
  double last_valid_t;
};
struct ConstraintViolation : Error {
  explicit ConstraintViolation(const std::string& m) : Error(ErrorCode::constraint, m) {}
};
struct SeparabilityError : Error {
  explicit SeparabilityError(const std::string& m) : Error(ErrorCode::separability, m) {}
};
struct GaugeConditionError : Error {
  explicit GaugeConditionError(const std::string& m) : Error(ErrorCode::gauge, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCode::io, m) {}
};

} // namespace extphase
