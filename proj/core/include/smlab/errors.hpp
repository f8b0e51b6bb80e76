#ifndef SMLAB_ERRORS_HPP
#define SMLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smlab {

// Base for everything this library throws on purpose.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: unknown law name, parameter out of range, malformed config.
struct invalid_param : error {
  using error::error;
};

// A quadrature, recursion, or sampler could not reach its tolerance.
struct numeric_failure : error {
  using error::error;
};

// Requested moment does not exist (heavy tail).
struct moment_undefined : error {
  using error::error;
};

// Size guard tripped (tensor order/dimension beyond supported range).
struct cap_exceeded : error {
  using error::error;
};

} // namespace smlab

#endif
