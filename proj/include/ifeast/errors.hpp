#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ifeast {

/// Domain failure raised by one of the library modules. The message is
/// prefixed with the module tag, e.g. "[contour] ...".
class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& message)
      : std::runtime_error("[" + module + "] " + message), module_{std::move(module)} {}

  const std::string& module() const noexcept { return module_; }

private:
  std::string module_;
};

/// A shift (quadrature node) sits on or numerically at an eigenvalue.
class PoleError : public Error {
public:
  PoleError(std::string module, const std::string& message, std::complex<double> shift)
      : Error(std::move(module), message), shift_{shift} {}

  std::complex<double> shift() const noexcept { return shift_; }

private:
  std::complex<double> shift_;
};

std::string format_complex(std::complex<double> z);

}  // namespace ifeast
