#pragma once

#include <stdexcept>
#include <string>

namespace locrom {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A Newton iteration (full or reduced model) did not reach its residual
/// tolerance within the iteration cap.
class NewtonFailure : public Error {
public:
  NewtonFailure(const std::string& what, int step, double residual)
      : Error(what), step_(step), residual_(residual) {}

  int step() const { return step_; }
  double residual() const { return residual_; }

private:
  int step_;
  double residual_;
};

}  // namespace locrom
