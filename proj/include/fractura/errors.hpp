#pragma once

#include <stdexcept>
#include <string>

namespace fractura {

// Invalid input data or a violated precondition. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure during assembly or solve. The CLI maps this to exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fractura
