#pragma once

#include <stdexcept>
#include <string>

namespace atmplace {

struct InvalidOrientation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateField : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver gives up; carries the last residual.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), final_residual(residual) {}
  double final_residual;
};

struct InfeasibleLegalization : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace atmplace
