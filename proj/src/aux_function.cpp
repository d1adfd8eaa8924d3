#include "atmplace/aux_function.hpp"

#include <cmath>

#include "atmplace/errors.hpp"

namespace atmplace {

namespace {
constexpr double kTwoOverSqrtPi = 1.12837916709551257390;
}

// ln((c+Δ)/√(a²+b²)) is written as asinh(c/√(a²+b²)) to stay accurate for c < 0.
double aux_F(double a, double b, double c) {
  if (!(a > 0)) throw DomainError("aux_F: a must be positive");
  const double delta = std::sqrt(a * a + b * b + c * c);
  const double pb = std::sqrt(a * a + b * b);
  const double pc = std::sqrt(a * a + c * c);
  return kTwoOverSqrtPi *
         (b * std::asinh(c / pb) + c * std::asinh(b / pc) - a * std::atan(b * c / (a * delta)));
}

std::array<double, 3> aux_F_grad(double a, double b, double c) {
  if (!(a > 0)) throw DomainError("aux_F_grad: a must be positive");
  const double delta = std::sqrt(a * a + b * b + c * c);
  const double pb = std::sqrt(a * a + b * b);
  const double pc = std::sqrt(a * a + c * c);
  return {-kTwoOverSqrtPi * std::atan(b * c / (a * delta)), kTwoOverSqrtPi * std::asinh(c / pb),
          kTwoOverSqrtPi * std::asinh(b / pc)};
}

}  // namespace atmplace
