#pragma once

#include <array>

namespace atmplace {

// F(a,b,c) = ∫₀^∞ e^{-a²x²} erf(bx) erf(cx) / x² dx in closed form.
double aux_F(double a, double b, double c);

// (∂F/∂a, ∂F/∂b, ∂F/∂c).
std::array<double, 3> aux_F_grad(double a, double b, double c);

}  // namespace atmplace
