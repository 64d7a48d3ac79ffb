#pragma once

#include <functional>

namespace slowheat::quad {

// Adaptive 12-point Gauss-Legendre integration with interval bisection.  The
// local error estimate is |panel - (left half + right half)|; an interval is
// accepted once that estimate drops below its share of abs_tol.  Throws
// numerical_error if the recursion bottoms out without converging.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-13, int max_depth = 52);

}  // namespace slowheat::quad
