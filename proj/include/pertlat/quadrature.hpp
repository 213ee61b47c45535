#pragma once

#include <functional>

namespace pertlat {

// Adaptive Simpson on [a,b]. Recursion halves intervals until the local
// Richardson error estimate is below the (propagated) tolerance, so the
// absolute error of the result is bounded by ~tol on smooth integrands.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth = 60);

// Integral over [a, inf) of a decaying integrand, via the substitution
// x = a + u/(1-u) on u in [0,1).
double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol);

} // namespace pertlat
