// quadrature.hpp: adaptive 1-D integration wrappers around GSL.

#pragma once

#include <functional>

namespace tfld {

struct QuadResult {
    double value{0.0};
    double abs_error{0.0};
};

// Adaptive integration of f on the finite interval [a, b]. Handles integrable endpoint
// behavior and interior scale separation (features of width ~1/beta near 0).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10, double abs_tol = 1e-14);

// Adaptive integration of f on [a, +inf).
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 double rel_tol = 1e-10, double abs_tol = 1e-14);

} // namespace tfld
