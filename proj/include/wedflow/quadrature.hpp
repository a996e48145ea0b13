#ifndef WEDFLOW_QUADRATURE_HPP_
#define WEDFLOW_QUADRATURE_HPP_

#include <functional>

namespace wedflow {

/// Adaptive Simpson quadrature with interval bisection.
/// Absolute tolerance, max recursion depth 40.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 40);

}  // namespace wedflow

#endif  // WEDFLOW_QUADRATURE_HPP_
