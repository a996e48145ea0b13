#ifndef WEDFLOW_ORACLE_HPP_
#define WEDFLOW_ORACLE_HPP_

#include <string>

namespace wedflow::oracle {

/// Closed-form machinery for the scalar ODE benchmark
///   dy/dt + y = u0 e^{-t}, y(0) = 1, T = 1, phi(y) = y^2/2,
/// and its elliptic regularization
///   -eps y'' + y' + y = u0 e^{-t}, y(0) = 1, y'(1) = 0.
struct ExampleConfig {
  double u0;
  double epsilon;

  ExampleConfig(double u0_, double epsilon_);
};

/// Characteristic roots and boundary-matched coefficients of the regularized
/// ODE. Coefficients are re-derived from the boundary conditions and
/// certified by residual substitution before being served.
struct WedCoefficients {
  double r_minus;
  double r_plus;
  double c_minus;
  double c_plus;
};

WedCoefficients wed_coefficients(const ExampleConfig& cfg);

/// y(t) = (1 + t u0) e^{-t}, the flow trajectory.
double exact_flow(double u0, double t);

/// J at the exact flow: (1/8)(1 - 5 e^{-2})(u0^2 + (u0-1)^2).
double exact_J(double u0);

/// Benchmark optimum: u0* = 1/2 with value (1 - 5 e^{-2})/16.
double exact_J_optimum();

/// Closed-form minimizer of the weighted trajectory functional.
double exact_wed_minimizer(const ExampleConfig& cfg, double t);
double exact_wed_minimizer_dot(const ExampleConfig& cfg, double t);

/// Minimum value of the weighted functional, by adaptive quadrature of the
/// integrand along the closed-form minimizer (abs tol 1e-10).
double exact_M_eps(const ExampleConfig& cfg);

/// Lemma-style alternative expression for the minimum value; continuum
/// cross-check for exact_M_eps.
double lemma1_M_eps(const ExampleConfig& cfg);

/// j_eps(u0) = J(y_eps^u, u0 e^{-t}) by adaptive quadrature.
double exact_j_eps(const ExampleConfig& cfg);

/// Runs the full certification and returns a human-readable table;
/// sets *pass to the overall verdict.
std::string certification_report(bool* pass);

}  // namespace wedflow::oracle

#endif  // WEDFLOW_ORACLE_HPP_
