#ifndef WEDFLOW_CORE_HPP_
#define WEDFLOW_CORE_HPP_

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "wedflow/errors.hpp"

namespace wedflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform partition of [0,T] into N cells with nodes t_k = k*h.
class TimeGrid {
 public:
  TimeGrid(double T, int N);

  double T() const { return T_; }
  int N() const { return N_; }
  double h() const { return h_; }
  double node(int k) const { return k * h_; }
  int num_nodes() const { return N_ + 1; }

  bool operator==(const TimeGrid& o) const { return T_ == o.T_ && N_ == o.N_; }
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }

 private:
  double T_;
  int N_;
  double h_;
};

/// Nodal values y_0..y_N in R^d on a TimeGrid.
class Trajectory {
 public:
  Trajectory(TimeGrid grid, int d);
  Trajectory(TimeGrid grid, std::vector<Vec> values);

  const TimeGrid& grid() const { return grid_; }
  int d() const { return d_; }
  const Vec& at(int k) const { return values_[k]; }
  Vec& at(int k) { return values_[k]; }
  const std::vector<Vec>& values() const { return values_; }

  bool all_finite() const;

  Trajectory operator-(const Trajectory& o) const;
  Trajectory operator+(const Trajectory& o) const;
  Trajectory scaled(double a) const;

  /// CSV with header t,y_0,...,y_{d-1}.
  std::string to_csv() const;
  static Trajectory from_csv(const std::string& text);

 private:
  TimeGrid grid_;
  int d_;
  std::vector<Vec> values_;
};

enum class FamilyKind { BasisBox, ExampleExp };

/// Compact finite-dimensional control parameterization.
///
/// BasisBox: u = sum_i params_i * basis_i with params in a coefficient box.
/// ExampleExp: the one-parameter family u(t) = u0 e^{-t}, u0 in [0,1], d = 1.
class ControlFamily {
 public:
  static ControlFamily example_exp();
  static ControlFamily basis_box(std::vector<std::function<Vec(double)>> basis,
                                 Vec lower, Vec upper, int d);

  FamilyKind kind() const { return kind_; }
  int dim() const { return m_; }        // number of parameters
  int state_dim() const { return d_; }  // dimension of u(t)
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  bool contains(const Vec& params, double slack = 0.0) const;
  Vec clamp(const Vec& params) const;
  Vec eval(const Vec& params, double t) const;

 private:
  ControlFamily() = default;
  FamilyKind kind_ = FamilyKind::ExampleExp;
  int m_ = 1;
  int d_ = 1;
  Vec lower_, upper_;
  std::vector<std::function<Vec(double)>> basis_;
};

/// One member of a ControlFamily.
struct ControlPoint {
  const ControlFamily* family;
  Vec params;

  Vec eval(double t) const { return family->eval(params, t); }
};

/// Solver telemetry attached to every result.
struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  double functional_value = 0.0;
  bool converged = false;
  double wall_time = 0.0;
  double cond_estimate = 0.0;
};

// Norm toolbox. Trapezoidal quadrature for unweighted integrals,
// forward differences for velocities.

double norm_l2(const Trajectory& y);
double norm_h1(const Trajectory& y);
double norm_hsigma(const Trajectory& y, double sigma);
double norm_c0(const Trajectory& y);

Trajectory render_control(const ControlPoint& u, const TimeGrid& grid);

/// Trapezoid weight of node k: h for interior, h/2 at the ends.
inline double trap_weight(const TimeGrid& g, int k) {
  return (k == 0 || k == g.N()) ? 0.5 * g.h() : g.h();
}

std::string control_to_text(const ControlPoint& u);

}  // namespace wedflow

#endif  // WEDFLOW_CORE_HPP_
