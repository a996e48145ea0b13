#ifndef WEDFLOW_ENERGY_HPP_
#define WEDFLOW_ENERGY_HPP_

#include <limits>
#include <memory>
#include <string>

#include "wedflow/core.hpp"

namespace wedflow {

enum class Smoothness { Smooth, ProxOnly };

/// kappa-convex energy phi exposing value, prox, modulus, and (when smooth)
/// exact derivatives. Instances: Quadratic, DoubleWell, Obstacle.
class Energy {
 public:
  virtual ~Energy() = default;

  double kappa() const { return kappa_; }
  Smoothness smoothness() const { return smoothness_; }
  const std::string& name() const { return name_; }

  /// phi(v); +inf outside the effective domain.
  virtual double value(const Vec& v) const = 0;

  /// argmin_w 1/2|w-z|^2 + gamma phi(w). Requires 1 + gamma*kappa > 1e-8.
  virtual Vec prox(const Vec& z, double gamma) const = 0;

  virtual Vec grad(const Vec& v) const;
  virtual Mat hess(const Vec& v) const;

  /// Element of minimal norm in the subdifferential at v.
  virtual Vec minimal_section(const Vec& v) const = 0;

  virtual bool in_domain(const Vec& v) const { return v.allFinite(); }

  /// Projection onto the closure of the effective domain.
  virtual Vec project_domain(const Vec& v) const { return v; }

  /// ProxOnly splitting phi = phi_s + indicator: gradient of phi_s and an
  /// upper bound on its curvature. Smooth instances have no such splitting.
  virtual Vec smooth_part_grad(const Vec& v) const;
  virtual double smooth_part_curvature() const;

  void check_prox_gamma(double gamma) const;

 protected:
  Energy(double kappa, Smoothness s, std::string name)
      : kappa_(kappa), smoothness_(s), name_(std::move(name)) {}

  double kappa_;
  Smoothness smoothness_;
  std::string name_;
};

using EnergyPtr = std::shared_ptr<const Energy>;

/// phi(v) = 1/2 v.Qv, Q symmetric positive definite; kappa = lambda_min(Q).
EnergyPtr make_quadratic(const Mat& Q);

/// phi(v) = sum_i 1/4 (v_i^2 - 1)^2; kappa = -1.
EnergyPtr make_double_well(int d);

/// phi(v) = 1/2|v|^2 + indicator of [a,b]^d; kappa = 1.
EnergyPtr make_obstacle(double a, double b, int d);

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace wedflow

#endif  // WEDFLOW_ENERGY_HPP_
