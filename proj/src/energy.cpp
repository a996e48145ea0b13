#include "wedflow/energy.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace wedflow {

Vec Energy::grad(const Vec&) const {
  throw CapabilityError("Energy '" + name_ + "' exposes no gradient (ProxOnly)");
}

Mat Energy::hess(const Vec&) const {
  throw CapabilityError("Energy '" + name_ + "' exposes no Hessian (ProxOnly)");
}

Vec Energy::smooth_part_grad(const Vec&) const {
  throw CapabilityError("Energy '" + name_ + "' has no ProxOnly splitting");
}

double Energy::smooth_part_curvature() const {
  throw CapabilityError("Energy '" + name_ + "' has no ProxOnly splitting");
}

void Energy::check_prox_gamma(double gamma) const {
  constexpr double kGuard = 1e-8;
  if (!(1.0 + gamma * kappa_ > kGuard)) {
    throw ParameterError("prox: 1 + gamma*kappa must exceed " + std::to_string(kGuard) +
                         " (gamma=" + std::to_string(gamma) +
                         ", kappa=" + std::to_string(kappa_) + ")");
  }
}

namespace {

class Quadratic final : public Energy {
 public:
  explicit Quadratic(const Mat& Q)
      : Energy(0.0, Smoothness::Smooth, "quadratic"), Q_(Q) {
    if (Q.rows() != Q.cols()) throw InputError("quadratic: Q must be square");
    if (!Q.isApprox(Q.transpose(), 1e-12)) {
      throw InputError("quadratic: Q must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(Q);
    kappa_ = es.eigenvalues().minCoeff();
    if (!(kappa_ > 0.0)) {
      throw InputError("quadratic: Q must be positive definite");
    }
  }

  double value(const Vec& v) const override { return 0.5 * v.dot(Q_ * v); }

  Vec prox(const Vec& z, double gamma) const override {
    check_prox_gamma(gamma);
    const Mat A = Mat::Identity(Q_.rows(), Q_.cols()) + gamma * Q_;
    return A.ldlt().solve(z);
  }

  Vec grad(const Vec& v) const override { return Q_ * v; }
  Mat hess(const Vec&) const override { return Q_; }
  Vec minimal_section(const Vec& v) const override { return Q_ * v; }

 private:
  Mat Q_;
};

class DoubleWell final : public Energy {
 public:
  explicit DoubleWell(int d) : Energy(-1.0, Smoothness::Smooth, "double_well"), d_(d) {
    if (d < 1) throw InputError("double_well: dimension must be >= 1");
  }

  double value(const Vec& v) const override {
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      const double q = v[i] * v[i] - 1.0;
      s += 0.25 * q * q;
    }
    return s;
  }

  Vec prox(const Vec& z, double gamma) const override {
    check_prox_gamma(gamma);
    Vec w(z.size());
    for (int i = 0; i < z.size(); ++i) w[i] = scalar_prox(z[i], gamma);
    return w;
  }

  Vec grad(const Vec& v) const override {
    Vec g(v.size());
    for (int i = 0; i < v.size(); ++i) g[i] = v[i] * v[i] * v[i] - v[i];
    return g;
  }

  Mat hess(const Vec& v) const override {
    Mat H = Mat::Zero(v.size(), v.size());
    for (int i = 0; i < v.size(); ++i) H(i, i) = 3.0 * v[i] * v[i] - 1.0;
    return H;
  }

  Vec minimal_section(const Vec& v) const override { return grad(v); }

 private:
  // Root of f(w) = gamma w^3 + (1-gamma) w - z. Strictly increasing for
  // gamma < 1, which the modulus guard enforces. Safeguarded Newton with
  // bisection fallback.
  static double scalar_prox(double z, double gamma) {
    auto f = [&](double w) { return gamma * w * w * w + (1.0 - gamma) * w - z; };
    double lo = -1.0, hi = 1.0;
    while (f(lo) > 0.0) lo = 2.0 * lo - 1.0;
    while (f(hi) < 0.0) hi = 2.0 * hi + 1.0;
    double w = z;
    for (int it = 0; it < 100; ++it) {
      const double fv = f(w);
      if (std::abs(fv) < 1e-15 * (1.0 + std::abs(z))) return w;
      if (fv > 0.0) {
        hi = w;
      } else {
        lo = w;
      }
      const double df = 3.0 * gamma * w * w + (1.0 - gamma);
      double step = w - fv / df;
      if (!(step > lo && step < hi)) step = 0.5 * (lo + hi);
      w = step;
    }
    if (hi - lo > 1e-10 * (1.0 + std::abs(z))) {
      throw SolverError("double_well prox: cubic solve did not converge");
    }
    return w;
  }

  int d_;
};

class Obstacle final : public Energy {
 public:
  Obstacle(double a, double b, int d)
      : Energy(1.0, Smoothness::ProxOnly, "obstacle"), a_(a), b_(b), d_(d) {
    if (!(a <= b)) throw InputError("obstacle: need a <= b");
    if (d < 1) throw InputError("obstacle: dimension must be >= 1");
  }

  double value(const Vec& v) const override {
    for (int i = 0; i < v.size(); ++i) {
      if (v[i] < a_ || v[i] > b_) return kInf;
    }
    return 0.5 * v.squaredNorm();
  }

  Vec prox(const Vec& z, double gamma) const override {
    check_prox_gamma(gamma);
    Vec w(z.size());
    for (int i = 0; i < z.size(); ++i) {
      w[i] = std::min(b_, std::max(a_, z[i] / (1.0 + gamma)));
    }
    return w;
  }

  bool in_domain(const Vec& v) const override {
    if (!v.allFinite()) return false;
    for (int i = 0; i < v.size(); ++i) {
      if (v[i] < a_ || v[i] > b_) return false;
    }
    return true;
  }

  Vec project_domain(const Vec& v) const override {
    Vec w(v.size());
    for (int i = 0; i < v.size(); ++i) w[i] = std::min(b_, std::max(a_, v[i]));
    return w;
  }

  Vec smooth_part_grad(const Vec& v) const override { return v; }
  double smooth_part_curvature() const override { return 1.0; }

  // partial phi(v) = v + N_[a,b](v) componentwise; explicit min-norm selection.
  Vec minimal_section(const Vec& v) const override {
    if (!in_domain(v)) {
      throw DomainError("obstacle minimal_section: point outside [a,b]^d");
    }
    Vec g(v.size());
    for (int i = 0; i < v.size(); ++i) {
      if (v[i] == a_) {
        g[i] = (a_ >= 0.0) ? 0.0 : a_;  // min-norm of (-inf, a]
      } else if (v[i] == b_) {
        g[i] = (b_ <= 0.0) ? 0.0 : b_;  // min-norm of [b, inf)
      } else {
        g[i] = v[i];
      }
    }
    return g;
  }

 private:
  double a_, b_;
  int d_;
};

}  // namespace

EnergyPtr make_quadratic(const Mat& Q) { return std::make_shared<Quadratic>(Q); }
EnergyPtr make_double_well(int d) { return std::make_shared<DoubleWell>(d); }
EnergyPtr make_obstacle(double a, double b, int d) {
  return std::make_shared<Obstacle>(a, b, d);
}

}  // namespace wedflow
