#include "wedflow/quadrature.hpp"

#include <cmath>

#include "wedflow/errors.hpp"

namespace wedflow {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double recurse(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm, double whole, double tol, int depth,
               bool* ok) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    *ok = false;
    return left + right + delta / 15.0;
  }
  return recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, ok) +
         recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, ok);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, m, fm);
  bool ok = true;
  const double val = recurse(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth, &ok);
  if (!ok) {
    throw OracleError("adaptive_simpson: tolerance not met within max depth");
  }
  return val;
}

}  // namespace wedflow
