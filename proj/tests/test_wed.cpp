#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wedflow/flow.hpp"
#include "wedflow/oracle.hpp"
#include "wedflow/wed.hpp"

using namespace wedflow;
namespace orc = wedflow::oracle;

namespace {

ControlFamily kExp = ControlFamily::example_exp();
EnergyPtr kId = make_quadratic(Mat::Identity(1, 1));

WedProblem bench(double eps, int N) {
  return WedProblem(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, N), eps);
}

ControlPoint ctrl(double u0) { return ControlPoint{&kExp, Vec::Constant(1, u0)}; }

double minimizer_c0_error(double eps, double u0, int N) {
  auto p = bench(eps, N);
  auto [y, rep] = wed_minimize(p, ctrl(u0));
  orc::ExampleConfig cfg(u0, eps);
  double err = 0.0;
  for (int k = 0; k <= N; ++k)
    err = std::max(err, std::abs(y.at(k)(0) - orc::exact_wed_minimizer(cfg, p.grid.node(k))));
  return err;
}

Trajectory bump(const TimeGrid& g, unsigned seed, double amp) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coef(-amp, amp);
  const double a = coef(rng), b = coef(rng);
  Trajectory d(g, 1);
  for (int k = 0; k <= g.N(); ++k) {
    const double t = g.node(k);
    d.at(k) = Vec::Constant(1, t * (a + b * std::sin(7.0 * t)));  // vanishes at 0
  }
  return d;
}

}  // namespace

TEST_CASE("mass vector: positive exact exponential cell integrals") {
  auto p = bench(0.25, 100);
  double sum = 0.0;
  for (int k = 0; k < 100; ++k) {
    CHECK(p.mu[k] > 0.0);
    sum += p.mu[k];
  }
  // sum telescopes to eps (1 - e^{-T/eps})
  CHECK(sum == doctest::Approx(0.25 * (1.0 - std::exp(-4.0))).epsilon(1e-13));
}

TEST_CASE("epsilon guards") {
  auto dw = make_double_well(1);
  // kappa = -1: eps0 = 1/4, larger eps rejected
  CHECK_THROWS_AS(WedProblem(dw, Vec::Constant(1, 0.5), TimeGrid(1.0, 100), 0.3),
                  ParameterError);
  CHECK_NOTHROW(WedProblem(dw, Vec::Constant(1, 0.5), TimeGrid(1.0, 100), 0.2));
  CHECK(WedProblem(dw, Vec::Constant(1, 0.5), TimeGrid(1.0, 100), 0.2).epsilon0() ==
        doctest::Approx(0.25));
  // underflow guard eps < 1e-3 T
  CHECK_THROWS_AS(bench(5e-4, 100), ParameterError);
  CHECK(bench(0.25, 10).epsilon0() == std::numeric_limits<double>::infinity());
}

TEST_CASE("zero control, zero initial state: minimizer is identically zero") {
  WedProblem p(kId, Vec::Zero(1), TimeGrid(1.0, 50), 0.25);
  auto [y, rep] = wed_minimize(p, ctrl(0.0));
  CHECK(rep.converged);
  for (int k = 0; k <= 50; ++k) CHECK(std::abs(y.at(k)(0)) < 1e-12);
  CHECK(wed_value(p, y, ctrl(0.0)) == doctest::Approx(0.0));
}

TEST_CASE("benchmark minimizer converges with order >= 1.5") {
  const double e100 = minimizer_c0_error(0.25, 0.7, 100);
  const double e200 = minimizer_c0_error(0.25, 0.7, 200);
  const double e400 = minimizer_c0_error(0.25, 0.7, 400);
  CHECK(e200 < e100);
  CHECK(e400 < e200);
  const double rate = std::log2(e100 / e400) / 2.0;
  CHECK(rate >= 1.5);
}

TEST_CASE("natural terminal condition: |y_N - y_{N-1}|/h = O(h)") {
  double c_prev = -1.0;
  for (int N : {200, 400, 800}) {
    auto p = bench(0.25, N);
    auto [y, rep] = wed_minimize(p, ctrl(1.0));
    const double h = p.grid.h();
    const double slope = std::abs(y.at(N)(0) - y.at(N - 1)(0)) / h;
    const double c = slope / h;
    if (c_prev > 0.0) CHECK(c < 2.0 * c_prev);  // C stays bounded as h -> 0
    c_prev = c;
  }
}

TEST_CASE("wed_value: infinity off the pinned/constrained set, grid mismatch") {
  auto p = bench(0.25, 40);
  Trajectory y(p.grid, 1);
  for (int k = 0; k <= 40; ++k) y.at(k) = Vec::Constant(1, 0.5);  // y(0) != y0
  CHECK(wed_value(p, y, ctrl(0.5)) == std::numeric_limits<double>::infinity());

  auto obs = make_obstacle(-1.0, 1.0, 1);
  WedProblem po(obs, Vec::Constant(1, 0.5), TimeGrid(1.0, 40), 0.25);
  Trajectory z(po.grid, 1);
  z.at(0) = Vec::Constant(1, 0.5);
  for (int k = 1; k <= 40; ++k) z.at(k) = Vec::Constant(1, 1.5);  // outside box
  CHECK(wed_value(po, z, ctrl(0.5)) == std::numeric_limits<double>::infinity());

  Trajectory other(TimeGrid(1.0, 41), 1);
  CHECK_THROWS_AS(wed_value(p, other, ctrl(0.5)), InputError);
}

TEST_CASE("m_eps approaches the continuum minimum at second order") {
  orc::ExampleConfig cfg(1.0, 0.25);
  const double M = orc::exact_M_eps(cfg);
  double prev = 0.0;
  for (int N : {100, 200, 400}) {
    const double err = std::abs(m_eps(bench(0.25, N), ctrl(1.0)) - M);
    if (prev != 0.0) CHECK(err < 0.35 * prev);  // ~ factor 4 per halving
    prev = err;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("value-identity cross-check: discrete agreement at order >= 1") {
  double prev = 0.0;
  for (int N : {200, 400, 800}) {
    auto p = bench(0.25, N);
    const double gap = std::abs(lemma1_value(p, ctrl(0.7)) - m_eps(p, ctrl(0.7)));
    CHECK(gap < 5e-3);
    if (prev != 0.0) CHECK(gap < 0.7 * prev);
    prev = gap;
  }
}

TEST_CASE("coercivity gap: zero at the minimizer, bounded on random bumps") {
  auto p = bench(0.25, 300);
  auto u = ctrl(0.7);
  auto [ymin, rep] = wed_minimize(p, u);
  auto [lhs0, rhs0] = coercivity_gap(p, ymin, u);
  CHECK(std::abs(lhs0) < 1e-10);
  CHECK(std::abs(rhs0) < 1e-8);

  for (unsigned seed = 0; seed < 100; ++seed) {
    auto y = ymin + bump(p.grid, seed, 0.5);
    auto [lhs, rhs] = coercivity_gap(p, y, u);
    CHECK(rhs > 0.0);
    CHECK(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("coercivity gap scaling: rhs grows quadratically near the minimum") {
  auto p = bench(0.25, 200);
  auto u = ctrl(0.5);
  auto [ymin, rep] = wed_minimize(p, u);
  auto d = bump(p.grid, 42, 1.0);
  auto [l1, r1] = coercivity_gap(p, ymin + d, u);
  auto [l2, r2] = coercivity_gap(p, ymin + d.scaled(0.5), u);
  CHECK(r2 == doctest::Approx(0.25 * r1).epsilon(1e-6));
  CHECK(l2 == doctest::Approx(0.25 * l1).epsilon(1e-6));
}

TEST_CASE("midpoint convexity of the discrete functional") {
  auto p = bench(0.25, 80);
  auto u = ctrl(0.3);
  auto [ymin, rep] = wed_minimize(p, u);
  for (unsigned seed = 0; seed < 30; ++seed) {
    auto a = ymin + bump(p.grid, 2 * seed, 0.8);
    auto b = ymin + bump(p.grid, 2 * seed + 1, 0.8);
    const double wm = wed_value(p, (a + b).scaled(0.5), u);
    CHECK(wm <= 0.5 * (wed_value(p, a, u) + wed_value(p, b, u)) + 1e-12);
  }
}

TEST_CASE("minimizer unique across restarts") {
  auto p = bench(0.25, 150);
  auto u = ctrl(0.7);
  auto [yref, rep] = wed_minimize(p, u);
  for (unsigned seed = 0; seed < 5; ++seed) {
    auto [y, r] = wed_minimize_from(p, u, yref + bump(p.grid, seed, 2.0));
    CHECK(r.converged);
    CHECK(norm_h1(y - yref) < 1e-7);
  }
}

TEST_CASE("scaled EL residual below tolerance at the solution") {
  WedOptions opts;
  opts.tol = 1e-10;
  auto p = bench(0.25, 200);
  auto [y, rep] = wed_minimize(p, ctrl(0.7), opts);
  auto res = el_residual(p, y, ctrl(0.7));
  double scale = 0.0;
  for (int k = 0; k <= 200; ++k) scale = std::max(scale, y.at(k).lpNorm<Eigen::Infinity>());
  for (const auto& r : res)
    CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + scale));
  CHECK(rep.final_residual <= opts.tol * (1.0 + scale));
}

TEST_CASE("minimizer is Lipschitz in the control") {
  // |y(u1) - y(u2)|_H1 <= L |u1 - u2|_L2 with one L over all pairs
  auto p = bench(0.25, 120);
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> us(0.0, 1.0);
  const double L = 20.0;
  for (int rep_i = 0; rep_i < 20; ++rep_i) {
    const double a = us(rng), b = us(rng);
    auto [ya, r1] = wed_minimize(p, ctrl(a));
    auto [yb, r2] = wed_minimize(p, ctrl(b));
    const double du = norm_l2(render_control(ctrl(a), p.grid) -
                              render_control(ctrl(b), p.grid));
    CHECK(norm_h1(ya - yb) <= L * du + 1e-12);
  }
}

TEST_CASE("prox-only path: obstacle problem solves and satisfies constraints") {
  auto obs = make_obstacle(-0.8, 0.8, 1);
  WedProblem p(obs, Vec::Constant(1, 0.8), TimeGrid(1.0, 100), 0.25);
  auto [y, rep] = wed_minimize(p, ctrl(1.0));
  CHECK(rep.converged);
  for (int k = 0; k <= 100; ++k) {
    CHECK(y.at(k)(0) <= 0.8 + 1e-12);
    CHECK(y.at(k)(0) >= -0.8 - 1e-12);
  }
  // minimum among constrained competitors built from clamped bumps
  const double W = wed_value(p, y, ctrl(1.0));
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto cand = y + bump(p.grid, seed, 0.3);
    for (int k = 0; k <= 100; ++k)
      cand.at(k)(0) = std::clamp(cand.at(k)(0), -0.8, 0.8);
    cand.at(0) = p.y0;
    CHECK(wed_value(p, cand, ctrl(1.0)) >= W - 1e-9);
  }
}

TEST_CASE("M cache returns the solver value and is reusable") {
  MepsCache cache;
  auto p = bench(0.25, 100);
  const double a = cache.get(p, ctrl(0.7));
  const double b = cache.get(p, ctrl(0.7));
  CHECK(a == b);
  CHECK(a == doctest::Approx(m_eps(p, ctrl(0.7))).epsilon(1e-12));
  cache.clear();
  CHECK(cache.get(p, ctrl(0.7)) == doctest::Approx(a).epsilon(1e-12));
}
