#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wedflow/optctl.hpp"
#include "wedflow/oracle.hpp"

using namespace wedflow;
namespace orc = wedflow::oracle;

namespace {

ControlFamily kExp = ControlFamily::example_exp();
EnergyPtr kId = make_quadratic(Mat::Identity(1, 1));

ControlPoint ctrl(double u0) { return ControlPoint{&kExp, Vec::Constant(1, u0)}; }

}  // namespace

TEST_CASE("eval_J on the benchmark target matches the closed form") {
  auto J = TargetFunctional::sec21();
  TimeGrid g(1.0, 2000);
  for (double u0 : {0.0, 0.3, 0.5, 1.0}) {
    Trajectory y(g, 1);
    for (int k = 0; k <= g.N(); ++k)
      y.at(k) = Vec::Constant(1, orc::exact_flow(u0, g.node(k)));
    CHECK(eval_J(J, y, ctrl(u0)) == doctest::Approx(orc::exact_J(u0)).epsilon(1e-6));
  }
}

TEST_CASE("eval_J zero target vanishes") {
  auto J = TargetFunctional::zero(1);
  TimeGrid g(1.0, 50);
  Trajectory y(g, 1);
  for (int k = 0; k <= g.N(); ++k) y.at(k) = Vec::Constant(1, 2.0);
  CHECK(eval_J(J, y, ctrl(0.7)) == doctest::Approx(0.0));
}

TEST_CASE("minimize_over_box recovers quadratic optima deterministically") {
  std::vector<std::function<Vec(double)>> basis;
  basis.push_back([](double) { return Vec::Constant(1, 1.0); });
  basis.push_back([](double t) { return Vec::Constant(1, t); });
  auto fam = ControlFamily::basis_box(basis, Vec::Constant(2, -1.0),
                                      Vec::Constant(2, 1.0), 1);
  auto f = [](const Vec& p) {
    return (p(0) - 0.3) * (p(0) - 0.3) + 2.0 * (p(1) + 0.4) * (p(1) + 0.4);
  };
  OuterOptions opts;
  auto [p1, v1] = minimize_over_box(fam, f, opts);
  CHECK(p1(0) == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(p1(1) == doctest::Approx(-0.4).epsilon(1e-6));
  // bit-for-bit repeatable
  auto [p2, v2] = minimize_over_box(fam, f, opts);
  CHECK(p1(0) == p2(0));
  CHECK(p1(1) == p2(1));
  CHECK(v1 == v2);
  // constrained optimum lands on the box face
  auto g = [](const Vec& p) { return (p(0) - 3.0) * (p(0) - 3.0) + p(1) * p(1); };
  auto [pc, vc] = minimize_over_box(fam, g, opts);
  CHECK(pc(0) == doctest::Approx(1.0));
}

TEST_CASE("solve_P on the benchmark recovers u0* = 1/2") {
  auto J = TargetFunctional::sec21();
  FlowProblem flow(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 2000));
  auto pair = solve_P(J, flow, kExp, {});
  CHECK(std::abs(pair.u.params(0) - 0.5) < 1e-3);
  CHECK(std::abs(pair.value - orc::exact_J_optimum()) < 1e-4);
  CHECK(pair.penalty_part == 0.0);
  CHECK(pair.J_part == pair.value);
}

TEST_CASE("solve_P with two-parameter family matches brute-force lattice") {
  std::vector<std::function<Vec(double)>> basis;
  basis.push_back([](double t) { return Vec::Constant(1, std::exp(-t)); });
  basis.push_back([](double t) { return Vec::Constant(1, t); });
  auto fam = ControlFamily::basis_box(basis, Vec::Constant(2, 0.0),
                                      Vec::Constant(2, 1.0), 1);
  auto J = TargetFunctional::sec21();
  FlowProblem flow(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 200));
  auto pair = solve_P(J, flow, fam);

  double best = kInf;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      Vec p(2);
      p << i / 40.0, j / 40.0;
      ControlPoint u{&fam, p};
      auto [y, rep] = solve_gradient_flow(flow, u);
      best = std::min(best, eval_J(J, y, u));
    }
  }
  CHECK(pair.value <= best + 1e-9);
}

TEST_CASE("solve_P_eps agrees with a fine scan of j_eps") {
  auto J = TargetFunctional::sec21();
  WedProblem wed(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 400), 0.25);
  auto pair = solve_P_eps(J, wed, kExp);

  double best = kInf, best_u = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double u0 = i / 1000.0;
    auto [y, rep] = wed_minimize(wed, ctrl(u0));
    const double v = eval_J(J, y, ctrl(u0));
    if (v < best) { best = v; best_u = u0; }
  }
  CHECK(pair.value <= best + 1e-6);
  CHECK(std::abs(pair.u.params(0) - best_u) < 2e-3);
}

TEST_CASE("penalized inner solve: large lambda reproduces J-dominated limit") {
  auto J = TargetFunctional::sec21();
  WedProblem wed(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 200), 0.25);
  auto u = ctrl(0.5);
  MepsCache cache;
  const double M = cache.get(wed, u);
  auto [ymin, rep0] = wed_minimize(wed, u);

  // lambda -> 0: penalty dominates, inner minimizer collapses onto y_eps^u
  auto [y_small, r1] = penalized_inner_minimize(J, wed, u, 1e-6, M, ymin, {});
  CHECK(norm_h1(y_small - ymin) < 1e-3);

  // lambda large: the W-penalty is weak; J alone pulls y toward y_ref
  auto [y_big, r2] = penalized_inner_minimize(J, wed, u, 1e6, M, ymin, {});
  CHECK(norm_h1(y_big - ymin) > norm_h1(y_small - ymin));
  CHECK(eval_J(J, y_big, u) <= eval_J(J, ymin, u) + 1e-12);
}

TEST_CASE("solve_P_eps_lambda: penalty nonnegative, values ordered") {
  auto J = TargetFunctional::sec21();
  WedProblem wed(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 200), 0.25);
  MepsCache cache;
  auto pl = solve_P_eps_lambda(J, wed, kExp, 1e-3, {}, &cache);
  CHECK(pl.penalty_part >= -1e-12);
  CHECK(pl.value == doctest::Approx(pl.J_part + pl.penalty_part).epsilon(1e-12));
  // relaxing over y can only lower the constrained-value optimum
  auto pe = solve_P_eps(J, wed, kExp);
  CHECK(pl.value <= pe.value + 1e-8);
  CHECK(pl.report.cond_estimate >= 1.0);
}

TEST_CASE("solve_P_eps_lambda deterministic across repeats") {
  auto J = TargetFunctional::sec21();
  WedProblem wed(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 100), 0.25);
  auto a = solve_P_eps_lambda(J, wed, kExp, 1e-2);
  auto b = solve_P_eps_lambda(J, wed, kExp, 1e-2);
  CHECK(a.u.params(0) == b.u.params(0));
  CHECK(a.value == b.value);
}

TEST_CASE("threaded outer scan matches single-threaded result") {
  auto J = TargetFunctional::sec21();
  WedProblem wed(kId, Vec::Constant(1, 1.0), TimeGrid(1.0, 200), 0.25);
  OuterOptions par;
  par.threads = 4;
  auto a = solve_P_eps(J, wed, kExp);
  auto b = solve_P_eps(J, wed, kExp, par);
  CHECK(a.u.params(0) == doctest::Approx(b.u.params(0)).epsilon(1e-12));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
}
