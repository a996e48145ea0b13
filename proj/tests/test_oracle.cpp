#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wedflow/errors.hpp"
#include "wedflow/flow.hpp"
#include "wedflow/oracle.hpp"
#include "wedflow/wed.hpp"

using namespace wedflow;
namespace orc = wedflow::oracle;

TEST_CASE("config validation") {
  CHECK_THROWS_AS(orc::ExampleConfig(-0.1, 0.25), ParameterError);
  CHECK_THROWS_AS(orc::ExampleConfig(1.1, 0.25), ParameterError);
  CHECK_THROWS_AS(orc::ExampleConfig(0.5, 0.0), ParameterError);
  CHECK_NOTHROW(orc::ExampleConfig(0.0, 0.25));
  CHECK_NOTHROW(orc::ExampleConfig(1.0, 0.4));
}

TEST_CASE("characteristic roots at eps=0.25") {
  // r = (1 -+ sqrt(4 eps + 1)) / (2 eps), eps=0.25: (1 -+ sqrt(2)) * 2
  auto c = orc::wed_coefficients(orc::ExampleConfig(0.7, 0.25));
  CHECK(c.r_minus == doctest::Approx(2.0 * (1.0 - std::sqrt(2.0))).epsilon(1e-14));
  CHECK(c.r_plus == doctest::Approx(2.0 * (1.0 + std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("root identities (Vieta)") {
  for (double eps : {0.4, 0.25, 0.1, 0.05}) {
    auto c = orc::wed_coefficients(orc::ExampleConfig(0.5, eps));
    CHECK(c.r_minus * c.r_plus == doctest::Approx(-1.0 / eps).epsilon(1e-12));
    CHECK(c.r_minus + c.r_plus == doctest::Approx(1.0 / eps).epsilon(1e-12));
  }
}

TEST_CASE("regularized minimizer satisfies both boundary conditions") {
  for (double eps : {0.4, 0.1, 0.05}) {
    orc::ExampleConfig cfg(0.7, eps);
    CHECK(orc::exact_wed_minimizer(cfg, 0.0) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(std::abs(eps * orc::exact_wed_minimizer_dot(cfg, 1.0)) < 1e-10);
  }
}

TEST_CASE("full certification report passes") {
  bool pass = false;
  const std::string report = orc::certification_report(&pass);
  INFO(report);
  CHECK(pass);
  CHECK(report.find("FAIL") == std::string::npos);
}

TEST_CASE("exact flow values") {
  // y(t) = (1 + t u0) e^{-t}
  CHECK(orc::exact_flow(0.7, 0.0) == doctest::Approx(1.0));
  CHECK(orc::exact_flow(0.7, 1.0) == doctest::Approx(1.7 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(orc::exact_flow(0.0, 0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("exact target values and symmetry") {
  // J(u0) = (1/8)(1 - 5 e^{-2})(u0^2 + (u0-1)^2); value 0.040415... at the ends
  CHECK(orc::exact_J(1.0) == doctest::Approx(0.0404154479771171).epsilon(1e-12));
  CHECK(orc::exact_J(0.0) == doctest::Approx(orc::exact_J(1.0)).epsilon(1e-14));
  CHECK(orc::exact_J(0.3) == doctest::Approx(orc::exact_J(0.7)).epsilon(1e-14));
  // optimum at u0 = 1/2 is half the endpoint value
  CHECK(orc::exact_J_optimum() == doctest::Approx(0.5 * orc::exact_J(1.0)).epsilon(1e-14));
  CHECK(orc::exact_J_optimum() == doctest::Approx((1.0 - 5.0 * std::exp(-2.0)) / 16.0).epsilon(1e-13));
  CHECK(orc::exact_J(0.5) == doctest::Approx(orc::exact_J_optimum()).epsilon(1e-13));
}

TEST_CASE("minimum value: quadrature vs closed-form expression") {
  for (double eps : {0.4, 0.25, 0.1}) {
    for (double u0 : {0.0, 0.5, 1.0}) {
      orc::ExampleConfig cfg(u0, eps);
      CHECK(orc::exact_M_eps(cfg) ==
            doctest::Approx(orc::lemma1_M_eps(cfg)).epsilon(1e-9));
    }
  }
}

TEST_CASE("minimum value is a lower bound on competitors") {
  // W at the gradient-flow trajectory must dominate the certified minimum
  auto phi = make_quadratic(Mat::Identity(1, 1));
  auto fam = ControlFamily::example_exp();
  for (double eps : {0.4, 0.25}) {
    orc::ExampleConfig cfg(0.7, eps);
    TimeGrid g(1.0, 2000);
    WedProblem wp(phi, Vec::Constant(1, 1.0), g, eps);
    FlowProblem fp(phi, Vec::Constant(1, 1.0), g);
    ControlPoint u{&fam, Vec::Constant(1, 0.7)};
    auto [yflow, rep] = solve_gradient_flow(fp, u);
    const double W = wed_value(wp, yflow, u);
    CHECK(W >= orc::exact_M_eps(cfg) - 1e-6);
  }
}

TEST_CASE("frozen regression values") {
  // values certified by the boundary/residual certificate, frozen here so a
  // silent change in the closed forms is visible
  orc::ExampleConfig cfg(0.7, 0.25);
  auto c = orc::wed_coefficients(cfg);
  CHECK(c.c_minus == doctest::Approx(3.79942913758852).epsilon(1e-12));
  CHECK(c.c_plus == doctest::Approx(0.000570862411483604).epsilon(1e-9));
  CHECK(orc::exact_M_eps(cfg) == doctest::Approx(-0.0216421507230419).epsilon(1e-9));
  CHECK(orc::exact_j_eps(cfg) == doctest::Approx(0.0266940871247783).epsilon(1e-9));
  CHECK(orc::exact_wed_minimizer(cfg, 0.5) == doctest::Approx(0.81898693577437).epsilon(1e-11));
}

TEST_CASE("j_eps is nonnegative and near J for small eps") {
  for (double u0 : {0.0, 0.5, 1.0}) {
    CHECK(orc::exact_j_eps(orc::ExampleConfig(u0, 0.25)) >= 0.0);
    const double j_small = orc::exact_j_eps(orc::ExampleConfig(u0, 0.01));
    CHECK(std::abs(j_small - orc::exact_J(u0)) < 5e-3);
  }
}
