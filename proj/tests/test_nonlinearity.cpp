#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "socdiff/nonlinearity.hpp"

using namespace socdiff;

TEST_CASE("sign_lambda piecewise values") {
  CHECK(sign_lambda(0.2, 0.1) == 1.0);
  CHECK(sign_lambda(0.05, 0.1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sign_lambda(0.0, 0.3) == 0.0);
  CHECK(sign_lambda(-0.2, 0.1) == -1.0);
  CHECK(sign_lambda(0.1, 0.1) == 1.0);  // boundary of the transition zone
  CHECK_THROWS_AS(sign_lambda(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sign_lambda(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("sign_lambda is odd, nondecreasing and 1/lambda-Lipschitz") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  const double lambda = 0.3;
  for (int i = 0; i < 500; ++i) {
    const double a = dist(rng);
    const double b = dist(rng);
    CHECK(sign_lambda(-a, lambda) == doctest::Approx(-sign_lambda(a, lambda)));
    CHECK(std::abs(sign_lambda(a, lambda) - sign_lambda(b, lambda)) <=
          std::abs(a - b) / lambda + 1e-15);
    CHECK((sign_lambda(a, lambda) - sign_lambda(b, lambda)) * (a - b) >= 0.0);
  }
}

TEST_CASE("psi_lambda values") {
  const auto lin = NonlinearitySpec<double>::linear(1.0, 1.0);
  CHECK(psi_lambda(0.05, lin, 0.1) == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(psi_lambda(1.0, lin, 0.1) == doctest::Approx(2.0).epsilon(1e-15));

  const auto pw = NonlinearitySpec<double>::piecewise_linear(1.0, 2.0, 1.0, 0.3);
  CHECK(psi_lambda(0.0, pw, 0.1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(pw.psi_tilde(2.0) == doctest::Approx(4.3).epsilon(1e-15));
  CHECK(pw.psi_tilde(-2.0) == doctest::Approx(-1.7).epsilon(1e-15));
}

TEST_CASE("psi_lambda derivative bounds") {
  const auto pw = NonlinearitySpec<double>::piecewise_linear(1.0, 2.0, 1.0, 0.0);
  const double lambda = 0.1;
  CHECK(pw.delta_min() == 1.0);
  CHECK(pw.lip() == 2.0);
  CHECK(psi_lambda_prime(0.0, pw, lambda) ==
        doctest::Approx(10.0 + 1.0));  // kink slope min(alpha1, alpha2)
  CHECK(psi_lambda_prime(0.05, pw, lambda) == doctest::Approx(12.0));
  CHECK(psi_lambda_prime(0.5, pw, lambda) == doctest::Approx(2.0));
  CHECK(psi_lambda_prime(-0.5, pw, lambda) == doctest::Approx(1.0));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double r = dist(rng);
    CHECK(psi_lambda_prime(r, pw, lambda) >= pw.delta_min());
    CHECK(psi_lambda_prime(r, pw, lambda) <= lipschitz_constant(pw, lambda));
  }
}

TEST_CASE("monotonicity with modulus delta_min") {
  const auto pw = NonlinearitySpec<double>::piecewise_linear(0.7, 2.0, 0.5, -0.1);
  const double lambda = 0.05;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const double a = dist(rng);
    const double b = dist(rng);
    const double lhs =
        (psi_lambda(a, pw, lambda) - psi_lambda(b, pw, lambda)) * (a - b);
    const double rhs = pw.delta_min() * (a - b) * (a - b);
    CHECK(lhs >= rhs * (1.0 - 1e-12) - 1e-30);
  }
}

TEST_CASE("pointwise graph convergence as lambda -> 0") {
  const auto lin = NonlinearitySpec<double>::linear(1.3, 0.8);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 300; ++i) {
    double r = dist(rng);
    if (std::abs(r) < 1e-6) r = 0.5;
    for (const double lambda : {0.5, 0.1, 0.01, 1e-4}) {
      const double limit = lin.rho * (r > 0 ? 1.0 : -1.0) + lin.psi_tilde(r);
      const double err = std::abs(psi_lambda(r, lin, lambda) - limit);
      CHECK(err <= lin.rho * std::min(1.0, lambda / std::abs(r)) + 1e-15);
    }
  }
}

TEST_CASE("lipschitz_constant") {
  const auto lin = NonlinearitySpec<double>::linear(1.0, 1.0);
  CHECK(lipschitz_constant(lin, 0.1) == doctest::Approx(11.0));
  CHECK(lipschitz_constant(lin, 0.01) == doctest::Approx(101.0));
  CHECK(lipschitz_constant(lin, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(lipschitz_constant(lin, 0.0), std::invalid_argument);
}

TEST_CASE("hypothesis validation") {
  const auto ok = validate_hypothesis(NonlinearitySpec<double>::linear(1.0, 1.0));
  CHECK(ok.valid);
  CHECK(ok.delta_min == 1.0);
  CHECK(ok.lip == 1.0);

  const auto bad_c =
      validate_hypothesis(NonlinearitySpec<double>::piecewise_linear(1.0, 2.0, 1.0, 1.5));
  CHECK_FALSE(bad_c.valid);
  CHECK(bad_c.summary().find("Psi(0)") != std::string::npos);

  const auto bad_rho = validate_hypothesis(NonlinearitySpec<double>::linear(0.0, 1.0));
  CHECK_FALSE(bad_rho.valid);
  CHECK(bad_rho.summary().find("rho") != std::string::npos);

  const auto bad_slope = validate_hypothesis(NonlinearitySpec<double>::linear(1.0, 0.0));
  CHECK_FALSE(bad_slope.valid);

  // boundary case |c| == rho still admits 0 in Psi(0)
  CHECK(validate_hypothesis(
            NonlinearitySpec<double>::piecewise_linear(1.0, 2.0, 1.0, 1.0))
            .valid);
}
