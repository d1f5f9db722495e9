#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "socdiff/grid.hpp"
#include "socdiff/sine_basis.hpp"

using namespace socdiff;

namespace {

GridFunction<double> random_field(const Grid<double>& g, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  GridFunction<double> u(g);
  for (Eigen::Index i = 0; i < g.n; ++i) u.values[i] = dist(rng);
  return u;
}

}  // namespace

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(make_grid<double>(0), std::invalid_argument);

  const auto g3 = make_grid<double>(3);
  CHECK(g3.h == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-15));

  const auto g1 = make_grid<double>(1);
  CHECK(g1.nodes[0] == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-15));

  const auto g255 = make_grid<double>(255);
  CHECK(g255.nodes[0] ==
        doctest::Approx(std::numbers::pi / 256.0).epsilon(1e-15));
  CHECK(g255.h * 256.0 == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  for (Eigen::Index i = 1; i < g255.n; ++i) {
    CHECK(g255.nodes[i] > g255.nodes[i - 1]);
  }
}

TEST_CASE("sine transform is discretely orthonormal") {
  const auto g = make_grid<double>(255);
  const GridFunction<double> e1(g, sine_mode(g, 1));
  const auto coeffs = sine_transform(e1);
  CHECK(coeffs.coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index k = 1; k < g.n; ++k) {
    CHECK(std::abs(coeffs.coeffs[k]) <= 1e-12);
  }

  const GridFunction<double> zero(g);
  CHECK(sine_transform(zero).coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sine transform round trip") {
  for (const Eigen::Index n : {1, 2, 17, 255}) {
    const auto g = make_grid<double>(n);
    const auto u = random_field(g, 42u + static_cast<std::uint32_t>(n));
    const auto back = inverse_sine_transform(sine_transform(u));
    const double rel = (back.values - u.values).cwiseAbs().maxCoeff() /
                       u.values.cwiseAbs().maxCoeff();
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("parseval identity") {
  const auto g = make_grid<double>(127);
  for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto u = random_field(g, seed);
    const double l2sq = l2_norm(u) * l2_norm(u);
    const double coeff_sq = sine_transform(u).coeffs.squaredNorm();
    CHECK(l2sq == doctest::Approx(coeff_sq).epsilon(1e-10));
  }
}

TEST_CASE("h_minus1_norm on eigenfunctions") {
  const auto g = make_grid<double>(511);
  const GridFunction<double> e1(g, sine_mode(g, 1));
  const GridFunction<double> e2(g, sine_mode(g, 2));
  CHECK(h_minus1_norm(e1) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(h_minus1_norm(e2) == doctest::Approx(0.5).epsilon(1e-4));
  // exact against the discrete eigenvalues
  CHECK(h_minus1_norm(e1) ==
        doctest::Approx(1.0 / std::sqrt(discrete_eigenvalue(g, 1)))
            .epsilon(1e-12));
}

TEST_CASE("h_minus1_norm of the constant field matches the sine series") {
  // |1|_{-1}^2 = sum over odd k of (8/pi) / k^4 = pi^3 / 12
  double series = 0;
  for (int k = 1; k <= 4001; k += 2) {
    const double k2 = static_cast<double>(k) * k;
    series += (8.0 / std::numbers::pi) / (k2 * k2);
  }
  const double expected = std::sqrt(series);
  CHECK(expected == doctest::Approx(1.6075).epsilon(2e-4));
  CHECK(expected == doctest::Approx(std::sqrt(std::pow(std::numbers::pi, 3) / 12.0))
                        .epsilon(1e-9));

  const auto g = make_grid<double>(255);
  const auto ones = GridFunction<double>::from_function(g, [](double) { return 1.0; });
  CHECK(h_minus1_norm(ones) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("h_minus1_norm zero iff zero, triangle inequality") {
  const auto g = make_grid<double>(63);
  CHECK(h_minus1_norm(GridFunction<double>(g)) == 0.0);

  for (std::uint32_t seed = 10; seed < 20; ++seed) {
    const auto u = random_field(g, seed);
    const auto v = random_field(g, seed + 1000);
    GridFunction<double> diff(g, (u.values - v.values).eval());
    CHECK(h_minus1_norm(u) <= h_minus1_norm(diff) + h_minus1_norm(v) + 1e-12);
    CHECK(h_minus1_norm(u) > 0.0);
  }
}

TEST_CASE("spectral and tridiagonal H^-1 routes agree") {
  const auto g = make_grid<double>(127);
  for (std::uint32_t seed : {7u, 8u, 9u}) {
    const auto u = random_field(g, seed);
    CHECK(h_minus1_norm(u) ==
          doctest::Approx(h_minus1_norm_spectral(u)).epsilon(1e-10));
  }
}

TEST_CASE("lp norms and extrema") {
  const auto g = make_grid<double>(255);
  const auto ones = GridFunction<double>::from_function(g, [](double) { return 1.0; });
  // midpoint quadrature of the constant: exactly pi - h
  CHECK(l1_norm(ones) ==
        doctest::Approx(std::numbers::pi - g.h).epsilon(1e-13));
  CHECK(std::abs(l1_norm(ones) - std::numbers::pi) <= 1.01 * g.h);

  const GridFunction<double> zero(g);
  CHECK(l1_norm(zero) == 0.0);
  CHECK(l2_norm(zero) == 0.0);

  const GridFunction<double> e1(g, sine_mode(g, 1));
  CHECK(l1_norm(e1) ==
        doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-4));
  CHECK(max_value(e1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi))
                             .epsilon(1e-5));
  CHECK(min_value(e1) > 0.0);
}

TEST_CASE("laplacian eigen-action and exact inverse") {
  const auto g = make_grid<double>(255);
  const GridFunction<double> e1(g, sine_mode(g, 1));
  const double lam1 = discrete_eigenvalue(g, 1);

  const auto lap = apply_laplacian(e1);
  CHECK((lap.values + lam1 * e1.values).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK(apply_laplacian(GridFunction<double>(g)).values.cwiseAbs().maxCoeff() ==
        0.0);

  const GridFunction<double> e2(g, sine_mode(g, 2));
  const auto inv = apply_inverse_laplacian(e2);
  CHECK((inv.values + e2.values / discrete_eigenvalue(g, 2)).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK((inv.values + e2.values / 4.0).cwiseAbs().maxCoeff() <= 1e-4);

  for (std::uint32_t seed : {21u, 22u}) {
    const auto u = random_field(g, seed);
    const auto round = apply_inverse_laplacian(apply_laplacian(u));
    const double rel = (round.values - u.values).cwiseAbs().maxCoeff() /
                       u.values.cwiseAbs().maxCoeff();
    CHECK(rel <= 1e-10);
  }
}

TEST_CASE("gamma constant and discrete estimate") {
  const double gamma = gamma_constant<double>();
  CHECK(gamma == doctest::Approx(1.12838).epsilon(1e-5));

  // independent check of the concentration argument: the best impulse on a
  // fine grid realizes sup |x|_{-1} / |x|_{L^1} -> sqrt(pi)/2
  const double sup_ratio = 1.0 / estimate_gamma<double>(4095);
  CHECK(sup_ratio == doctest::Approx(0.88623).epsilon(2e-3));

  const double g255 = estimate_gamma<double>(255);
  const double g511 = estimate_gamma<double>(511);
  const double g1023 = estimate_gamma<double>(1023);
  CHECK(g255 == doctest::Approx(gamma).epsilon(0.02));
  CHECK(g511 <= g255 + 1e-12);
  CHECK(g1023 <= g511 + 1e-12);
  CHECK(g1023 >= gamma - 1e-12);
}

TEST_CASE("norm ordering |u|_L1 / |u|_-1 >= gamma") {
  const auto g = make_grid<double>(255);
  for (std::uint32_t seed = 50; seed < 60; ++seed) {
    const auto u = random_field(g, seed);
    const double ratio = l1_norm(u) / h_minus1_norm(u);
    CHECK(ratio >= gamma_constant<double>() * (1.0 - 1e-3));
  }
}

TEST_CASE("float instantiation") {
  const auto g = make_grid<float>(31);
  GridFunction<float> u(g);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    u.values[i] = std::sin(3.0f * g.nodes[i]);
  }
  const auto back = inverse_sine_transform(sine_transform(u));
  CHECK((back.values - u.values).cwiseAbs().maxCoeff() <= 1e-5f);
}
