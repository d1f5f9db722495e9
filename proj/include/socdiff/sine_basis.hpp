#pragma once

// Discrete sine eigenbasis of the Dirichlet Laplacian on (0, pi).
//
// The continuum eigenfunctions e_k(xi) = sqrt(2/pi) sin(k xi) sampled at
// the interior nodes are exactly orthonormal for the h-weighted inner
// product and are exact eigenvectors of the 3-point stencil, with
// eigenvalues lambda_k^(h) = (2 - 2 cos(k h)) / h^2.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "socdiff/grid.hpp"

namespace socdiff {

/// Coefficients against the discretely orthonormal sine vectors, k = 1..n.
template <class Scalar = double>
struct SpectralCoeffs {
  Grid<Scalar> grid;
  VectorX<Scalar> coeffs;
};

/// Samples of e_k(xi) = sqrt(2/pi) sin(k xi) at the interior nodes.
template <class Scalar>
VectorX<Scalar> sine_mode(const Grid<Scalar>& g, Eigen::Index k) {
  if (k < 1) throw std::invalid_argument("sine_mode: k must be >= 1");
  const Scalar scale = std::sqrt(Scalar(2) / std::numbers::pi_v<Scalar>);
  VectorX<Scalar> e(g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    e[i] = scale * std::sin(static_cast<Scalar>(k) * g.nodes[i]);
  }
  return e;
}

/// Eigenvalue of -Laplacian_h on sine_mode(g, k).
template <class Scalar>
Scalar discrete_eigenvalue(const Grid<Scalar>& g, Eigen::Index k) {
  const Scalar kh = static_cast<Scalar>(k) * g.h;
  return (Scalar(2) - Scalar(2) * std::cos(kh)) / (g.h * g.h);
}

/// Symmetric transform matrix E with E(k-1, i-1) = e_k(xi_i).
template <class Scalar>
MatrixX<Scalar> sine_matrix(const Grid<Scalar>& g) {
  const Scalar scale = std::sqrt(Scalar(2) / std::numbers::pi_v<Scalar>);
  MatrixX<Scalar> E(g.n, g.n);
  for (Eigen::Index k = 0; k < g.n; ++k) {
    for (Eigen::Index i = 0; i < g.n; ++i) {
      E(k, i) = scale * std::sin(static_cast<Scalar>(k + 1) * g.nodes[i]);
    }
  }
  return E;
}

/// u_hat_k = h * sum_i u(xi_i) e_k(xi_i).
template <class Scalar>
SpectralCoeffs<Scalar> sine_transform(const GridFunction<Scalar>& u) {
  if (!u.values.allFinite()) {
    throw std::invalid_argument("sine_transform: non-finite input");
  }
  return SpectralCoeffs<Scalar>{u.grid,
                                (u.grid.h * (sine_matrix(u.grid) * u.values)).eval()};
}

/// u(xi_i) = sum_k u_hat_k e_k(xi_i); exact inverse of sine_transform.
template <class Scalar>
GridFunction<Scalar> inverse_sine_transform(const SpectralCoeffs<Scalar>& c) {
  return GridFunction<Scalar>(c.grid,
                              (sine_matrix(c.grid) * c.coeffs).eval());
}

/// Single coefficient u_hat_k without forming the full matrix.
template <class Scalar>
Scalar sine_coefficient(const GridFunction<Scalar>& u, Eigen::Index k) {
  return u.grid.h * sine_mode(u.grid, k).dot(u.values);
}

/// Spectral route to the H^-1 norm: sqrt(sum_k u_hat_k^2 / lambda_k^(h)).
/// Agrees with h_minus1_norm (tridiagonal route) to machine precision.
template <class Scalar>
Scalar h_minus1_norm_spectral(const GridFunction<Scalar>& u) {
  const SpectralCoeffs<Scalar> c = sine_transform(u);
  Scalar sq = 0;
  for (Eigen::Index k = 0; k < u.grid.n; ++k) {
    sq += c.coeffs[k] * c.coeffs[k] / discrete_eigenvalue(u.grid, k + 1);
  }
  return std::sqrt(sq);
}

}  // namespace socdiff
