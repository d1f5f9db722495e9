#pragma once

// Uniform 1-D grid on (0, pi) with homogeneous Dirichlet boundary, the
// 3-point Laplacian stencil, and the discrete L^1 / L^2 / H^-1 norms.
//
// The discrete H^-1 norm is dual to the stencil Laplacian: |u|_{-1}^2 =
// h * u^T (-L_h)^{-1} u, evaluated with an O(n) tridiagonal solve. On the
// sine eigenbasis this equals sum_k u_hat_k^2 / lambda_k^(h) with
// lambda_k^(h) = (2 - 2 cos(k h)) / h^2, so dissipation identities of the
// implicit solver hold to machine precision rather than O(h^2).

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace socdiff {

template <class Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar = double>
struct Grid {
  Eigen::Index n{0};       // interior node count
  Scalar h{0};             // mesh width, h * (n + 1) == pi
  VectorX<Scalar> nodes;   // xi_i = i * h, i = 1..n

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n == b.n && a.h == b.h;
  }
};

template <class Scalar = double>
Grid<Scalar> make_grid(Eigen::Index n) {
  if (n < 1) {
    throw std::invalid_argument("make_grid: interior node count must be >= 1");
  }
  Grid<Scalar> g;
  g.n = n;
  g.h = std::numbers::pi_v<Scalar> / static_cast<Scalar>(n + 1);
  g.nodes.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.nodes[i] = static_cast<Scalar>(i + 1) * g.h;
  }
  return g;
}

/// Field samples at the interior nodes; boundary values are identically 0.
template <class Scalar = double>
struct GridFunction {
  Grid<Scalar> grid;
  VectorX<Scalar> values;

  GridFunction() = default;
  explicit GridFunction(Grid<Scalar> g)
      : grid(std::move(g)), values(VectorX<Scalar>::Zero(grid.n)) {}
  GridFunction(Grid<Scalar> g, VectorX<Scalar> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.n) {
      throw std::invalid_argument("GridFunction: value count != grid.n");
    }
  }

  template <class F>
  static GridFunction from_function(const Grid<Scalar>& g, F&& f) {
    GridFunction u(g);
    for (Eigen::Index i = 0; i < g.n; ++i) u.values[i] = f(g.nodes[i]);
    return u;
  }
};

namespace detail {

template <class Scalar>
void require_same_grid(const GridFunction<Scalar>& a,
                       const GridFunction<Scalar>& b) {
  if (!(a.grid == b.grid)) {
    throw std::invalid_argument("grid functions live on different grids");
  }
}

}  // namespace detail

/// Solves the tridiagonal system with bands (lower, diag, upper) by the
/// Thomas algorithm, O(n), no pivoting. Every system solved here is
/// diagonally dominant, so the elimination is stable.
template <class Scalar, class D0, class D1, class D2, class D3>
VectorX<Scalar> tridiagonal_solve(const Eigen::MatrixBase<D0>& lower,
                                  const Eigen::MatrixBase<D1>& diag,
                                  const Eigen::MatrixBase<D2>& upper,
                                  const Eigen::MatrixBase<D3>& rhs) {
  const Eigen::Index n = diag.size();
  VectorX<Scalar> c(n), x(n);
  Scalar piv = diag[0];
  c[0] = n > 1 ? upper[0] / piv : Scalar(0);
  x[0] = rhs[0] / piv;
  for (Eigen::Index i = 1; i < n; ++i) {
    piv = diag[i] - lower[i - 1] * c[i - 1];
    c[i] = i + 1 < n ? upper[i] / piv : Scalar(0);
    x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / piv;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    x[i] -= c[i] * x[i + 1];
  }
  return x;
}

namespace detail {

// Solves (-L_h) w = rhs for the constant stencil, in place into w.
// Forward elimination coefficients depend only on n, but recomputing them
// keeps this allocation-free for the caller and still O(n).
template <class Scalar, class D>
void solve_neg_laplacian(const Grid<Scalar>& g, const Eigen::MatrixBase<D>& rhs,
                         VectorX<Scalar>& c, VectorX<Scalar>& w) {
  const Eigen::Index n = g.n;
  const Scalar inv_h2 = Scalar(1) / (g.h * g.h);
  const Scalar a = Scalar(2) * inv_h2;   // diagonal
  const Scalar b = -inv_h2;              // off-diagonals
  c.resize(n);
  w.resize(n);
  Scalar piv = a;
  c[0] = b / piv;
  w[0] = rhs[0] / piv;
  for (Eigen::Index i = 1; i < n; ++i) {
    piv = a - b * c[i - 1];
    c[i] = b / piv;
    w[i] = (rhs[i] - b * w[i - 1]) / piv;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    w[i] -= c[i] * w[i + 1];
  }
}

}  // namespace detail

/// 3-point stencil (u_{i-1} - 2 u_i + u_{i+1}) / h^2 with zero ghost values.
template <class Scalar>
GridFunction<Scalar> apply_laplacian(const GridFunction<Scalar>& u) {
  const Eigen::Index n = u.grid.n;
  const Scalar inv_h2 = Scalar(1) / (u.grid.h * u.grid.h);
  GridFunction<Scalar> out(u.grid);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar left = i > 0 ? u.values[i - 1] : Scalar(0);
    const Scalar right = i + 1 < n ? u.values[i + 1] : Scalar(0);
    out.values[i] = (left - Scalar(2) * u.values[i] + right) * inv_h2;
  }
  return out;
}

/// Exact inverse of apply_laplacian (tridiagonal solve).
template <class Scalar>
GridFunction<Scalar> apply_inverse_laplacian(const GridFunction<Scalar>& v) {
  VectorX<Scalar> c, w;
  detail::solve_neg_laplacian(v.grid, (-v.values).eval(), c, w);
  return GridFunction<Scalar>(v.grid, std::move(w));
}

template <class Scalar>
Scalar l1_norm(const GridFunction<Scalar>& u) {
  return u.grid.h * u.values.cwiseAbs().sum();
}

template <class Scalar>
Scalar l2_norm(const GridFunction<Scalar>& u) {
  return std::sqrt(u.grid.h * u.values.squaredNorm());
}

template <class Scalar>
Scalar min_value(const GridFunction<Scalar>& u) {
  return u.values.minCoeff();
}

template <class Scalar>
Scalar max_value(const GridFunction<Scalar>& u) {
  return u.values.maxCoeff();
}

/// Discrete H^-1 norm, sqrt(h * u^T (-L_h)^{-1} u); zero iff u == 0.
template <class Scalar>
Scalar h_minus1_norm(const GridFunction<Scalar>& u) {
  VectorX<Scalar> c, w;
  detail::solve_neg_laplacian(u.grid, u.values, c, w);
  const Scalar sq = u.grid.h * u.values.dot(w);
  return sq > Scalar(0) ? std::sqrt(sq) : Scalar(0);
}

/// Continuum embedding constant inf |x|_{L^1} / |x|_{-1} on (0, pi).
/// The infimum is attained by mass concentrating at xi = pi/2, where the
/// Green's function diagonal xi(pi - xi)/pi peaks at pi/4.
template <class Scalar = double>
Scalar gamma_constant() {
  return Scalar(2) / std::sqrt(std::numbers::pi_v<Scalar>);
}

/// Discrete infimum of |x|_{L^1} / |x|_{-1} over single-node impulses.
/// Converges to gamma_constant() from above as n grows.
template <class Scalar = double>
Scalar estimate_gamma(Eigen::Index n) {
  const Grid<Scalar> g = make_grid<Scalar>(n);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  GridFunction<Scalar> impulse(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    impulse.values.setZero();
    impulse.values[i] = Scalar(1);
    const Scalar ratio = l1_norm(impulse) / h_minus1_norm(impulse);
    best = std::min(best, ratio);
  }
  return best;
}

}  // namespace socdiff
