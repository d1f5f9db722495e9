#pragma once

// The maximal monotone graph rho * sign(r) + psi_tilde(r) and its
// piecewise-linear regularization with transition width lambda.

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "socdiff/grid.hpp"

namespace socdiff {

// Two built-in families for the Lipschitz part psi_tilde:
//   Linear:          psi_tilde(r) = slope * r
//   PiecewiseLinear: psi_tilde(r) = alpha1 * r (r > 0), alpha2 * r (r < 0),
//                    plus the constant offset c; the kink slope at 0 is
//                    taken as min(alpha1, alpha2).
template <class Scalar = double>
struct NonlinearitySpec {
  enum class Kind { Linear, PiecewiseLinear };

  Kind kind = Kind::Linear;
  Scalar rho = 1;                       // jump height of the sign graph
  Scalar slope = 1;                     // Linear
  Scalar alpha1 = 1, alpha2 = 1, c = 0; // PiecewiseLinear

  static NonlinearitySpec linear(Scalar rho, Scalar slope) {
    NonlinearitySpec s;
    s.kind = Kind::Linear;
    s.rho = rho;
    s.slope = slope;
    return s;
  }

  static NonlinearitySpec piecewise_linear(Scalar rho, Scalar alpha1,
                                           Scalar alpha2, Scalar c) {
    NonlinearitySpec s;
    s.kind = Kind::PiecewiseLinear;
    s.rho = rho;
    s.alpha1 = alpha1;
    s.alpha2 = alpha2;
    s.c = c;
    return s;
  }

  Scalar psi_tilde(Scalar r) const {
    if (kind == Kind::Linear) return slope * r;
    return (r > Scalar(0) ? alpha1 * r : alpha2 * r) + c;
  }

  Scalar psi_tilde_prime(Scalar r) const {
    if (kind == Kind::Linear) return slope;
    if (r > Scalar(0)) return alpha1;
    if (r < Scalar(0)) return alpha2;
    return std::min(alpha1, alpha2);
  }

  /// inf psi_tilde' over the real line.
  Scalar delta_min() const {
    return kind == Kind::Linear ? slope : std::min(alpha1, alpha2);
  }

  /// Lipschitz constant of psi_tilde.
  Scalar lip() const {
    return kind == Kind::Linear ? slope : std::max(alpha1, alpha2);
  }
};

/// Piecewise-linear regularized sign: 1 for r > lambda, r/lambda on
/// [-lambda, lambda], -1 for r < -lambda. Odd, nondecreasing,
/// 1/lambda-Lipschitz.
template <class Scalar>
Scalar sign_lambda(Scalar r, Scalar lambda) {
  if (!(lambda > Scalar(0))) {
    throw std::invalid_argument("sign_lambda: lambda must be > 0");
  }
  if (r > lambda) return Scalar(1);
  if (r < -lambda) return Scalar(-1);
  return r / lambda;
}

/// rho * sign_lambda(r) + psi_tilde(r).
template <class Scalar>
Scalar psi_lambda(Scalar r, const NonlinearitySpec<Scalar>& spec, Scalar lambda) {
  return spec.rho * sign_lambda(r, lambda) + spec.psi_tilde(r);
}

/// Entrywise slope of psi_lambda; bounded below by delta_min and above by
/// rho/lambda + lip.
template <class Scalar>
Scalar psi_lambda_prime(Scalar r, const NonlinearitySpec<Scalar>& spec,
                        Scalar lambda) {
  if (!(lambda > Scalar(0))) {
    throw std::invalid_argument("psi_lambda_prime: lambda must be > 0");
  }
  const Scalar jump = std::abs(r) <= lambda ? spec.rho / lambda : Scalar(0);
  return jump + spec.psi_tilde_prime(r);
}

template <class Scalar>
VectorX<Scalar> psi_lambda(const VectorX<Scalar>& r,
                           const NonlinearitySpec<Scalar>& spec, Scalar lambda) {
  VectorX<Scalar> out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    out[i] = psi_lambda(r[i], spec, lambda);
  }
  return out;
}

/// Lipschitz constant of psi_lambda: rho/lambda + lip. Drives time-step
/// safety checks and Newton convergence expectations.
template <class Scalar>
Scalar lipschitz_constant(const NonlinearitySpec<Scalar>& spec, Scalar lambda) {
  if (!(lambda > Scalar(0))) {
    throw std::invalid_argument("lipschitz_constant: lambda must be > 0");
  }
  return spec.rho / lambda + spec.lip();
}

template <class Scalar = double>
struct HypothesisReport {
  bool valid = true;
  std::vector<std::string> violations;
  Scalar rho = 0;
  Scalar delta_min = 0;
  Scalar lip = 0;
  Scalar psi_tilde_at_zero = 0;

  std::string summary() const {
    std::ostringstream os;
    if (valid) {
      os << "valid: rho=" << rho << " delta=" << delta_min << " lip=" << lip;
    } else {
      os << "invalid:";
      for (const auto& v : violations) os << " [" << v << "]";
    }
    return os.str();
  }
};

/// Checks rho > 0, delta_min > 0, finite Lipschitz constant, and
/// 0 in Psi(0), i.e. |psi_tilde(0)| <= rho.
template <class Scalar>
HypothesisReport<Scalar> validate_hypothesis(const NonlinearitySpec<Scalar>& spec) {
  HypothesisReport<Scalar> rep;
  rep.rho = spec.rho;
  rep.delta_min = spec.delta_min();
  rep.lip = spec.lip();
  rep.psi_tilde_at_zero = spec.psi_tilde(Scalar(0));

  auto fail = [&rep](const std::string& msg) {
    rep.valid = false;
    rep.violations.push_back(msg);
  };

  if (!(spec.rho > Scalar(0))) {
    fail("rho must be > 0, got " + std::to_string(static_cast<double>(spec.rho)));
  }
  if (!(rep.delta_min > Scalar(0))) {
    fail("inf psi_tilde' must be > 0, got " +
         std::to_string(static_cast<double>(rep.delta_min)));
  }
  if (!std::isfinite(static_cast<double>(rep.lip))) {
    fail("psi_tilde must be Lipschitz");
  }
  if (std::abs(rep.psi_tilde_at_zero) > spec.rho) {
    fail("0 not in Psi(0): |psi_tilde(0)| = " +
         std::to_string(static_cast<double>(std::abs(rep.psi_tilde_at_zero))) +
         " exceeds rho = " + std::to_string(static_cast<double>(spec.rho)));
  }
  return rep;
}

}  // namespace socdiff
