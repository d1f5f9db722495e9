#pragma once

// Multiplicative spectral forcing sum_k mu_k * X * dbeta_k * e_k with a
// finite number of modes, plus the noise constant C_N.
//
// Brownian increments come from a stateless counter-based generator
// (Philox4x32-10), so the stream for (master_seed, path_index) is
// bit-identical no matter how many paths run concurrently or in what
// order. A step may be split into `substeps` micro increments; runs that
// share the micro resolution see the same Brownian path even when their
// step sizes differ, which is what the refinement studies rely on.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "socdiff/grid.hpp"
#include "socdiff/sine_basis.hpp"

namespace socdiff {

template <class Scalar = double>
struct NoiseSpec {
  Eigen::Index n_modes = 0;       // N, finite
  VectorX<Scalar> mu;             // mode amplitudes, length N
  std::uint64_t master_seed = 0;
};

/// C_N = (pi/4) * sum_{k=1}^N (1+k)^2 mu_k^2; zero for the noiseless case.
template <class Scalar>
Scalar c_n_constant(const NoiseSpec<Scalar>& spec) {
  Scalar sum = 0;
  for (Eigen::Index k = 1; k <= spec.n_modes; ++k) {
    const Scalar w = static_cast<Scalar>(1 + k);
    sum += w * w * spec.mu[k - 1] * spec.mu[k - 1];
  }
  return std::numbers::pi_v<Scalar> / Scalar(4) * sum;
}

/// sum_k mu_k^2 k^4, the series that must stay finite for infinitely many
/// modes; reported for the record (always finite here since N is finite).
template <class Scalar>
Scalar hypothesis_ii_report(const NoiseSpec<Scalar>& spec) {
  Scalar sum = 0;
  for (Eigen::Index k = 1; k <= spec.n_modes; ++k) {
    const Scalar k2 = static_cast<Scalar>(k) * static_cast<Scalar>(k);
    sum += spec.mu[k - 1] * spec.mu[k - 1] * k2 * k2;
  }
  return sum;
}

namespace rng {

// Philox4x32-10 (Salmon et al., SC'11 constants).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  constexpr std::uint32_t kMultA = 0xD2511F53u;
  constexpr std::uint32_t kMultB = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMultA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMultB) * ctr[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

/// One standard normal, a pure function of (seed, path, mode, counter).
/// Box-Muller on the 128-bit Philox block; the uniforms are offset into
/// the open interval so the log never sees zero.
inline double standard_normal(std::uint64_t seed, std::uint64_t path,
                              std::uint32_t mode, std::uint64_t counter) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter),
      static_cast<std::uint32_t>(counter >> 32),
      static_cast<std::uint32_t>(path),
      static_cast<std::uint32_t>(path >> 32) ^ (mode * 0x9E3779B9u)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const std::array<std::uint32_t, 4> block = philox4x32(ctr, key);
  const std::uint64_t x0 =
      (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  const std::uint64_t x1 =
      (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
  const double u1 = (static_cast<double>(x0 >> 11) + 0.5) * 0x1p-53;
  const double u2 = (static_cast<double>(x1 >> 11) + 0.5) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

/// Brownian increments (dbeta_1, ..., dbeta_N) for one time step.
template <class Scalar = double>
struct BrownianIncrements {
  VectorX<Scalar> d_beta;
};

/// Stateless per-path increment source. step(m) returns the increments of
/// step m (variance dt each), assembled from `substeps` micro normals so
/// that generators at micro resolutions dt and dt/2, 2 substeps vs 1,
/// produce the same Brownian path.
template <class Scalar = double>
class BrownianPathGenerator {
 public:
  BrownianPathGenerator(const NoiseSpec<Scalar>& spec, std::uint64_t path_index,
                        Scalar dt, int substeps = 1)
      : spec_(spec), path_(path_index), dt_(dt), substeps_(substeps) {
    if (substeps < 1) {
      throw std::invalid_argument("BrownianPathGenerator: substeps must be >= 1");
    }
    if (!(dt > Scalar(0))) {
      throw std::invalid_argument("BrownianPathGenerator: dt must be > 0");
    }
  }

  BrownianIncrements<Scalar> step(std::uint64_t step_index) const {
    BrownianIncrements<Scalar> inc;
    inc.d_beta = VectorX<Scalar>::Zero(spec_.n_modes);
    const Scalar micro_sd =
        std::sqrt(dt_ / static_cast<Scalar>(substeps_));
    for (Eigen::Index k = 1; k <= spec_.n_modes; ++k) {
      Scalar sum = 0;
      for (int j = 0; j < substeps_; ++j) {
        const std::uint64_t micro =
            step_index * static_cast<std::uint64_t>(substeps_) +
            static_cast<std::uint64_t>(j);
        sum += static_cast<Scalar>(rng::standard_normal(
            spec_.master_seed, path_, static_cast<std::uint32_t>(k), micro));
      }
      inc.d_beta[k - 1] = micro_sd * sum;
    }
    return inc;
  }

 private:
  NoiseSpec<Scalar> spec_;
  std::uint64_t path_;
  Scalar dt_;
  int substeps_;
};

/// Node samples of the noise modes: column k-1 holds mu_k * e_k.
template <class Scalar>
MatrixX<Scalar> scaled_mode_table(const Grid<Scalar>& g,
                                  const NoiseSpec<Scalar>& spec) {
  MatrixX<Scalar> modes(g.n, spec.n_modes);
  for (Eigen::Index k = 1; k <= spec.n_modes; ++k) {
    modes.col(k - 1) = spec.mu[k - 1] * sine_mode(g, k);
  }
  return modes;
}

/// xi -> sum_k mu_k X(xi) e_k(xi) dbeta_k, with a precomputed mode table.
template <class Scalar>
GridFunction<Scalar> noise_increment(const GridFunction<Scalar>& x,
                                     const BrownianIncrements<Scalar>& inc,
                                     const MatrixX<Scalar>& scaled_modes) {
  GridFunction<Scalar> out(x.grid);
  if (inc.d_beta.size() == 0) return out;
  out.values = x.values.cwiseProduct(scaled_modes * inc.d_beta);
  return out;
}

template <class Scalar>
GridFunction<Scalar> noise_increment(const GridFunction<Scalar>& x,
                                     const BrownianIncrements<Scalar>& inc,
                                     const NoiseSpec<Scalar>& spec) {
  return noise_increment(x, inc, scaled_mode_table(x.grid, spec));
}

}  // namespace socdiff
