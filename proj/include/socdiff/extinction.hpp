#pragma once

// Monte Carlo estimation of the extinction-time law and the closed-form
// bounds it is checked against:
//
//   P(tau_c <= t) >= 1 - |x - x_c|_{-1} * C_N / (rho * gamma * (1 - e^{-C_N t}))
//
// with the C_N -> 0 limit 1 - |x - x_c|_{-1} / (rho * gamma * t), and the
// noiseless bound tau_c <= |x - x_c|_{-1} / (rho * gamma).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "socdiff/grid.hpp"
#include "socdiff/solver.hpp"

namespace socdiff {

/// Lower bound on P(tau_c <= t). May be negative (vacuous); returned as-is.
inline double theoretical_bound(double t, double x_norm, double rho,
                                double gamma, double c_n) {
  if (!(t > 0)) throw std::invalid_argument("theoretical_bound: t must be > 0");
  if (!(rho > 0) || !(gamma > 0) || c_n < 0) {
    throw std::invalid_argument("theoretical_bound: need rho, gamma > 0, c_n >= 0");
  }
  // integral of e^{-C_N s} over (0, t); -expm1 handles the small-C_N regime
  const double integral = c_n == 0 ? t : -std::expm1(-c_n * t) / c_n;
  return 1.0 - x_norm / (rho * gamma * integral);
}

/// Noiseless extinction-time bound |x - x_c|_{-1} / (rho * gamma).
inline double deterministic_bound(double x_norm, double rho, double gamma) {
  if (!(rho > 0) || !(gamma > 0)) {
    throw std::invalid_argument("deterministic_bound: need rho, gamma > 0");
  }
  return x_norm / (rho * gamma);
}

/// Smallness condition |x - x_c|_{-1} < rho * gamma / C_N under which the
/// stochastic bound is non-vacuous for large t. Always true for C_N = 0.
inline bool check_admissible(double x_norm, double rho, double gamma,
                             double c_n) {
  return x_norm * c_n < rho * gamma;
}

struct WilsonInterval {
  double low = 0;
  double high = 1;
};

/// 95% Wilson score interval for a binomial proportion; valid near 0 and 1
/// where extinction experiments operate.
inline WilsonInterval wilson_interval(std::int64_t successes,
                                      std::int64_t trials,
                                      double z = 1.959963984540054) {
  if (trials < 1) throw std::invalid_argument("wilson_interval: trials >= 1");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct MCSummary {
  std::vector<double> t_grid;
  std::vector<double> empirical_cdf;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> bound;
  int n_paths = 0;
  int n_failed = 0;
  bool admissible = false;
  double x_norm = 0;      // measured |x - x_c|_{-1} of the initial state
  double gamma_used = 0;
  double c_n = 0;
};

namespace detail {

/// Runs fn(path_index) for path_index in [0, n); workers claim indices
/// through an atomic counter, so results are written into per-index slots
/// and the outcome is independent of scheduling.
template <class Fn>
void parallel_for_paths(int n, int threads, Fn&& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  int workers = threads > 0 ? threads : (hw > 0 ? static_cast<int>(hw) : 1);
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Runs n_paths independent paths and tabulates the empirical CDF of the
/// extinction time against theoretical_bound on the probe grid. Paths that
/// fail numerically are excluded from the CDF but counted; more than 1%
/// failures aborts the experiment, since silently dropping them would bias
/// the estimate.
inline MCSummary mc_extinction(const SimulationConfig& cfg, int n_paths,
                               std::vector<double> t_grid, int threads = 0,
                               std::optional<double> gamma_override = {}) {
  if (n_paths < 1) {
    throw std::invalid_argument("mc_extinction: n_paths must be >= 1");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("mc_extinction: empty probe grid");
  }
  for (double t : t_grid) {
    if (!(t > 0) || t > cfg.t_max + 1e-12) {
      throw std::invalid_argument(
          "mc_extinction: probe times must lie in (0, t_max]");
    }
  }
  std::sort(t_grid.begin(), t_grid.end());

  MCSummary out;
  out.t_grid = t_grid;
  out.n_paths = n_paths;
  out.c_n = c_n_constant(cfg.noise);
  out.gamma_used = gamma_override.value_or(gamma_constant<double>());

  {
    Stepper probe(cfg);
    out.x_norm = h_minus1_norm(probe.initial_state().z);
  }
  out.admissible =
      check_admissible(out.x_norm, cfg.nonlinearity.rho, out.gamma_used, out.c_n);

  // slot value: tau, +inf for no extinction, NaN for a failed path
  std::vector<double> taus(static_cast<std::size_t>(n_paths));
  detail::parallel_for_paths(n_paths, threads, [&](int i) {
    try {
      const PathResult r =
          simulate_path(cfg, static_cast<std::uint64_t>(i));
      taus[static_cast<std::size_t>(i)] =
          r.tau ? *r.tau : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      taus[static_cast<std::size_t>(i)] =
          std::numeric_limits<double>::quiet_NaN();
    }
  });

  std::int64_t failed = 0;
  for (double tau : taus) {
    if (std::isnan(tau)) ++failed;
  }
  out.n_failed = static_cast<int>(failed);
  if (100 * failed > n_paths) {
    std::ostringstream os;
    os << "mc_extinction: " << failed << " of " << n_paths
       << " paths failed (> 1%)";
    throw std::runtime_error(os.str());
  }
  const std::int64_t valid = n_paths - failed;

  for (double t : out.t_grid) {
    std::int64_t hits = 0;
    for (double tau : taus) {
      if (!std::isnan(tau) && tau <= t) ++hits;
    }
    const double cdf = static_cast<double>(hits) / static_cast<double>(valid);
    const WilsonInterval ci = wilson_interval(hits, valid);
    out.empirical_cdf.push_back(cdf);
    out.ci_low.push_back(ci.low);
    out.ci_high.push_back(ci.high);
    out.bound.push_back(theoretical_bound(t, out.x_norm, cfg.nonlinearity.rho,
                                          out.gamma_used, out.c_n));
  }
  return out;
}

}  // namespace socdiff
