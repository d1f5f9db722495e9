// Command-line front end: parses a key=value config, dispatches one of the
// experiment subcommands, and writes CSV artifacts plus a reproducibility
// manifest into the output directory.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "socdiff/config_file.hpp"
#include "socdiff/extinction.hpp"
#include "socdiff/manifest.hpp"
#include "socdiff/noise.hpp"
#include "socdiff/solver.hpp"
#include "socdiff/studies.hpp"
#include "socdiff/version.hpp"

namespace {

using namespace socdiff;

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void run_simulate(const ParsedConfig& pc, const CliOptions& opt,
                  RunManifest& manifest) {
  const PathResult r = simulate_path(pc.sim, pc.exp.simulate_path_index);
  CsvWriter csv("timeseries.csv", manifest);
  csv.comment("subcommand=simulate");
  csv.comment("path_index=" + std::to_string(pc.exp.simulate_path_index));
  csv.comment("extinction_epsilon=" + detail::format_double(r.epsilon_used));
  csv.comment(r.tau ? "tau=" + detail::format_double(*r.tau) : "tau=none");
  csv.header({"t", "h_minus1", "l1", "l2", "min", "max"});
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    csv.row(std::vector<double>{r.times[i], r.h_minus1[i], r.l1[i], r.l2[i],
                                r.min_v[i], r.max_v[i]});
  }
  csv.save(opt.out_dir, manifest);
}

void run_extinction(const ParsedConfig& pc, const CliOptions& opt,
                    RunManifest& manifest) {
  std::optional<double> gamma_override;
  if (pc.exp.extinction_gamma == "discrete") {
    gamma_override = estimate_gamma<double>(pc.sim.grid.n);
  }
  const MCSummary s = mc_extinction(pc.sim, pc.exp.extinction_paths,
                                    pc.exp.extinction_t_grid, opt.threads,
                                    gamma_override);
  CsvWriter csv("extinction.csv", manifest);
  csv.comment("subcommand=extinction");
  csv.comment("n_paths=" + std::to_string(s.n_paths));
  csv.comment("n_failed=" + std::to_string(s.n_failed));
  csv.comment("x_norm=" + detail::format_double(s.x_norm));
  csv.comment("gamma=" + detail::format_double(s.gamma_used));
  csv.comment("c_n=" + detail::format_double(s.c_n));
  csv.comment(std::string("admissible=") + (s.admissible ? "yes" : "no"));
  csv.header({"t", "empirical_cdf", "ci_low", "ci_high", "bound"});
  for (std::size_t i = 0; i < s.t_grid.size(); ++i) {
    csv.row(std::vector<double>{s.t_grid[i], s.empirical_cdf[i], s.ci_low[i],
                                s.ci_high[i], s.bound[i]});
  }
  csv.save(opt.out_dir, manifest);
}

void run_bounds(const ParsedConfig& pc, const CliOptions& opt,
                RunManifest& manifest) {
  Stepper probe(pc.sim);
  const double x_norm = h_minus1_norm(probe.initial_state().z);
  const double rho = pc.sim.nonlinearity.rho;
  const double gamma = gamma_constant<double>();
  const double c_n = c_n_constant(pc.sim.noise);
  const double det = deterministic_bound(x_norm, rho, gamma);

  CsvWriter csv("bounds.csv", manifest);
  csv.comment("subcommand=bounds");
  csv.comment("x_norm=" + detail::format_double(x_norm));
  csv.comment("gamma=" + detail::format_double(gamma));
  csv.comment("c_n=" + detail::format_double(c_n));
  csv.comment(std::string("admissible=") +
              (check_admissible(x_norm, rho, gamma, c_n) ? "yes" : "no"));
  csv.header({"t", "theoretical_bound", "deterministic_bound"});
  for (const double t : pc.exp.bounds_t_grid) {
    csv.row(
        std::vector<double>{t, theoretical_bound(t, x_norm, rho, gamma, c_n), det});
  }
  csv.save(opt.out_dir, manifest);
}

void run_gamma(const ParsedConfig& pc, const CliOptions& opt,
               RunManifest& manifest) {
  CsvWriter csv("gamma.csv", manifest);
  csv.comment("subcommand=gamma");
  csv.comment("continuum=" + detail::format_double(gamma_constant<double>()));
  csv.header({"n", "gamma_estimate"});
  for (const Eigen::Index n : pc.exp.gamma_n_values) {
    csv.row(std::vector<std::string>{
        std::to_string(n), detail::format_double(estimate_gamma<double>(n))});
  }
  csv.save(opt.out_dir, manifest);
}

GridFunction<double> random_nonneg_field(const Grid<double>& g,
                                         std::uint64_t seed,
                                         std::uint64_t which) {
  // smooth nonnegative sample: |sum of a few randomly weighted low modes|
  VectorX<double> v = VectorX<double>::Zero(g.n);
  for (std::uint32_t k = 1; k <= 6; ++k) {
    const double a = rng::standard_normal(seed, which, k, 0) /
                     static_cast<double>(k);
    for (Eigen::Index i = 0; i < g.n; ++i) {
      v[i] += a * std::sin(static_cast<double>(k) * g.nodes[i]);
    }
  }
  return GridFunction<double>(g, v.cwiseAbs().eval());
}

void write_study_csv(const StudyReport& rep, const std::string& filename,
                     const CliOptions& opt, RunManifest& manifest) {
  CsvWriter csv(filename, manifest);
  csv.comment("study=" + rep.name);
  csv.comment(std::string("verdict=") + (rep.pass ? "pass" : "fail"));
  csv.comment("rate=" + detail::format_double(rep.rate));
  csv.comment("thresholds=" + rep.thresholds);
  std::vector<std::string> names;
  std::size_t rows = 0;
  for (const auto& [name, series] : rep.columns) {
    names.push_back(name);
    rows = std::max(rows, series.size());
  }
  csv.header(names);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<std::string> cells;
    for (const auto& [name, series] : rep.columns) {
      cells.push_back(i < series.size() ? detail::format_double(series[i])
                                        : std::string());
    }
    csv.row(cells);
  }
  csv.save(opt.out_dir, manifest);
}

void run_study(const ParsedConfig& pc, const CliOptions& opt,
               RunManifest& manifest) {
  const std::string& kind = pc.exp.study_kind;
  if (kind == "lambda") {
    const StudyReport rep = lambda_refinement(pc.sim, pc.exp.study_lambda_ladder,
                                              0, opt.threads);
    write_study_csv(rep, "study_lambda.csv", opt, manifest);
  } else if (kind == "mesh") {
    const StudyReport rep =
        mesh_refinement(pc.sim, pc.exp.study_n_ladder, 0, opt.threads);
    write_study_csv(rep, "study_mesh.csv", opt, manifest);
  } else if (kind == "contraction") {
    const GridFunction<double> x =
        random_nonneg_field(pc.sim.grid, pc.exp.study_pair_seed, 0);
    const GridFunction<double> y =
        random_nonneg_field(pc.sim.grid, pc.exp.study_pair_seed, 1);
    const StudyReport rep = contraction_study(pc.sim, x, y);
    write_study_csv(rep, "study_contraction.csv", opt, manifest);
  } else {
    throw config_error("study.kind: subcommand 'study' needs lambda|mesh|contraction");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-D singular-diffusion SPDE simulator and extinction harness"};
  app.set_version_flag("--version", std::string(socdiff::kVersion));
  app.fallthrough();
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "key=value configuration file");
  auto* seed_flag =
      app.add_option("--seed", opt.seed, "master seed (overrides config)");
  app.add_option("--out", opt.out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--threads", opt.threads,
                 "worker cap for Monte Carlo paths (0 = hardware)");

  auto* cmd_simulate =
      app.add_subcommand("simulate", "one path, time-series CSV");
  auto* cmd_extinction =
      app.add_subcommand("extinction", "Monte Carlo extinction-time CDF");
  auto* cmd_bounds =
      app.add_subcommand("bounds", "tabulated extinction bounds");
  auto* cmd_gamma =
      app.add_subcommand("gamma", "embedding-constant estimate sweep");
  auto* cmd_study =
      app.add_subcommand("study", "lambda/mesh/contraction verification study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    std::cerr << "error: config: " << e.what() << '\n';
    return 1;
  }
  opt.seed_given = seed_flag->count() > 0;

  try {
    if (opt.config_path.empty()) {
      throw socdiff::config_error("--config is required");
    }
    socdiff::ParsedConfig pc = socdiff::parse_config(opt.config_path);
    if (opt.seed_given) socdiff::override_seed(pc, opt.seed);

    std::filesystem::create_directories(opt.out_dir);
    socdiff::RunManifest manifest = socdiff::make_manifest(pc);

    if (cmd_simulate->parsed()) run_simulate(pc, opt, manifest);
    if (cmd_extinction->parsed()) run_extinction(pc, opt, manifest);
    if (cmd_bounds->parsed()) run_bounds(pc, opt, manifest);
    if (cmd_gamma->parsed()) run_gamma(pc, opt, manifest);
    if (cmd_study->parsed()) run_study(pc, opt, manifest);

    socdiff::write_manifest(manifest, opt.out_dir);
  } catch (const socdiff::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: numerical: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
