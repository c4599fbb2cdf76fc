// Command-line front end: experiment configuration, multi-seed replication,
// and CSV / plot-data emission.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "zoprox/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_file;
  std::string out = "out";
  std::uint64_t seed = 1;
  int replicates = 15;
  std::string sizes;
  std::string solvers;
  int workers = 0;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "config file with key = value lines");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--replicates", flags.replicates, "independent replicate runs");
  cmd->add_option("--sizes", flags.sizes, "comma list of dxm pairs, e.g. 10x30,20x45");
  cmd->add_option("--solvers", flags.solvers, "comma list from: z-proxsg,dsz-proxsg,uniz-proxsg,spsa,prox-ssg");
  cmd->add_option("--workers", flags.workers, "bounded worker pool size (0 = hardware)");
  cmd->add_flag("--svg", flags.svg, "also emit SVG line charts");
}

zoprox::ExperimentConfig build_config(const CommonFlags& flags, const CLI::App* cmd) {
  zoprox::ExperimentConfig cfg;
  if (!flags.config_file.empty()) cfg = zoprox::parse_config_file(flags.config_file);
  if (cmd->count("--out") || flags.config_file.empty()) cfg.output_dir = flags.out;
  if (cmd->count("--seed")) cfg.seed = flags.seed;
  if (cmd->count("--replicates")) cfg.replicates = flags.replicates;
  if (cmd->count("--workers")) cfg.workers = flags.workers;
  if (cmd->count("--svg")) cfg.emit_svg = flags.svg;
  if (cmd->count("--sizes")) {
    cfg.sizes.clear();
    std::stringstream ss(flags.sizes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto x = item.find('x');
      if (x == std::string::npos) throw std::invalid_argument("bad --sizes entry: " + item);
      cfg.sizes.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
    }
  }
  if (cmd->count("--solvers")) {
    cfg.solvers.clear();
    std::stringstream ss(flags.solvers);
    std::string item;
    while (std::getline(ss, item, ',')) {
      zoprox::parse_solver_name(item);  // validate early
      cfg.solvers.push_back(item);
    }
  }
  return cfg;
}

int report(const zoprox::ExperimentResult& result) {
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const std::string& f : result.files) std::cout << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zoprox: zeroth-order nonsmooth stochastic optimization toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* phase = app.add_subcommand("phase-retrieval", "benchmark the five solvers");
  add_common(phase, flags);
  std::int64_t T_override = 0;
  double mu = 5e-10, mu1 = 5e-7, mu2 = 5e-10;
  phase->add_option("--T", T_override, "iterations (0 = 2000*m)");
  phase->add_option("--mu", mu, "smoothing parameter");
  phase->add_option("--mu1", mu1, "double-smoothing outer parameter");
  phase->add_option("--mu2", mu2, "double-smoothing inner parameter");

  auto* sweep = app.add_subcommand("smoothing-sweep", "Z vs DSZ over (mu1, mu2) pairs");
  add_common(sweep, flags);
  sweep->add_option("--T", T_override, "iterations (0 = 2000*m)");

  auto* tune = app.add_subcommand("tune", "meta-tune the pADMM penalty");
  add_common(tune, flags);
  std::string family = "poisson";
  std::int64_t tuner_T = 0, k = 15;
  int max_grid = 0, holdout_draws = 40;
  tune->add_option("--family", family, "poisson or convdiff");
  tune->add_option("--tuner-T", tuner_T, "tuner iterations (0 = 200*pool)");
  tune->add_option("--k", k, "pADMM iterations per sample");
  tune->add_option("--max-grid", max_grid, "cap interior grid size (0 = full family)");
  tune->add_option("--holdout-draws", holdout_draws, "holdout sample count for grid-eval");
  tune->add_option("--mu", mu, "smoothing parameter");

  auto* grid_cmd = app.add_subcommand("grid-eval", "holdout grid table without tuning");
  add_common(grid_cmd, flags);
  std::string grid_values;
  std::int64_t history_iters = 0;
  grid_cmd->add_option("--family", family, "poisson or convdiff");
  grid_cmd->add_option("--k", k, "pADMM iterations per sample");
  grid_cmd->add_option("--grid", grid_values, "comma list of sigma values");
  grid_cmd->add_option("--max-grid", max_grid, "cap interior grid size");
  grid_cmd->add_option("--holdout-draws", holdout_draws, "holdout sample count");
  grid_cmd->add_option("--history-iters", history_iters,
                       "also emit mean residual trajectories over this many pADMM iterations");

  auto* moreau = app.add_subcommand("moreau-check", "Moreau-envelope diagnostic battery");
  add_common(moreau, flags);

  auto* selftest = app.add_subcommand("selftest", "small deterministic batch for replay checks");
  add_common(selftest, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (phase->parsed() || sweep->parsed()) {
      const CLI::App* cmd = phase->parsed() ? phase : sweep;
      zoprox::ExperimentConfig cfg = build_config(flags, cmd);
      cfg.experiment = phase->parsed() ? zoprox::ExperimentKind::PhaseRetrieval
                                       : zoprox::ExperimentKind::SmoothingSweep;
      if (cmd->count("--T")) cfg.T_override = T_override;
      if (cmd->count("--mu")) cfg.mu = mu;
      if (phase->parsed()) {
        if (phase->count("--mu1")) cfg.mu1 = mu1;
        if (phase->count("--mu2")) cfg.mu2 = mu2;
      }
      return report(zoprox::run_experiment(cfg));
    }
    if (tune->parsed()) {
      zoprox::ExperimentConfig cfg = build_config(flags, tune);
      cfg.experiment = family == "convdiff" ? zoprox::ExperimentKind::TuneConvDiff
                                            : zoprox::ExperimentKind::TunePoisson;
      if (family != "poisson" && family != "convdiff")
        throw std::invalid_argument("unknown family: " + family);
      if (tune->count("--tuner-T")) cfg.tuner_T = tuner_T;
      if (tune->count("--k")) cfg.k = k;
      if (tune->count("--max-grid")) cfg.max_grid = max_grid;
      if (tune->count("--holdout-draws")) cfg.holdout_draws = holdout_draws;
      if (tune->count("--mu")) cfg.mu = mu;
      return report(zoprox::run_experiment(cfg));
    }
    if (grid_cmd->parsed()) {
      zoprox::ExperimentConfig cfg = build_config(flags, grid_cmd);
      zoprox::InstanceSampler sampler;
      sampler.equation = family == "convdiff" ? zoprox::PdeEquation::ConvectionDiffusion
                                              : zoprox::PdeEquation::Poisson;
      if (family != "poisson" && family != "convdiff")
        throw std::invalid_argument("unknown family: " + family);
      if (grid_cmd->count("--max-grid")) sampler.cap_grid(max_grid);
      zoprox::PadmmConfig base;
      zoprox::TuningProblem problem = zoprox::make_pde_tuning_problem(sampler, k, base);
      std::vector<double> grid;
      if (grid_values.empty()) {
        grid = zoprox::default_sigma_grid(problem.sigma_min, problem.sigma_max, 6);
      } else {
        std::stringstream ss(grid_values);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
      }
      auto rows = zoprox::grid_oracle(problem, grid, holdout_draws, cfg.seed + 1, cfg.workers);
      const std::string dir = (std::filesystem::path(cfg.output_dir) / ("grid_" + family)).string();
      zoprox::ensure_directory(dir);
      const std::string file = (std::filesystem::path(dir) / "grid_eval.csv").string();
      zoprox::write_grid_csv(rows, file);
      std::cout << file << "\n";
      if (history_iters > 0) {
        auto histories = zoprox::holdout_residual_histories(sampler, base, grid, holdout_draws,
                                                            history_iters, cfg.seed + 1);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          char name[64];
          std::snprintf(name, sizeof name, "history_%02zu.csv", i);
          const std::string hfile = (std::filesystem::path(dir) / name).string();
          zoprox::write_residual_csv(histories[i], hfile);
          std::cout << hfile << "\n";
        }
      }
      return 0;
    }
    if (moreau->parsed()) {
      zoprox::ExperimentConfig cfg = build_config(flags, moreau);
      cfg.experiment = zoprox::ExperimentKind::MoreauCheck;
      return report(zoprox::run_experiment(cfg));
    }
    if (selftest->parsed()) {
      for (const std::string& f : zoprox::run_selftest(flags.out, flags.seed))
        std::cout << f << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
