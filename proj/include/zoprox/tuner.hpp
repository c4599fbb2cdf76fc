#pragma once

#include <string>

#include "zoprox/core.hpp"
#include "zoprox/padmm.hpp"
#include "zoprox/pde.hpp"

namespace zoprox {

/// A black-box tuning target: scalar penalty in [sigma_min, sigma_max],
/// scenario draws for training and holdout evaluation, and the sampled
/// objective F(sigma, xi).
struct TuningProblem {
  double sigma_min = 1e-2;
  double sigma_max = 1e2;
  std::string name;
  std::function<Scenario(RngStream&)> sample_training;
  std::function<Scenario(RngStream&)> sample_holdout;
  std::function<double(double, const Scenario&)> evaluate;
};

/// k-step pADMM residual reduction over the sampled PDE family.  The scenario
/// payload is the assembled instance, so the two evaluations of one tuner
/// iteration share it.
TuningProblem make_pde_tuning_problem(const InstanceSampler& sampler, std::int64_t k,
                                      const PadmmConfig& base,
                                      double sigma_min = 1e-2, double sigma_max = 1e2);

/// (sigma - center)^2 plus additive scenario noise; the validation target with
/// a known minimizer.
TuningProblem make_synthetic_tuning_problem(double center = 2.0, double noise = 0.01,
                                            double sigma_min = 1e-2,
                                            double sigma_max = 1e2);

struct TunerConfig {
  double sigma_min = 1e-2;
  double sigma_max = 1e2;
  std::int64_t k = 15;       // recorded in the manifest; the problem binds it
  std::int64_t T = 16000;
  double mu = 5e-10;
  double alpha = 0.0;        // 0 -> 1/(2 sqrt(T))
  double sigma_start = 0.0;  // 0 -> sqrt(sigma_min * sigma_max)
  std::uint64_t seed = 1;
  std::int64_t log_points = 100;
};

double tuning_objective_sample(const TuningProblem& problem, double sigma,
                               RngStream& stream);

struct TuneResult {
  double sigma_star = 0.0;
  RunTrace trace;
};

/// Z-ProxSG in the 1-D penalty space with the interval clamp as prox; the
/// reported sigma_star is the last iterate.
TuneResult tune(const TuningProblem& problem, const TunerConfig& cfg);

struct GridRow {
  double sigma = 0.0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int count = 0;
};

/// Mean k-step reduction with 95% normal CI per grid value over a common set
/// of holdout draws; rows evaluate in parallel.
std::vector<GridRow> grid_oracle(const TuningProblem& problem, const std::vector<double>& grid,
                                 int holdout_draws, std::uint64_t seed, int workers = 0);

/// Mean residual trajectory (iteration, primal, dual, scaled) per grid value
/// over a shared holdout sample: the data behind the convergence-profile
/// plots.  Entries are averaged pointwise over the draws.
std::vector<std::vector<ResidualRecord>> holdout_residual_histories(
    const InstanceSampler& sampler, const PadmmConfig& base, const std::vector<double>& grid,
    int holdout_draws, std::int64_t iters, std::uint64_t seed);

std::vector<double> default_sigma_grid(double sigma_min, double sigma_max, int count = 6);

void write_tune_trace_csv(const RunTrace& trace, const std::string& path);
void write_grid_csv(const std::vector<GridRow>& rows, const std::string& path);
void write_tune_manifest(const std::string& path, const TunerConfig& cfg,
                         const std::string& problem_name, double sigma_star,
                         std::uint64_t config_hash);

}  // namespace zoprox
