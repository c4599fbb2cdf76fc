#include "zoprox/tuner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <memory>
#include <thread>

#include "zoprox/solvers.hpp"

namespace zoprox {

TuningProblem make_pde_tuning_problem(const InstanceSampler& sampler, std::int64_t k,
                                      const PadmmConfig& base, double sigma_min,
                                      double sigma_max) {
  if (k < 1) throw std::invalid_argument("tuning problem: k >= 1 required");
  TuningProblem prob;
  prob.sigma_min = sigma_min;
  prob.sigma_max = sigma_max;
  prob.name = sampler.equation == PdeEquation::Poisson ? "poisson" : "convdiff";
  prob.sample_training = [sampler](RngStream& stream) -> Scenario {
    auto drawn = sample_training_instance(sampler, stream);
    return std::make_shared<const QpInstance>(std::move(drawn.second));
  };
  prob.sample_holdout = [sampler](RngStream& stream) -> Scenario {
    auto drawn = sample_holdout_instance(sampler, stream);
    return std::make_shared<const QpInstance>(std::move(drawn.second));
  };
  prob.evaluate = [k, base](double sigma, const Scenario& sc) {
    const auto inst = std::any_cast<std::shared_ptr<const QpInstance>>(sc);
    return residual_reduction(*inst, sigma, k, base);
  };
  return prob;
}

TuningProblem make_synthetic_tuning_problem(double center, double noise, double sigma_min,
                                            double sigma_max) {
  TuningProblem prob;
  prob.sigma_min = sigma_min;
  prob.sigma_max = sigma_max;
  prob.name = "synthetic";
  prob.sample_training = [](RngStream& stream) -> Scenario { return stream.next_normal(); };
  prob.sample_holdout = [](RngStream& stream) -> Scenario { return stream.next_normal(); };
  prob.evaluate = [center, noise](double sigma, const Scenario& sc) {
    const double d = sigma - center;
    return d * d + noise * std::any_cast<double>(sc);
  };
  return prob;
}

double tuning_objective_sample(const TuningProblem& problem, double sigma,
                               RngStream& stream) {
  Scenario sc = problem.sample_training(stream);
  return problem.evaluate(sigma, sc);
}

namespace {

StochasticCompositeProblem as_composite(const TuningProblem& problem) {
  StochasticCompositeProblem p;
  p.dim = 1;
  const double lo = problem.sigma_min, hi = problem.sigma_max;
  p.sample_scenario = problem.sample_training;
  p.eval_F = [&problem](const Vector& x, const Scenario& sc) {
    return problem.evaluate(x[0], sc);
  };
  p.prox_r = [lo, hi](const Vector& v, double) {
    return Vector{std::min(std::max(v[0], lo), hi)};
  };
  p.eval_r = [](const Vector&) { return 0.0; };
  p.in_domain = [lo, hi](const Vector& v) { return v[0] >= lo && v[0] <= hi; };
  return p;
}

}  // namespace

TuneResult tune(const TuningProblem& problem, const TunerConfig& cfg) {
  if (!(cfg.sigma_min > 0.0 && cfg.sigma_min < cfg.sigma_max))
    throw std::invalid_argument("tune: need 0 < sigma_min < sigma_max");
  if (cfg.T < 1) throw std::invalid_argument("tune: T >= 1 required");
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("tune: mu must be positive");

  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 1.0 / (2.0 * std::sqrt(double(cfg.T)));
  const double start = cfg.sigma_start > 0.0 ? cfg.sigma_start
                                             : std::sqrt(cfg.sigma_min * cfg.sigma_max);

  StochasticCompositeProblem composite = as_composite(problem);
  SolverConfig solver;
  solver.estimator = EstimatorKind::Gaussian;
  solver.schedule = StepSchedule::constant(alpha);
  solver.T = cfg.T;
  solver.smoothing.mu = cfg.mu;
  solver.seed = cfg.seed;
  solver.log_stride = std::max<std::int64_t>(1, cfg.T / std::max<std::int64_t>(1, cfg.log_points));
  solver.objective_batch = 1;  // one pADMM run per logged value is plenty

  RunTrace trace = run_z_proxsg(composite, Vector{start}, solver);
  if (!trace.completed) throw std::runtime_error("tune: solver aborted: " + trace.error);
  TuneResult result;
  result.trace = std::move(trace);
  result.sigma_star = result.trace.final_iterate[0];  // "last iteration" convention
  return result;
}

std::vector<GridRow> grid_oracle(const TuningProblem& problem, const std::vector<double>& grid,
                                 int holdout_draws, std::uint64_t seed, int workers) {
  if (grid.empty()) throw std::invalid_argument("grid_oracle: empty grid");
  if (holdout_draws < 1) throw std::invalid_argument("grid_oracle: holdout_draws >= 1");
  for (double s : grid)
    if (s < problem.sigma_min || s > problem.sigma_max)
      throw std::invalid_argument("grid_oracle: grid value outside the box");

  // One shared set of holdout scenarios, so rows are paired comparisons.
  RngStream master = make_stream(seed, 0x9D2C5680);
  std::vector<Scenario> scenarios(std::size_t(holdout_draws), Scenario{});
  for (int i = 0; i < holdout_draws; ++i) {
    RngStream s = split_stream(master, std::uint64_t(i));
    scenarios[std::size_t(i)] = problem.sample_holdout(s);
  }

  std::vector<GridRow> rows(grid.size());
  auto eval_row = [&](std::size_t r) {
    double sum = 0.0, sum2 = 0.0;
    for (const Scenario& sc : scenarios) {
      const double v = problem.evaluate(grid[r], sc);
      sum += v;
      sum2 += v * v;
    }
    const double n = double(holdout_draws);
    const double mean = sum / n;
    const double var = holdout_draws > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0))
                                         : 0.0;
    const double half = 1.96 * std::sqrt(var / n);
    rows[r] = GridRow{grid[r], mean, mean - half, mean + half, holdout_draws};
  };

  const int hw = workers > 0 ? workers : int(std::thread::hardware_concurrency());
  const int pool = std::max(1, hw);
  for (std::size_t begin = 0; begin < grid.size(); begin += std::size_t(pool)) {
    std::vector<std::future<void>> running;
    const std::size_t end = std::min(grid.size(), begin + std::size_t(pool));
    for (std::size_t r = begin; r < end; ++r)
      running.push_back(std::async(std::launch::async, eval_row, r));
    for (auto& f : running) f.get();
  }
  return rows;
}

std::vector<std::vector<ResidualRecord>> holdout_residual_histories(
    const InstanceSampler& sampler, const PadmmConfig& base, const std::vector<double>& grid,
    int holdout_draws, std::int64_t iters, std::uint64_t seed) {
  if (grid.empty() || holdout_draws < 1 || iters < 1)
    throw std::invalid_argument("holdout_residual_histories: bad arguments");
  RngStream master = make_stream(seed, 0x9D2C5680);
  std::vector<QpInstance> instances;
  instances.reserve(std::size_t(holdout_draws));
  for (int i = 0; i < holdout_draws; ++i) {
    RngStream s = split_stream(master, std::uint64_t(i));
    instances.push_back(sample_holdout_instance(sampler, s).second);
  }
  std::vector<std::vector<ResidualRecord>> out;
  out.reserve(grid.size());
  for (double sigma : grid) {
    std::vector<ResidualRecord> mean(std::size_t(iters) + 1);
    for (std::int64_t t = 0; t <= iters; ++t) mean[std::size_t(t)].iteration = t;
    for (const QpInstance& inst : instances) {
      PadmmConfig cfg = base;
      cfg.sigma = sigma;
      cfg.max_iters = iters;
      cfg.residual_tol = 0.0;
      PadmmRun run = run_padmm(inst, cfg);
      for (std::size_t t = 0; t < mean.size(); ++t) {
        mean[t].primal += run.history[t].primal / holdout_draws;
        mean[t].dual += run.history[t].dual / holdout_draws;
        mean[t].scaled += run.history[t].scaled / holdout_draws;
      }
    }
    out.push_back(std::move(mean));
  }
  return out;
}

std::vector<double> default_sigma_grid(double sigma_min, double sigma_max, int count) {
  if (count < 2) throw std::invalid_argument("default_sigma_grid: count >= 2");
  std::vector<double> grid(std::size_t(count), 0.0);
  const double l0 = std::log10(sigma_min), l1 = std::log10(sigma_max);
  for (int i = 0; i < count; ++i)
    grid[std::size_t(i)] = std::pow(10.0, l0 + (l1 - l0) * double(i) / double(count - 1));
  grid.front() = sigma_min;
  grid.back() = sigma_max;
  return grid;
}

void write_tune_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_tune_trace_csv: cannot open " + path);
  out << "iteration,sigma,objective_sample,alpha\n";
  char buf[160];
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(trace.log_iterations[i]), trace.iterates[i][0],
                  trace.objectives[i], trace.step_sizes[i]);
    out << buf;
  }
}

void write_grid_csv(const std::vector<GridRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
  out << "sigma,mean_reduction,ci_low,ci_high,count\n";
  char buf[200];
  for (const GridRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", r.sigma, r.mean,
                  r.ci_low, r.ci_high, r.count);
    out << buf;
  }
}

void write_tune_manifest(const std::string& path, const TunerConfig& cfg,
                         const std::string& problem_name, double sigma_star,
                         std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_tune_manifest: cannot open " + path);
  char buf[96];
  out << "problem = " << problem_name << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", sigma_star);
  out << "sigma_star = " << buf << "\n";
  out << "k = " << cfg.k << "\n";
  out << "T = " << cfg.T << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", cfg.mu);
  out << "mu = " << buf << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "config_hash = " << config_hash << "\n";
}

}  // namespace zoprox
