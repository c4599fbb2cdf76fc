#include "zoprox/solvers.hpp"

#include <chrono>
#include <cmath>

namespace zoprox {

double rate_optimal_step(int n, double rho, double Delta, double L, std::int64_t T) {
  if (n < 1 || !(rho > 0.0) || !(Delta > 0.0) || !(L > 0.0) || T < 0)
    throw std::invalid_argument("rate_optimal_step: all arguments must be positive");
  const double dim_term = double(n) * double(n) + 2.0 * double(n);
  const double root = std::sqrt(Delta / (dim_term * rho * L * L * double(T + 1)));
  return 0.5 * std::min(1.0 / rho, root);
}

double StepSchedule::alpha(std::int64_t t) const {
  switch (kind) {
    case Kind::Constant:
    case Kind::RateOptimal:
      return value;
    case Kind::Custom:
      if (t < 0 || std::size_t(t) >= custom.size())
        throw std::out_of_range("StepSchedule: iteration outside custom list");
      return custom[std::size_t(t)];
  }
  return value;
}

StepSchedule StepSchedule::constant(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("StepSchedule: step must be positive");
  StepSchedule s;
  s.kind = Kind::Constant;
  s.value = a;
  return s;
}

StepSchedule StepSchedule::rate_optimal(int n, double rho, double Delta, double L,
                                     std::int64_t T) {
  StepSchedule s;
  s.kind = Kind::RateOptimal;
  s.value = rate_optimal_step(n, rho, Delta, L, T);
  return s;
}

StepSchedule StepSchedule::custom_list(std::vector<double> alphas) {
  if (alphas.empty()) throw std::invalid_argument("StepSchedule: empty custom list");
  for (double a : alphas)
    if (!(a > 0.0)) throw std::invalid_argument("StepSchedule: steps must be positive");
  StepSchedule s;
  s.kind = Kind::Custom;
  s.custom = std::move(alphas);
  return s;
}

std::int64_t draw_t_star(const std::vector<double>& alphas, RngStream& stream) {
  if (alphas.empty()) throw std::invalid_argument("draw_t_star: empty weights");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0)) throw std::invalid_argument("draw_t_star: weights must be positive");
    total += a;
  }
  const double u = stream.next_uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
    acc += alphas[i];
    if (u < acc) return std::int64_t(i);
  }
  return std::int64_t(alphas.size()) - 1;
}

namespace {

// Stream labels carved out of the solver seed.  Label 0 carries the primary
// perturbation direction for every estimator (DSZ's inner U_2 included), so
// runs with a shared seed see common random directions across algorithms.
constexpr std::uint64_t kLabelDirection = 0;
constexpr std::uint64_t kLabelScenario = 1;
constexpr std::uint64_t kLabelTStar = 2;
constexpr std::uint64_t kLabelLogging = 3;
constexpr std::uint64_t kLabelOuterDirection = 4;

double logged_objective(const StochasticCompositeProblem& problem, const Vector& x,
                        RngStream& stream, int batch, RunTrace& trace) {
  double s = 0.0;
  for (int b = 0; b < batch; ++b) {
    Scenario xi = problem.sample_scenario(stream);
    s += problem.eval_F(x, xi);
    ++trace.logging_evals;
  }
  s /= double(batch);
  if (problem.eval_r) s += problem.eval_r(x);
  return s;
}

template <typename StepFn>
RunTrace run_loop(const StochasticCompositeProblem& problem, const Vector& x0,
                  const SolverConfig& config, bool weighted_output_rule, StepFn&& step) {
  if (config.T < 1) throw std::invalid_argument("solver: T >= 1 required");
  if (int(x0.size()) != problem.dim) throw std::invalid_argument("solver: x0 dimension mismatch");
  if (!problem.eval_F || !problem.sample_scenario || !problem.prox_r)
    throw std::invalid_argument("solver: incomplete problem bundle");
  if (problem.in_domain && !problem.in_domain(x0))
    throw std::invalid_argument("solver: x0 outside dom(r)");

  const auto t0 = std::chrono::steady_clock::now();
  RngStream master = make_stream(config.seed);
  RngStream tstar_stream = split_stream(master, kLabelTStar);
  RngStream log_stream = split_stream(master, kLabelLogging);

  std::vector<double> alphas(std::size_t(config.T) + 1);
  for (std::int64_t t = 0; t <= config.T; ++t) alphas[std::size_t(t)] = config.schedule.alpha(t);

  const bool weighted = weighted_output_rule || config.weighted_return;
  const std::int64_t t_star = weighted ? draw_t_star(alphas, tstar_stream) : config.T;

  RunTrace trace;
  trace.stride = config.log_stride > 0 ? config.log_stride
                                       : std::max<std::int64_t>(1, config.T / 500);
  trace.t_star = t_star;

  Vector x = x0;
  for (std::int64_t t = 0; t <= config.T; ++t) {
    if (t % trace.stride == 0)
      record_step(trace, x,
                  logged_objective(problem, x, log_stream, config.objective_batch, trace),
                  alphas[std::size_t(t)]);
    if (weighted && t == t_star) trace.returned_iterate = x;

    const double alpha = alphas[std::size_t(t)];
    GradientEstimate g = step(x, alpha);
    trace.oracle_evals += g.function_evals;

    Vector moved = x;
    axpy(-alpha, g.direction, moved);
    x = problem.prox_r(moved, alpha);

    if (!all_finite(x)) {
      trace.final_iterate = x;
      trace.error = "non-finite iterate at t=" + std::to_string(t);
      return trace;
    }
    if (nrm_inf(x) > config.divergence_guard) {
      trace.final_iterate = x;
      trace.error = "divergence guard tripped at t=" + std::to_string(t);
      return trace;
    }
    if (problem.in_domain && !problem.in_domain(x))
      throw std::logic_error("solver: post-prox iterate escaped dom(r)");
  }

  trace.final_iterate = x;
  if (!weighted) trace.returned_iterate = x;
  trace.completed = true;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

}  // namespace

RunTrace run_z_proxsg(const StochasticCompositeProblem& problem, const Vector& x0,
                      const SolverConfig& config) {
  if (!(config.smoothing.mu > 0.0))
    throw std::invalid_argument("run_z_proxsg: smoothing.mu must be positive");
  RngStream master = make_stream(config.seed);
  RngStream u_stream = split_stream(master, kLabelDirection);
  RngStream xi_stream = split_stream(master, kLabelScenario);
  return run_loop(problem, x0, config, /*weighted_output_rule=*/true,
                  [&](const Vector& x, double) {
                    return gaussian_estimate(problem, x, config.smoothing.mu, u_stream,
                                             xi_stream);
                  });
}

RunTrace run_dsz_proxsg(const StochasticCompositeProblem& problem, const Vector& x0,
                        const SolverConfig& config) {
  const double mu1 = config.smoothing.mu1, mu2 = config.smoothing.mu2;
  if (!(mu2 > 0.0) || !(mu1 >= 2.0 * mu2))
    throw std::invalid_argument("run_dsz_proxsg: need mu1 >= 2*mu2 > 0");
  RngStream master = make_stream(config.seed);
  RngStream u2_stream = split_stream(master, kLabelDirection);
  RngStream u1_stream = split_stream(master, kLabelOuterDirection);
  RngStream xi_stream = split_stream(master, kLabelScenario);
  return run_loop(problem, x0, config, /*weighted_output_rule=*/false,
                  [&](const Vector& x, double) {
                    return double_gaussian_estimate(problem, x, mu1, mu2, u2_stream,
                                                    u1_stream, xi_stream);
                  });
}

RunTrace run_uniz_proxsg(const StochasticCompositeProblem& problem, const Vector& x0,
                         const SolverConfig& config) {
  if (!(config.smoothing.mu > 0.0))
    throw std::invalid_argument("run_uniz_proxsg: smoothing.mu must be positive");
  RngStream master = make_stream(config.seed);
  RngStream u_stream = split_stream(master, kLabelDirection);
  RngStream xi_stream = split_stream(master, kLabelScenario);
  return run_loop(problem, x0, config, /*weighted_output_rule=*/false,
                  [&](const Vector& x, double) {
                    return uniform_estimate(problem, x, config.smoothing.mu, u_stream,
                                            xi_stream, 1, config.uniform_negated_quotient);
                  });
}

RunTrace run_spsa(const StochasticCompositeProblem& problem, const Vector& x0,
                  const SolverConfig& config) {
  if (!(config.smoothing.mu > 0.0))
    throw std::invalid_argument("run_spsa: smoothing.mu must be positive");
  RngStream master = make_stream(config.seed);
  RngStream u_stream = split_stream(master, kLabelDirection);
  RngStream xi_stream = split_stream(master, kLabelScenario);
  return run_loop(problem, x0, config, /*weighted_output_rule=*/false,
                  [&](const Vector& x, double) {
                    return spsa_estimate(problem, x, config.smoothing.mu, u_stream,
                                         xi_stream);
                  });
}

RunTrace run_prox_ssg(const StochasticCompositeProblem& problem, const Vector& x0,
                      const SolverConfig& config) {
  if (!problem.subgrad_F)
    throw std::invalid_argument("run_prox_ssg: problem has no subgradient oracle");
  RngStream master = make_stream(config.seed);
  RngStream xi_stream = split_stream(master, kLabelScenario);
  return run_loop(problem, x0, config, /*weighted_output_rule=*/false,
                  [&](const Vector& x, double alpha) {
                    Scenario xi = problem.sample_scenario(xi_stream);
                    GradientEstimate est;
                    est.direction = problem.subgrad_F(x, xi, alpha);
                    est.function_evals = 1;
                    est.estimator = EstimatorKind::Subgradient;
                    return est;
                  });
}

RunTrace run_solver(const StochasticCompositeProblem& problem, const Vector& x0,
                    const SolverConfig& config) {
  switch (config.estimator) {
    case EstimatorKind::Gaussian: return run_z_proxsg(problem, x0, config);
    case EstimatorKind::DoubleGaussian: return run_dsz_proxsg(problem, x0, config);
    case EstimatorKind::Uniform: return run_uniz_proxsg(problem, x0, config);
    case EstimatorKind::Spsa: return run_spsa(problem, x0, config);
    case EstimatorKind::Subgradient: return run_prox_ssg(problem, x0, config);
  }
  throw std::invalid_argument("run_solver: unknown estimator");
}

}  // namespace zoprox
