#pragma once

#include "zoprox/core.hpp"
#include "zoprox/smoothing.hpp"

namespace zoprox {

/// Step-size rule of the constant-step bound:
///   0.5 * min{ 1/rho, sqrt(Delta / ((n^2+2n) rho L^2 (T+1))) }.
double rate_optimal_step(int n, double rho, double Delta, double L, std::int64_t T);

struct StepSchedule {
  enum class Kind { Constant, RateOptimal, Custom };
  Kind kind = Kind::Constant;
  double value = 0.0;           // constant case (also caches the rate-optimal value)
  std::vector<double> custom;   // custom case, one entry per iteration

  double alpha(std::int64_t t) const;

  static StepSchedule constant(double a);
  static StepSchedule rate_optimal(int n, double rho, double Delta, double L, std::int64_t T);
  static StepSchedule custom_list(std::vector<double> alphas);
};

struct SolverConfig {
  EstimatorKind estimator = EstimatorKind::Gaussian;
  StepSchedule schedule;
  std::int64_t T = 0;                // loop runs t = 0..T inclusive
  SmoothingParams smoothing;
  std::uint64_t seed = 0;
  std::int64_t log_stride = 0;       // 0 -> max(1, T/500)
  int objective_batch = 16;          // scenarios averaged per logged objective
  bool weighted_return = false;      // apply the t* draw to every solver
  bool uniform_negated_quotient = false;   // keep the displayed sign in UniZ's quotient
  double divergence_guard = 1e8;     // abort when ||x||_inf exceeds this
};

/// Index drawn with P(t* = t) = alpha_t / sum(alpha); weights must be positive.
std::int64_t draw_t_star(const std::vector<double>& alphas, RngStream& stream);

RunTrace run_z_proxsg(const StochasticCompositeProblem& problem, const Vector& x0,
                      const SolverConfig& config);
RunTrace run_dsz_proxsg(const StochasticCompositeProblem& problem, const Vector& x0,
                        const SolverConfig& config);
RunTrace run_uniz_proxsg(const StochasticCompositeProblem& problem, const Vector& x0,
                         const SolverConfig& config);
RunTrace run_spsa(const StochasticCompositeProblem& problem, const Vector& x0,
                  const SolverConfig& config);
RunTrace run_prox_ssg(const StochasticCompositeProblem& problem, const Vector& x0,
                      const SolverConfig& config);

/// Dispatch on config.estimator.
RunTrace run_solver(const StochasticCompositeProblem& problem, const Vector& x0,
                    const SolverConfig& config);

}  // namespace zoprox
