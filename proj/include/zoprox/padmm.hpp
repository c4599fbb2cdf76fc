#pragma once

#include <memory>
#include <string>

#include "zoprox/pde.hpp"

namespace zoprox {

/// Backend for the x-update linear system
///   (Diag(Q) + sigma_hat I + sigma A^T A + sigma I) x = rhs,
/// which is what the proximal term R_x = sigma_hat I - Off(Q) leaves behind.
enum class XStepMethod {
  Auto,               // FdPoisson -> FastPoisson, FdConvectionDiffusion -> BandedCholesky,
                      // anything else -> ConjugateGradient
  ConjugateGradient,  // Jacobi-preconditioned CG on the implicit operator
  FastPoisson,        // exact solve via 2-D discrete sine transform
  BandedCholesky      // exact solve via banded Cholesky of the control-eliminated system
};

struct PadmmConfig {
  double sigma = 1.0;
  double gamma = 1.618;        // dual step, must lie in (0, (1+sqrt(5))/2)
  double sigma_hat = 0.0;      // 0 -> Gershgorin default with a positive floor
  std::int64_t max_iters = 5000;
  double linsolve_tol = 1e-10;
  double residual_tol = 1e-6;  // on the scaled combined residual
  XStepMethod x_step = XStepMethod::Auto;
  std::int64_t cg_max_iters = 0;  // 0 -> max(10 n, 2000)
};

struct PadmmState {
  Vector x, w, y1, y2;
  std::int64_t iter = 0;
  double primal_residual = 0.0;  // max of the two scaled primal residuals
  double dual_residual = 0.0;    // scaled x-stationarity residual
  double scaled_residual = 0.0;  // max(primal, dual)
};

struct ResidualRecord {
  std::int64_t iteration = 0;
  double primal = 0.0;
  double dual = 0.0;
  double scaled = 0.0;
};

/// 1.01 x the largest absolute off-diagonal row sum of Q, floored at 1e-6 so
/// R_x stays positive definite when Q is diagonal.
double default_sigma_hat(const QpInstance& inst);

PadmmState make_padmm_state(const QpInstance& inst);  // zero start
void compute_residuals(const QpInstance& inst, PadmmState& state);

/// One sweep of the four updates (w, x, y1, y2).  Convenience form that sets
/// up the x-step solver on every call; run_padmm reuses one across the run.
PadmmState padmm_step(const QpInstance& inst, const PadmmState& state,
                      const PadmmConfig& cfg);

struct PadmmRun {
  PadmmState state;
  std::vector<ResidualRecord> history;  // entry 0 precedes any step
};

PadmmRun run_padmm(const QpInstance& inst, const PadmmConfig& cfg, const Vector& x_start);
PadmmRun run_padmm(const QpInstance& inst, const PadmmConfig& cfg);  // zero start

/// Scaled combined residual after k iterations divided by its initial value,
/// from a zero start; equals 1 at k = 0 by definition.
double residual_reduction(const QpInstance& inst, double sigma, std::int64_t k,
                          const PadmmConfig& base);

void write_residual_csv(const std::vector<ResidualRecord>& history, const std::string& path);

// Exposed for cross-checking the solver backends against each other in tests.
class XStepSolver {
 public:
  virtual ~XStepSolver() = default;
  virtual void solve(const Vector& rhs, const Vector& warm, Vector& out) = 0;
  virtual double last_relative_residual() const = 0;
};
std::unique_ptr<XStepSolver> make_x_step_solver(const QpInstance& inst, double sigma,
                                                double sigma_hat, double linsolve_tol,
                                                XStepMethod method,
                                                std::int64_t cg_max_iters = 0);

}  // namespace zoprox
