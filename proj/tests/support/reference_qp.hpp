// Test-only reference solvers, kept independent of the pADMM implementation
// they cross-check: a dense KKT solve for equality-constrained QPs, and FISTA
// on the control-reduced bound-constrained problem for the FD instances.
#pragma once

#include "zoprox/padmm.hpp"
#include "zoprox/pde.hpp"

namespace zoprox::testsupport {

// Dense LU with partial pivoting; n stays tiny in tests.
struct DenseLU {
  int n = 0;
  std::vector<double> lu;  // row-major
  std::vector<int> piv;

  static DenseLU factor(const std::vector<double>& a, int n);
  Vector solve(const Vector& rhs) const;
};

/// Dense [Q -A^T; A 0] [x; y] = [-c; b]; requires D = 0 and a free box.
struct KktSolution {
  Vector x;
  Vector y1;
};
KktSolution dense_kkt_solve(const QpInstance& inst);

/// Reduced objective of an FD instance at control u (state solved exactly):
///   c_y^T y + 1/2 y^T Q_y y + 1/2 u^T Q_u u + sum d_i |u_i|, L y = b + u.
struct ReducedProblem {
  explicit ReducedProblem(const QpInstance& inst);
  double objective(const Vector& u) const;
  Vector smooth_gradient(const Vector& u) const;
  Vector state_for(const Vector& u) const;

  int ny = 0;
  Vector c_y, d_u;
  double qy = 0.0, qu = 0.0;
  BoxSet control_box;
  Vector b;
  DenseLU lu;   // of L
  DenseLU lut;  // of L^T
};

struct ReferenceSolution {
  Vector u;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

/// High-accuracy FISTA on the reduced problem; independent solve route.
ReferenceSolution reference_solve(const QpInstance& inst, double tol = 1e-11,
                                  std::int64_t max_iters = 400000);

/// Reduced objective at the control block of a pADMM point (box-feasible w).
double reduced_objective_at(const QpInstance& inst, const Vector& control);

}  // namespace zoprox::testsupport
