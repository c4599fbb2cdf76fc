#pragma once

#include <memory>
#include <string>

#include "zoprox/core.hpp"

namespace zoprox {

/// Instance of min (1/m) sum_i |<a_i, x>^2 - b_i| with b_i = <a_i, xbar>^2,
/// xbar and x0 independent points on the unit sphere.
struct PhaseRetrievalInstance {
  int d = 0;
  int m = 0;
  std::vector<double> measurements;  // m x d, row-major
  Vector targets;                    // b_i
  Vector signal;                     // xbar
  Vector start;                      // x_0

  const double* row(int i) const { return measurements.data() + std::size_t(i) * d; }
  /// Weak-convexity witness 2 * max_i ||a_i||^2.
  double weak_convexity() const;
};

PhaseRetrievalInstance generate_phase_retrieval(int d, int m, RngStream& stream);

double phase_objective(const PhaseRetrievalInstance& inst, const Vector& x);

/// |<a_i, x>^2 - b_i| for one measurement index (0-based).
double phase_sample_F(const PhaseRetrievalInstance& inst, const Vector& x, int i);

/// Subgradient selection of f_i at x: 2<a_i,x> sign(<a_i,x>^2 - b_i) a_i away
/// from the kink; within 1e-14 of it, the candidate in {-1, 0, +1} scaled by
/// 2<a_i,x> a_i that lowers the full objective most at step alpha.
Vector phase_subgradient(const PhaseRetrievalInstance& inst, const Vector& x, int i,
                         double alpha);

/// Oracle bundle with xi uniform over measurement indices, one index per draw,
/// and r = 0.
StochasticCompositeProblem as_problem(std::shared_ptr<const PhaseRetrievalInstance> inst);

void save_phase_instance(const PhaseRetrievalInstance& inst, const std::string& path);
PhaseRetrievalInstance load_phase_instance(const std::string& path);

}  // namespace zoprox
