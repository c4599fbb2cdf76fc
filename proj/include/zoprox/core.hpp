#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zoprox {

using Vector = std::vector<double>;

// ---- small dense-vector helpers -------------------------------------------

double dot(const Vector& a, const Vector& b);
double nrm2(const Vector& a);
double nrm_inf(const Vector& a);
bool all_finite(const Vector& a);

// y += a * x
void axpy(double a, const Vector& x, Vector& y);
Vector scaled(const Vector& x, double a);
Vector vec_add(const Vector& a, const Vector& b);
Vector vec_sub(const Vector& a, const Vector& b);

// ---- seeded random streams -------------------------------------------------

/// Counter-based random stream (Philox4x32-10 under the hood).  A stream is
/// identified by (seed, stream_id); the counter is the only mutable state, so
/// replaying from counter 0 reproduces the exact draw sequence, and streams
/// with distinct ids never share draws no matter how they interleave.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64();
  /// Uniform draw in the open interval (0, 1).
  double next_uniform();
  /// Exact standard normal via the inverse CDF (Wichura's PPND16).
  double next_normal();
};

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id = 0);

/// Deterministic child stream: same (parent, label) always yields the same
/// child, distinct labels yield non-overlapping sequences.
RngStream split_stream(const RngStream& parent, std::uint64_t label);

/// Inverse standard-normal CDF, accurate to ~1e-15 relative (AS241 PPND16).
double inverse_normal_cdf(double p);

// ---- stochastic composite problem oracle bundle ----------------------------

/// Opaque scenario token: a draw of xi.  Problems decide what it carries (an
/// index, an assembled instance, ...) and how to interpret it in eval_F.
using Scenario = std::any;

/// Oracle bundle for min f(x) + r(x) with f(x) = E[F(x, xi)] and proximable r.
struct StochasticCompositeProblem {
  int dim = 0;
  std::function<Scenario(RngStream&)> sample_scenario;
  std::function<double(const Vector&, const Scenario&)> eval_F;
  /// prox of step * r at v; step > 0.
  std::function<Vector(const Vector&, double)> prox_r;
  /// Optional: value of r (indicator parts contribute 0 on feasible points).
  std::function<double(const Vector&)> eval_r;
  /// Optional subgradient selection from dF(x, xi).  The trailing argument is
  /// the step size currently in effect; selection rules that break ties by
  /// trial objective decrease need it, everyone else ignores it.
  std::function<Vector(const Vector&, const Scenario&, double)> subgrad_F;
  /// Optional membership test for dom(r), used for per-step feasibility
  /// assertions when available.
  std::function<bool(const Vector&)> in_domain;
  std::optional<double> lipschitz_L;
  std::optional<double> weak_convexity_rho;
};

// ---- run traces -------------------------------------------------------------

/// Per-run record.  Iterates/objectives/step sizes are thinned to a common
/// logging stride; the final and returned iterates are always kept in full.
struct RunTrace {
  std::vector<Vector> iterates;
  std::vector<double> objectives;   // mini-batch estimate of phi at log points
  std::vector<double> step_sizes;
  std::vector<std::int64_t> log_iterations;
  std::int64_t stride = 1;
  std::int64_t t_star = 0;
  double wall_time_s = 0.0;
  Vector final_iterate;
  Vector returned_iterate;          // x_{t*}
  std::int64_t oracle_evals = 0;    // F / subgradient calls made by the updates
  std::int64_t logging_evals = 0;   // F calls spent estimating the objective
  bool completed = false;
  std::string error;
};

/// Append one logging row; rejects non-finite values.
void record_step(RunTrace& trace, const Vector& x, double obj, double alpha);

}  // namespace zoprox
