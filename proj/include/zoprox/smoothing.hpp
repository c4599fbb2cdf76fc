#pragma once

#include "zoprox/core.hpp"

namespace zoprox {

enum class EstimatorKind { Gaussian, DoubleGaussian, Uniform, Spsa, Subgradient };

const char* estimator_name(EstimatorKind k);

/// mu for the single-smoothing estimators, (mu1, mu2) for double smoothing
/// with mu1 >= 2 mu2 > 0.
struct SmoothingParams {
  double mu = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
};

struct GradientEstimate {
  Vector direction;
  int function_evals = 0;
  EstimatorKind estimator = EstimatorKind::Gaussian;
};

// ---- direction samplers ------------------------------------------------------

/// i.i.d. N(0,1) coordinates.
Vector sample_standard_normal(RngStream& stream, int n);

/// Uniform on the closed unit Euclidean ball: normalized Gaussian direction
/// scaled by V^(1/d) with V uniform on (0,1).
Vector sample_uniform_ball(RngStream& stream, int d);

/// i.i.d. coordinates in {-1, +1} with probability 1/2 each.
Vector sample_rademacher(RngStream& stream, int d);

// ---- estimators, explicit-direction forms ------------------------------------
// These take the perturbation direction and the scenario directly; the stream
// wrappers below and the tests that pin a direction both go through them.

GradientEstimate gaussian_estimate_at(const StochasticCompositeProblem& problem,
                                      const Vector& x, double mu, const Vector& u,
                                      const Scenario& xi);

GradientEstimate double_gaussian_estimate_at(const StochasticCompositeProblem& problem,
                                             const Vector& x, double mu1, double mu2,
                                             const Vector& u1, const Vector& u2,
                                             const Scenario& xi);

/// Default is the sign-corrected quotient (F(x+muU) - F(x)); pass
/// negated_quotient = true for the displayed (F(x) - F(x+muU)) variant, which
/// ascends on smooth convex objectives when plugged into a descent update.
GradientEstimate uniform_estimate_at(const StochasticCompositeProblem& problem,
                                     const Vector& x, double mu, const Vector& u,
                                     const Scenario& xi, bool negated_quotient = false);

GradientEstimate spsa_estimate_at(const StochasticCompositeProblem& problem,
                                  const Vector& x, double mu, const Vector& u,
                                  const Scenario& xi);

// ---- estimators, stream forms --------------------------------------------------
// One scenario and one direction per draw; batch > 1 averages that many
// independent single draws (2 function evaluations each).

GradientEstimate gaussian_estimate(const StochasticCompositeProblem& problem,
                                   const Vector& x, double mu, RngStream& u_stream,
                                   RngStream& xi_stream, int batch = 1);

GradientEstimate double_gaussian_estimate(const StochasticCompositeProblem& problem,
                                          const Vector& x, double mu1, double mu2,
                                          RngStream& u_stream, RngStream& u1_stream,
                                          RngStream& xi_stream, int batch = 1);

GradientEstimate uniform_estimate(const StochasticCompositeProblem& problem,
                                  const Vector& x, double mu, RngStream& u_stream,
                                  RngStream& xi_stream, int batch = 1,
                                  bool negated_quotient = false);

GradientEstimate spsa_estimate(const StochasticCompositeProblem& problem, const Vector& x,
                               double mu, RngStream& u_stream, RngStream& xi_stream,
                               int batch = 1);

}  // namespace zoprox
