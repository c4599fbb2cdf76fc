#pragma once

#include <cstdint>
#include <functional>

#include "zoprox/core.hpp"

namespace zoprox {

// ---- box sets ----------------------------------------------------------------

/// Coordinatewise box; entries may be +-infinity.
struct BoxSet {
  Vector lower;
  Vector upper;

  static BoxSet unbounded(int n);
  static BoxSet uniform(int n, double lo, double hi);
  bool contains(const Vector& v, double tol = 0.0) const;
  void validate() const;  // lower <= upper coordinatewise
};

Vector box_project(const Vector& v, const BoxSet& box);

/// out_i = sign(v_i) * max(|v_i| - step * w_i, 0); weights >= 0, step > 0.
Vector soft_threshold(const Vector& v, const Vector& weights, double step);

/// Shrink then clamp, exactly the composition the pADMM w-step uses.
Vector prox_box_soft_threshold(const Vector& v, const Vector& weights, double step,
                               const BoxSet& box);

// ---- deterministic composite objectives --------------------------------------

/// Deterministic composite p(x) = f(x) + r(x) used by the Moreau diagnostics.
/// Either grad_f (smooth part, preferred) or subgrad_f must be provided; r is
/// given through its prox (defaults: r = 0).
struct DeterministicComposite {
  int dim = 0;
  std::function<double(const Vector&)> eval_f;
  std::function<Vector(const Vector&)> grad_f;
  std::function<Vector(const Vector&)> subgrad_f;
  std::function<double(const Vector&)> eval_r;
  std::function<Vector(const Vector&, double)> prox_r;
  double grad_smoothness = -1.0;     // Lipschitz constant of grad_f; < 0 = unknown
  double weak_convexity_rho = 0.0;
};

DeterministicComposite make_composite_f_plus_r(
    int dim, std::function<double(const Vector&)> eval_f,
    std::function<Vector(const Vector&)> grad_f, double grad_smoothness,
    std::function<double(const Vector&)> eval_r,
    std::function<Vector(const Vector&, double)> prox_r, double rho);

// ---- Moreau envelope diagnostics ----------------------------------------------

/// lambda * rho_bar == 1 by construction; gradient_norm is ||u - prox|| / lambda.
struct MoreauDiagnostics {
  double lambda = 1.0;
  double rho_bar = 1.0;
  double inner_tol = 1e-8;
  std::int64_t inner_max_iters = 100000;
  Vector prox_point;
  double envelope_value = 0.0;
  double gradient_norm = 0.0;
};

MoreauDiagnostics make_moreau_diagnostics(double rho_bar, double inner_tol = 1e-8,
                                          std::int64_t inner_max_iters = 100000);

/// Computes prox_{lambda p}(u) for the composite p = f + r by accelerated
/// proximal gradient on the strongly convex subproblem (caller guarantees
/// rho < 1/lambda).  Falls back to proximal subgradient steps when only a
/// subgradient selection is available.  Throws if the inner gradient-mapping
/// residual does not reach inner_tol within inner_max_iters.
MoreauDiagnostics moreau_prox(const DeterministicComposite& objective, const Vector& u,
                              MoreauDiagnostics diag);

/// Fixed-point identity residual
///   || xhat - prox_{alpha r}(alpha rho_bar x - alpha grad(xhat) + (1-alpha rho_bar) xhat) ||
/// with xhat the Moreau proximal point of x.  Requires grad_f (the composites
/// used here are quadratic in their smooth part, whose Gaussian smoothing only
/// shifts values, so grad_f doubles as the smoothed gradient).
double auxiliary_fixed_point_residual(const DeterministicComposite& objective,
                                    const Vector& x, double alpha,
                                    const MoreauDiagnostics& diag_template);

/// 2-D quadratic with one negative curvature direction boxed into [-1,1]^2:
/// genuinely weakly convex, bounded below, and its Gaussian smoothing only
/// shifts values, so Moreau gradients of the surrogate are computable exactly.
/// The diagnostic battery and the rate-trend checks both run on it.
struct BoxQuadratic {
  double h11 = 3.0, h12 = 1.0, h22 = -2.0;
  double g1 = 0.3, g2 = -0.5;
  BoxSet box = BoxSet::uniform(2, -1.0, 1.0);

  double rho() const;               // -lambda_min(H)
  double grad_bound() const;        // max ||H x + g|| over the box corners
  DeterministicComposite composite() const;
};

}  // namespace zoprox
