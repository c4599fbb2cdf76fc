#include "zoprox/prox.hpp"

#include <cmath>
#include <limits>

namespace zoprox {

BoxSet BoxSet::unbounded(int n) {
  const double inf = std::numeric_limits<double>::infinity();
  return BoxSet{Vector(n, -inf), Vector(n, inf)};
}

BoxSet BoxSet::uniform(int n, double lo, double hi) {
  return BoxSet{Vector(n, lo), Vector(n, hi)};
}

void BoxSet::validate() const {
  if (lower.size() != upper.size()) throw std::invalid_argument("BoxSet: size mismatch");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("BoxSet: lower > upper");
}

bool BoxSet::contains(const Vector& v, double tol) const {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < lower[i] - tol || v[i] > upper[i] + tol) return false;
  return true;
}

Vector box_project(const Vector& v, const BoxSet& box) {
  box.validate();
  if (v.size() != box.lower.size()) throw std::invalid_argument("box_project: size mismatch");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = std::min(std::max(v[i], box.lower[i]), box.upper[i]);
  return out;
}

Vector soft_threshold(const Vector& v, const Vector& weights, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("soft_threshold: step must be positive");
  if (v.size() != weights.size()) throw std::invalid_argument("soft_threshold: size mismatch");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("soft_threshold: negative weight");
    const double th = step * weights[i];
    const double a = std::fabs(v[i]) - th;
    out[i] = (a > 0.0) ? std::copysign(a, v[i]) : 0.0;
  }
  return out;
}

Vector prox_box_soft_threshold(const Vector& v, const Vector& weights, double step,
                               const BoxSet& box) {
  return box_project(soft_threshold(v, weights, step), box);
}

DeterministicComposite make_composite_f_plus_r(
    int dim, std::function<double(const Vector&)> eval_f,
    std::function<Vector(const Vector&)> grad_f, double grad_smoothness,
    std::function<double(const Vector&)> eval_r,
    std::function<Vector(const Vector&, double)> prox_r, double rho) {
  DeterministicComposite c;
  c.dim = dim;
  c.eval_f = std::move(eval_f);
  c.grad_f = std::move(grad_f);
  c.eval_r = std::move(eval_r);
  c.prox_r = std::move(prox_r);
  c.grad_smoothness = grad_smoothness;
  c.weak_convexity_rho = rho;
  return c;
}

MoreauDiagnostics make_moreau_diagnostics(double rho_bar, double inner_tol,
                                          std::int64_t inner_max_iters) {
  if (!(rho_bar > 0.0)) throw std::invalid_argument("moreau: rho_bar must be positive");
  MoreauDiagnostics d;
  d.rho_bar = rho_bar;
  d.lambda = 1.0 / rho_bar;
  d.inner_tol = inner_tol;
  d.inner_max_iters = inner_max_iters;
  return d;
}

namespace {

Vector apply_prox_r(const DeterministicComposite& obj, const Vector& v, double step) {
  return obj.prox_r ? obj.prox_r(v, step) : v;
}

double apply_eval_r(const DeterministicComposite& obj, const Vector& v) {
  return obj.eval_r ? obj.eval_r(v) : 0.0;
}

// Accelerated proximal gradient for
//   min_x f(x) + r(x) + ||x - u||^2 / (2 lambda),
// strongly convex with modulus 1/lambda - rho.  Terminates on the
// gradient-mapping residual ||x - prox_{r/L}(x - grad_s(x)/L)|| * L.
Vector inner_fista(const DeterministicComposite& obj, const Vector& u,
                   const MoreauDiagnostics& diag, double* out_residual) {
  const double lam = diag.lambda;
  const double m = 1.0 / lam - obj.weak_convexity_rho;
  if (!(m > 0.0))
    throw std::invalid_argument("moreau_prox: need weak_convexity_rho < 1/lambda");

  auto grad_s = [&](const Vector& x) {
    Vector g = obj.grad_f(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += (x[i] - u[i]) / lam;
    return g;
  };
  auto val_s = [&](const Vector& x) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - u[i]) * (x[i] - u[i]);
    return obj.eval_f(x) + d2 / (2.0 * lam);
  };

  const bool fixed_L = obj.grad_smoothness >= 0.0;
  double L = (fixed_L ? obj.grad_smoothness : 1.0) + 1.0 / lam;

  Vector x = u, x_prev = u;
  Vector y = u;
  double res = std::numeric_limits<double>::infinity();
  for (std::int64_t it = 0; it < diag.inner_max_iters; ++it) {
    Vector gy = grad_s(y);
    Vector x_new;
    while (true) {
      Vector step(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) step[i] = y[i] - gy[i] / L;
      x_new = apply_prox_r(obj, step, 1.0 / L);
      if (fixed_L) break;
      // quadratic upper-bound check for the backtracking path
      double lin = val_s(y), quad = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = x_new[i] - y[i];
        lin += gy[i] * d;
        quad += d * d;
      }
      if (val_s(x_new) <= lin + 0.5 * L * quad + 1e-14 * std::fabs(lin)) break;
      L *= 2.0;
    }

    // residual of one proximal-gradient step at the candidate
    Vector gx = grad_s(x_new);
    Vector probe(x_new.size());
    for (std::size_t i = 0; i < x_new.size(); ++i) probe[i] = x_new[i] - gx[i] / L;
    Vector z = apply_prox_r(obj, probe, 1.0 / L);
    res = L * nrm2(vec_sub(x_new, z));
    if (res <= diag.inner_tol) {
      if (out_residual) *out_residual = res;
      return x_new;
    }

    const double q = m / L;
    const double beta = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));
    x_prev = x;
    x = x_new;
    y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
  }
  throw std::runtime_error("moreau_prox: inner solver did not converge, last residual " +
                           std::to_string(res));
}

// Proximal subgradient fallback for composites without a smooth-part gradient.
// The subproblem is strongly convex, so diminishing steps 2/(m(k+2)) apply;
// tolerances must be far looser than the smooth path's.
Vector inner_subgradient(const DeterministicComposite& obj, const Vector& u,
                         const MoreauDiagnostics& diag, double* out_residual) {
  const double lam = diag.lambda;
  const double m = 1.0 / lam - obj.weak_convexity_rho;
  if (!(m > 0.0))
    throw std::invalid_argument("moreau_prox: need weak_convexity_rho < 1/lambda");
  auto grad_s = [&](const Vector& x) {
    Vector g = obj.subgrad_f(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += (x[i] - u[i]) / lam;
    return g;
  };
  Vector x = u;
  double res = std::numeric_limits<double>::infinity();
  for (std::int64_t it = 0; it < diag.inner_max_iters; ++it) {
    Vector g = grad_s(x);
    // fixed-step probe residual
    Vector probe(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) probe[i] = x[i] - lam * g[i];
    Vector z = apply_prox_r(obj, probe, lam);
    res = nrm2(vec_sub(x, z)) / lam;
    if (res <= diag.inner_tol) {
      if (out_residual) *out_residual = res;
      return x;
    }
    const double gamma = 2.0 / (m * double(it + 2));
    for (std::size_t i = 0; i < x.size(); ++i) probe[i] = x[i] - gamma * g[i];
    x = apply_prox_r(obj, probe, gamma);
  }
  throw std::runtime_error("moreau_prox: subgradient inner loop did not converge, last residual " +
                           std::to_string(res));
}

}  // namespace

MoreauDiagnostics moreau_prox(const DeterministicComposite& objective, const Vector& u,
                              MoreauDiagnostics diag) {
  if (!(diag.lambda > 0.0)) throw std::invalid_argument("moreau_prox: lambda must be positive");
  if (std::fabs(diag.lambda * diag.rho_bar - 1.0) > 1e-12)
    throw std::invalid_argument("moreau_prox: lambda * rho_bar must equal 1");
  if (!objective.eval_f) throw std::invalid_argument("moreau_prox: missing eval_f");

  double res = 0.0;
  Vector xhat;
  if (objective.grad_f) {
    xhat = inner_fista(objective, u, diag, &res);
  } else if (objective.subgrad_f) {
    xhat = inner_subgradient(objective, u, diag, &res);
  } else {
    throw std::invalid_argument("moreau_prox: need grad_f or subgrad_f");
  }

  diag.prox_point = xhat;
  const double dist = nrm2(vec_sub(u, xhat));
  diag.gradient_norm = dist / diag.lambda;
  diag.envelope_value = objective.eval_f(xhat) + apply_eval_r(objective, xhat) +
                        dist * dist / (2.0 * diag.lambda);
  if (std::fabs(diag.gradient_norm - dist / diag.lambda) > 1e-10)
    throw std::runtime_error("moreau_prox: gradient identity violated");
  return diag;
}

double BoxQuadratic::rho() const {
  const double tr = h11 + h22, det = h11 * h22 - h12 * h12;
  return -(0.5 * (tr - std::sqrt(tr * tr - 4.0 * det)));
}

double BoxQuadratic::grad_bound() const {
  double worst = 0.0;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      const double gx = h11 * s1 + h12 * s2 + g1;
      const double gy = h12 * s1 + h22 * s2 + g2;
      worst = std::max(worst, std::sqrt(gx * gx + gy * gy));
    }
  return worst;
}

DeterministicComposite BoxQuadratic::composite() const {
  DeterministicComposite c;
  c.dim = 2;
  const double a = h11, b = h12, d = h22, c1 = g1, c2 = g2;
  c.eval_f = [=](const Vector& x) {
    return 0.5 * (a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + d * x[1] * x[1]) + c1 * x[0] +
           c2 * x[1];
  };
  c.grad_f = [=](const Vector& x) {
    return Vector{a * x[0] + b * x[1] + c1, b * x[0] + d * x[1] + c2};
  };
  const BoxSet box_copy = box;
  c.eval_r = [](const Vector&) { return 0.0; };
  c.prox_r = [box_copy](const Vector& v, double) { return box_project(v, box_copy); };
  const double tr = a + d, det = a * d - b * b;
  c.grad_smoothness = 0.5 * (std::fabs(tr) + std::sqrt(tr * tr - 4.0 * det)) + 1.0;
  c.weak_convexity_rho = rho();
  return c;
}

double auxiliary_fixed_point_residual(const DeterministicComposite& objective,
                                    const Vector& x, double alpha,
                                    const MoreauDiagnostics& diag_template) {
  const double rho_bar = diag_template.rho_bar;
  if (!(alpha > 0.0 && alpha <= 1.0 / rho_bar + 1e-15))
    throw std::invalid_argument("fixed-point residual: alpha must lie in (0, 1/rho_bar]");
  if (!objective.grad_f)
    throw std::invalid_argument("fixed-point residual: analytic smoothed gradient required");

  MoreauDiagnostics diag = moreau_prox(objective, x, diag_template);
  const Vector& xhat = diag.prox_point;
  const Vector g = objective.grad_f(xhat);
  const double delta = 1.0 - alpha * rho_bar;
  Vector arg(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    arg[i] = alpha * rho_bar * x[i] - alpha * g[i] + delta * xhat[i];
  Vector back = objective.prox_r ? objective.prox_r(arg, alpha) : arg;
  return nrm2(vec_sub(xhat, back));
}

}  // namespace zoprox
