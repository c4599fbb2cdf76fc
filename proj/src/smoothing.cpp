#include "zoprox/smoothing.hpp"

#include <cmath>
#include <sstream>

namespace zoprox {

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Gaussian: return "z-proxsg";
    case EstimatorKind::DoubleGaussian: return "dsz-proxsg";
    case EstimatorKind::Uniform: return "uniz-proxsg";
    case EstimatorKind::Spsa: return "spsa";
    case EstimatorKind::Subgradient: return "prox-ssg";
  }
  return "unknown";
}

Vector sample_standard_normal(RngStream& stream, int n) {
  if (n < 1) throw std::invalid_argument("sample_standard_normal: n >= 1 required");
  Vector out(n);
  for (int i = 0; i < n; ++i) out[i] = stream.next_normal();
  return out;
}

Vector sample_uniform_ball(RngStream& stream, int d) {
  if (d < 1) throw std::invalid_argument("sample_uniform_ball: d >= 1 required");
  Vector g = sample_standard_normal(stream, d);
  const double radius = std::pow(stream.next_uniform(), 1.0 / double(d));
  const double norm = nrm2(g);
  if (norm == 0.0) return Vector(d, 0.0);
  for (int i = 0; i < d; ++i) g[i] *= radius / norm;
  return g;
}

Vector sample_rademacher(RngStream& stream, int d) {
  if (d < 1) throw std::invalid_argument("sample_rademacher: d >= 1 required");
  Vector out(d);
  for (int i = 0; i < d; ++i) out[i] = (stream.next_u64() & 1u) ? 1.0 : -1.0;
  return out;
}

namespace {

[[noreturn]] void throw_nonfinite(const char* who, const Vector& point) {
  std::ostringstream os;
  os << who << ": non-finite function value at point (";
  for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
  os << ")";
  throw std::runtime_error(os.str());
}

double eval_checked(const StochasticCompositeProblem& problem, const Vector& x,
                    const Scenario& xi, const char* who) {
  const double v = problem.eval_F(x, xi);
  if (!std::isfinite(v)) throw_nonfinite(who, x);
  return v;
}

}  // namespace

GradientEstimate gaussian_estimate_at(const StochasticCompositeProblem& problem,
                                      const Vector& x, double mu, const Vector& u,
                                      const Scenario& xi) {
  if (!(mu > 0.0)) throw std::invalid_argument("gaussian_estimate: mu must be positive");
  Vector shifted = x;
  axpy(mu, u, shifted);
  const double f_plus = eval_checked(problem, shifted, xi, "gaussian_estimate");
  const double f_base = eval_checked(problem, x, xi, "gaussian_estimate");
  GradientEstimate est;
  est.direction = scaled(u, (f_plus - f_base) / mu);
  est.function_evals = 2;
  est.estimator = EstimatorKind::Gaussian;
  return est;
}

GradientEstimate double_gaussian_estimate_at(const StochasticCompositeProblem& problem,
                                             const Vector& x, double mu1, double mu2,
                                             const Vector& u1, const Vector& u2,
                                             const Scenario& xi) {
  if (!(mu2 > 0.0) || !(mu1 >= 2.0 * mu2))
    throw std::invalid_argument("double_gaussian_estimate: need mu1 >= 2*mu2 > 0");
  Vector outer = x;
  axpy(mu1, u1, outer);
  Vector inner = outer;
  axpy(mu2, u2, inner);
  const double f_inner = eval_checked(problem, inner, xi, "double_gaussian_estimate");
  const double f_outer = eval_checked(problem, outer, xi, "double_gaussian_estimate");
  GradientEstimate est;
  est.direction = scaled(u2, (f_inner - f_outer) / mu2);
  est.function_evals = 2;
  est.estimator = EstimatorKind::DoubleGaussian;
  return est;
}

GradientEstimate uniform_estimate_at(const StochasticCompositeProblem& problem,
                                     const Vector& x, double mu, const Vector& u,
                                     const Scenario& xi, bool negated_quotient) {
  if (!(mu > 0.0)) throw std::invalid_argument("uniform_estimate: mu must be positive");
  const double d = double(x.size());
  Vector shifted = x;
  axpy(mu, u, shifted);
  const double f_base = eval_checked(problem, x, xi, "uniform_estimate");
  const double f_plus = eval_checked(problem, shifted, xi, "uniform_estimate");
  const double diff = negated_quotient ? (f_base - f_plus) : (f_plus - f_base);
  GradientEstimate est;
  est.direction = scaled(u, d * diff / mu);
  est.function_evals = 2;
  est.estimator = EstimatorKind::Uniform;
  return est;
}

GradientEstimate spsa_estimate_at(const StochasticCompositeProblem& problem,
                                  const Vector& x, double mu, const Vector& u,
                                  const Scenario& xi) {
  if (!(mu > 0.0)) throw std::invalid_argument("spsa_estimate: mu must be positive");
  Vector plus = x, minus = x;
  axpy(mu, u, plus);
  axpy(-mu, u, minus);
  const double f_plus = eval_checked(problem, plus, xi, "spsa_estimate");
  const double f_minus = eval_checked(problem, minus, xi, "spsa_estimate");
  const double quot = (f_plus - f_minus) / (2.0 * mu);
  GradientEstimate est;
  est.direction.resize(x.size());
  // component-wise division by u; Rademacher entries are +-1, so 1/u_i = u_i
  for (std::size_t i = 0; i < x.size(); ++i) est.direction[i] = quot * u[i];
  est.function_evals = 2;
  est.estimator = EstimatorKind::Spsa;
  return est;
}

namespace {

template <typename DrawOne>
GradientEstimate batched(const StochasticCompositeProblem& problem, int batch,
                         EstimatorKind kind, DrawOne&& draw_one) {
  if (batch < 1) throw std::invalid_argument("estimator: batch >= 1 required");
  GradientEstimate total;
  total.direction.assign(problem.dim, 0.0);
  total.estimator = kind;
  for (int b = 0; b < batch; ++b) {
    GradientEstimate one = draw_one();
    axpy(1.0 / double(batch), one.direction, total.direction);
    total.function_evals += one.function_evals;
  }
  return total;
}

}  // namespace

GradientEstimate gaussian_estimate(const StochasticCompositeProblem& problem,
                                   const Vector& x, double mu, RngStream& u_stream,
                                   RngStream& xi_stream, int batch) {
  return batched(problem, batch, EstimatorKind::Gaussian, [&] {
    Vector u = sample_standard_normal(u_stream, problem.dim);
    Scenario xi = problem.sample_scenario(xi_stream);
    return gaussian_estimate_at(problem, x, mu, u, xi);
  });
}

GradientEstimate double_gaussian_estimate(const StochasticCompositeProblem& problem,
                                          const Vector& x, double mu1, double mu2,
                                          RngStream& u_stream, RngStream& u1_stream,
                                          RngStream& xi_stream, int batch) {
  return batched(problem, batch, EstimatorKind::DoubleGaussian, [&] {
    Vector u2 = sample_standard_normal(u_stream, problem.dim);
    Vector u1 = sample_standard_normal(u1_stream, problem.dim);
    Scenario xi = problem.sample_scenario(xi_stream);
    return double_gaussian_estimate_at(problem, x, mu1, mu2, u1, u2, xi);
  });
}

GradientEstimate uniform_estimate(const StochasticCompositeProblem& problem,
                                  const Vector& x, double mu, RngStream& u_stream,
                                  RngStream& xi_stream, int batch, bool negated_quotient) {
  return batched(problem, batch, EstimatorKind::Uniform, [&] {
    Vector u = sample_uniform_ball(u_stream, problem.dim);
    Scenario xi = problem.sample_scenario(xi_stream);
    return uniform_estimate_at(problem, x, mu, u, xi, negated_quotient);
  });
}

GradientEstimate spsa_estimate(const StochasticCompositeProblem& problem, const Vector& x,
                               double mu, RngStream& u_stream, RngStream& xi_stream,
                               int batch) {
  return batched(problem, batch, EstimatorKind::Spsa, [&] {
    Vector u = sample_rademacher(u_stream, problem.dim);
    Scenario xi = problem.sample_scenario(xi_stream);
    return spsa_estimate_at(problem, x, mu, u, xi);
  });
}

}  // namespace zoprox
