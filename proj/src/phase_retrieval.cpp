#include "zoprox/phase_retrieval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "zoprox/smoothing.hpp"

namespace zoprox {

namespace {

constexpr double kKinkTol = 1e-14;

Vector unit_gaussian(RngStream& stream, int d) {
  Vector v = sample_standard_normal(stream, d);
  const double n = nrm2(v);
  for (double& e : v) e /= n;
  return v;
}

}  // namespace

double PhaseRetrievalInstance::weak_convexity() const {
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    const double* a = row(i);
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += a[j] * a[j];
    worst = std::max(worst, s);
  }
  return 2.0 * worst;
}

PhaseRetrievalInstance generate_phase_retrieval(int d, int m, RngStream& stream) {
  if (d < 1 || m < 1) throw std::invalid_argument("generate_phase_retrieval: d, m >= 1");
  PhaseRetrievalInstance inst;
  inst.d = d;
  inst.m = m;
  inst.measurements.resize(std::size_t(m) * d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) inst.measurements[std::size_t(i) * d + j] = stream.next_normal();
  inst.signal = unit_gaussian(stream, d);
  inst.start = unit_gaussian(stream, d);
  inst.targets.resize(m);
  for (int i = 0; i < m; ++i) {
    const double* a = inst.row(i);
    double ip = 0.0;
    for (int j = 0; j < d; ++j) ip += a[j] * inst.signal[j];
    inst.targets[i] = ip * ip;
  }
  return inst;
}

double phase_sample_F(const PhaseRetrievalInstance& inst, const Vector& x, int i) {
  if (i < 0 || i >= inst.m) throw std::out_of_range("phase_sample_F: index out of range");
  if (int(x.size()) != inst.d) throw std::invalid_argument("phase_sample_F: dimension mismatch");
  const double* a = inst.row(i);
  double ip = 0.0;
  for (int j = 0; j < inst.d; ++j) ip += a[j] * x[j];
  return std::fabs(ip * ip - inst.targets[i]);
}

double phase_objective(const PhaseRetrievalInstance& inst, const Vector& x) {
  double s = 0.0;
  for (int i = 0; i < inst.m; ++i) s += phase_sample_F(inst, x, i);
  return s / double(inst.m);
}

Vector phase_subgradient(const PhaseRetrievalInstance& inst, const Vector& x, int i,
                         double alpha) {
  if (i < 0 || i >= inst.m) throw std::out_of_range("phase_subgradient: index out of range");
  const double* a = inst.row(i);
  double ip = 0.0;
  for (int j = 0; j < inst.d; ++j) ip += a[j] * x[j];
  const double gap = ip * ip - inst.targets[i];

  auto candidate = [&](double s) {
    Vector g(inst.d);
    for (int j = 0; j < inst.d; ++j) g[j] = 2.0 * ip * s * a[j];
    return g;
  };

  if (std::fabs(gap) > kKinkTol) return candidate(gap > 0.0 ? 1.0 : -1.0);

  // On the kink: pick the sign whose trial step decreases the objective most.
  double best_val = std::numeric_limits<double>::infinity();
  Vector best;
  for (double s : {-1.0, 0.0, 1.0}) {
    Vector g = candidate(s);
    Vector trial = x;
    axpy(-alpha, g, trial);
    const double val = phase_objective(inst, trial);
    if (val < best_val) {
      best_val = val;
      best = std::move(g);
    }
  }
  return best;
}

StochasticCompositeProblem as_problem(std::shared_ptr<const PhaseRetrievalInstance> inst) {
  StochasticCompositeProblem p;
  p.dim = inst->d;
  const int m = inst->m;
  p.sample_scenario = [m](RngStream& stream) -> Scenario {
    int i = int(stream.next_uniform() * double(m));
    if (i >= m) i = m - 1;
    return Scenario(i);
  };
  p.eval_F = [inst](const Vector& x, const Scenario& xi) {
    return phase_sample_F(*inst, x, std::any_cast<int>(xi));
  };
  p.prox_r = [](const Vector& v, double) { return v; };
  p.eval_r = [](const Vector&) { return 0.0; };
  p.subgrad_F = [inst](const Vector& x, const Scenario& xi, double alpha) {
    return phase_subgradient(*inst, x, std::any_cast<int>(xi), alpha);
  };
  p.weak_convexity_rho = inst->weak_convexity();
  return p;
}

void save_phase_instance(const PhaseRetrievalInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_phase_instance: cannot open " + path);
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  out << inst.m << " " << inst.d << "\n";
  for (int i = 0; i < inst.m; ++i) {
    for (int j = 0; j < inst.d; ++j) {
      if (j) out << " ";
      put(inst.measurements[std::size_t(i) * inst.d + j]);
    }
    out << "\n";
  }
  auto put_row = [&](const Vector& v) {
    for (int j = 0; j < int(v.size()); ++j) {
      if (j) out << " ";
      put(v[j]);
    }
    out << "\n";
  };
  put_row(inst.targets);
  put_row(inst.signal);
  put_row(inst.start);
}

PhaseRetrievalInstance load_phase_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_phase_instance: cannot open " + path);
  PhaseRetrievalInstance inst;
  in >> inst.m >> inst.d;
  if (!in || inst.m < 1 || inst.d < 1)
    throw std::runtime_error("load_phase_instance: malformed header in " + path);
  inst.measurements.resize(std::size_t(inst.m) * inst.d);
  for (double& v : inst.measurements) in >> v;
  inst.targets.resize(inst.m);
  for (double& v : inst.targets) in >> v;
  inst.signal.resize(inst.d);
  for (double& v : inst.signal) in >> v;
  inst.start.resize(inst.d);
  for (double& v : inst.start) in >> v;
  if (!in) throw std::runtime_error("load_phase_instance: truncated file " + path);
  return inst;
}

}  // namespace zoprox
