#include "zoprox/padmm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>

namespace zoprox {

namespace {

constexpr double kGammaUpper = 1.6180339887498949;  // (1 + sqrt(5)) / 2
constexpr double kPi = 3.14159265358979323846;

// ---- fast Poisson plan: eigenbasis of the 5-point Laplacian ------------------

struct DstPlan {
  int N = 0;
  std::vector<double> V;    // sine matrix, V[k*N+i] = sin((k+1)(i+1) pi/(N+1))
  std::vector<double> lam;  // 1-D eigenvalues (2 - 2 cos((k+1) pi/(N+1))) / h^2
};

std::shared_ptr<const DstPlan> dst_plan(int N) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const DstPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[N];
  if (!slot) {
    auto plan = std::make_shared<DstPlan>();
    plan->N = N;
    plan->V.resize(std::size_t(N) * N);
    plan->lam.resize(N);
    const double h = 1.0 / double(N + 1);
    for (int k = 0; k < N; ++k) {
      plan->lam[k] = (2.0 - 2.0 * std::cos((k + 1) * kPi / double(N + 1))) / (h * h);
      for (int i = 0; i < N; ++i)
        plan->V[std::size_t(k) * N + i] = std::sin(double(k + 1) * double(i + 1) * kPi /
                                                   double(N + 1));
    }
    slot = plan;
  }
  return slot;
}

void matmul(int N, const double* A, const double* B, double* C) {
  for (int i = 0; i < N; ++i) {
    double* ci = C + std::size_t(i) * N;
    std::fill(ci, ci + N, 0.0);
    const double* ai = A + std::size_t(i) * N;
    for (int k = 0; k < N; ++k) {
      const double a = ai[k];
      const double* bk = B + std::size_t(k) * N;
      for (int j = 0; j < N; ++j) ci[j] += a * bk[j];
    }
  }
}

// Shared Schur-complement bookkeeping for the two direct backends.  With the
// generated block-diagonal Q, eliminating the control block leaves
//   (a I + c_hat L^T L) y = r_y + (sigma/d_u) L^T r_u,  u = (r_u + sigma L y)/d_u.
struct FdElimination {
  int ny = 0;
  double sigma = 0.0, a = 0.0, d_u = 0.0, c_hat = 0.0;
  SparseMatrix L;

  FdElimination(const QpInstance& inst, double sigma_, double sigma_hat) {
    if (inst.grid_n < 1 || inst.n() != 2 * inst.grid_n * inst.grid_n)
      throw std::invalid_argument("x-step: instance lacks FD block structure");
    ny = inst.grid_n * inst.grid_n;
    sigma = sigma_;
    const double qy = inst.q_diag[0];
    const double qu = inst.q_diag[std::size_t(ny)];
    a = qy + sigma_hat + sigma;
    d_u = qu + sigma_hat + 2.0 * sigma;
    c_hat = sigma * (d_u - sigma) / d_u;
    L = inst.A.submatrix_cols(0, ny);
  }

  // rhs_y' = r_y + (sigma/d_u) L^T r_u
  void reduced_rhs(const Vector& rhs, Vector& out) const {
    out.assign(std::size_t(ny), 0.0);
    L.multiply_transpose(rhs.data() + ny, out.data());
    for (int i = 0; i < ny; ++i) out[std::size_t(i)] = rhs[std::size_t(i)] + sigma / d_u * out[std::size_t(i)];
  }

  void recover_control(const Vector& rhs, const Vector& y, Vector& out) const {
    out.resize(std::size_t(2) * ny);
    std::copy(y.begin(), y.end(), out.begin());
    Vector Ly(std::size_t(ny), 0.0);
    L.multiply(y.data(), Ly.data());
    for (int i = 0; i < ny; ++i)
      out[std::size_t(ny) + i] = (rhs[std::size_t(ny) + i] + sigma * Ly[std::size_t(i)]) / d_u;
  }
};

class FastPoissonXStep final : public XStepSolver {
 public:
  FastPoissonXStep(const QpInstance& inst, double sigma, double sigma_hat)
      : elim_(inst, sigma, sigma_hat), plan_(dst_plan(inst.grid_n)) {
    const int N = inst.grid_n;
    denom_.resize(std::size_t(N) * N);
    for (int k = 0; k < N; ++k)
      for (int l = 0; l < N; ++l) {
        const double lam = plan_->lam[std::size_t(k)] + plan_->lam[std::size_t(l)];
        denom_[std::size_t(k) * N + l] = elim_.a + elim_.c_hat * lam * lam;
      }
    t1_.resize(std::size_t(N) * N);
    t2_.resize(std::size_t(N) * N);
    ry_.resize(std::size_t(N) * N);
    y_.resize(std::size_t(N) * N);
  }

  void solve(const Vector& rhs, const Vector&, Vector& out) override {
    const int N = plan_->N;
    elim_.reduced_rhs(rhs, ry_);
    // spectral solve: y = V [ (V r V) * (2/(N+1))^2 / denom ] V
    matmul(N, plan_->V.data(), ry_.data(), t1_.data());
    matmul(N, t1_.data(), plan_->V.data(), t2_.data());
    const double scale = 4.0 / (double(N + 1) * double(N + 1));
    for (std::size_t i = 0; i < t2_.size(); ++i) t2_[i] *= scale / denom_[i];
    matmul(N, plan_->V.data(), t2_.data(), t1_.data());
    matmul(N, t1_.data(), plan_->V.data(), y_.data());
    elim_.recover_control(rhs, y_, out);
  }

  double last_relative_residual() const override { return 0.0; }

 private:
  FdElimination elim_;
  std::shared_ptr<const DstPlan> plan_;
  Vector denom_, t1_, t2_, ry_, y_;
};

// Banded Cholesky of a I + c_hat L^T L (bandwidth 2N); handles the upwind
// convection-diffusion operator, whose L is nonsymmetric.
class BandedXStep final : public XStepSolver {
 public:
  BandedXStep(const QpInstance& inst, double sigma, double sigma_hat)
      : elim_(inst, sigma, sigma_hat), kd_(2 * inst.grid_n) {
    const int ny = elim_.ny;
    band_.assign(std::size_t(ny) * (kd_ + 1), 0.0);
    // assemble c_hat * L^T L into lower-band column storage
    const SparseMatrix& L = elim_.L;
    for (int r = 0; r < L.rows; ++r) {
      for (int p = L.row_ptr[r]; p < L.row_ptr[std::size_t(r) + 1]; ++p) {
        const int cp = L.col_idx[std::size_t(p)];
        const double vp = L.values[std::size_t(p)];
        for (int q = L.row_ptr[r]; q < L.row_ptr[std::size_t(r) + 1]; ++q) {
          const int cq = L.col_idx[std::size_t(q)];
          if (cp < cq) continue;
          band_[std::size_t(cq) * (kd_ + 1) + (cp - cq)] +=
              elim_.c_hat * vp * L.values[std::size_t(q)];
        }
      }
    }
    for (int j = 0; j < ny; ++j) band_[std::size_t(j) * (kd_ + 1)] += elim_.a;
    factor(ny);
  }

  void solve(const Vector& rhs, const Vector&, Vector& out) override {
    const int ny = elim_.ny;
    elim_.reduced_rhs(rhs, ry_);
    // L L^T y = r: forward then backward banded substitution
    for (int j = 0; j < ny; ++j) {
      const double* col = band_.data() + std::size_t(j) * (kd_ + 1);
      ry_[std::size_t(j)] /= col[0];
      const double val = ry_[std::size_t(j)];
      const int iend = std::min(ny - 1, j + kd_);
      for (int i = j + 1; i <= iend; ++i) ry_[std::size_t(i)] -= col[i - j] * val;
    }
    for (int j = ny - 1; j >= 0; --j) {
      const double* col = band_.data() + std::size_t(j) * (kd_ + 1);
      double s = ry_[std::size_t(j)];
      const int iend = std::min(ny - 1, j + kd_);
      for (int i = j + 1; i <= iend; ++i) s -= col[i - j] * ry_[std::size_t(i)];
      ry_[std::size_t(j)] = s / col[0];
    }
    elim_.recover_control(rhs, ry_, out);
  }

  double last_relative_residual() const override { return 0.0; }

 private:
  void factor(int ny) {
    for (int j = 0; j < ny; ++j) {
      double* colj = band_.data() + std::size_t(j) * (kd_ + 1);
      const int kstart = std::max(0, j - kd_);
      for (int k = kstart; k < j; ++k) {
        const double* colk = band_.data() + std::size_t(k) * (kd_ + 1);
        const double ljk = colk[j - k];
        if (ljk == 0.0) continue;
        const int iend = std::min(ny - 1, k + kd_);
        for (int i = j; i <= iend; ++i) colj[i - j] -= ljk * colk[i - k];
      }
      if (!(colj[0] > 0.0))
        throw std::runtime_error("BandedXStep: factorization broke down");
      colj[0] = std::sqrt(colj[0]);
      const int iend = std::min(ny - 1, j + kd_);
      for (int i = j + 1; i <= iend; ++i) colj[i - j] /= colj[0];
    }
  }

  FdElimination elim_;
  int kd_ = 0;
  std::vector<double> band_;
  Vector ry_;
};

// Jacobi-preconditioned CG on the implicit operator; no n x n matrix is
// formed, only Diag(Q), sigma_hat, and products with A / A^T.
class CgXStep final : public XStepSolver {
 public:
  CgXStep(const QpInstance& inst, double sigma, double sigma_hat, double tol,
          std::int64_t max_iters)
      : inst_(inst), sigma_(sigma), shift_(sigma_hat + sigma), tol_(tol) {
    const int n = inst.n();
    max_iters_ = max_iters > 0 ? max_iters : std::max<std::int64_t>(10 * n, 2000);
    precond_ = inst.A.column_squared_norms();
    for (int i = 0; i < n; ++i)
      precond_[std::size_t(i)] = inst.q_diag[std::size_t(i)] + shift_ +
                                 sigma_ * precond_[std::size_t(i)];
    tmp_m_.resize(inst.m());
    op_.resize(n);
  }

  void apply(const Vector& x, Vector& out) {
    inst_.A.multiply(x.data(), tmp_m_.data());
    inst_.A.multiply_transpose(tmp_m_.data(), out.data());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = inst_.q_diag[i] * x[i] + shift_ * x[i] + sigma_ * out[i];
  }

  void solve(const Vector& rhs, const Vector& warm, Vector& out) override {
    const int n = inst_.n();
    const double rhs_norm = nrm2(rhs);
    if (rhs_norm == 0.0) {
      out.assign(std::size_t(n), 0.0);
      last_rel_ = 0.0;
      return;
    }
    Vector x = warm.empty() ? Vector(std::size_t(n), 0.0) : warm;
    Vector r(std::size_t(n), 0.0), z(std::size_t(n), 0.0), p(std::size_t(n), 0.0);
    apply(x, op_);
    for (int i = 0; i < n; ++i) r[std::size_t(i)] = rhs[std::size_t(i)] - op_[std::size_t(i)];
    for (int i = 0; i < n; ++i) z[std::size_t(i)] = r[std::size_t(i)] / precond_[std::size_t(i)];
    p = z;
    double rz = dot(r, z);
    for (std::int64_t it = 0; it < max_iters_; ++it) {
      last_rel_ = nrm2(r) / rhs_norm;
      if (last_rel_ <= tol_) {
        out = x;
        return;
      }
      apply(p, op_);
      const double alpha = rz / dot(p, op_);
      axpy(alpha, p, x);
      axpy(-alpha, op_, r);
      for (int i = 0; i < n; ++i) z[std::size_t(i)] = r[std::size_t(i)] / precond_[std::size_t(i)];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < n; ++i) p[std::size_t(i)] = z[std::size_t(i)] + beta * p[std::size_t(i)];
    }
    last_rel_ = nrm2(r) / rhs_norm;
    throw std::runtime_error("CgXStep: no convergence, relative residual " +
                             std::to_string(last_rel_));
  }

  double last_relative_residual() const override { return last_rel_; }

 private:
  const QpInstance& inst_;
  double sigma_, shift_, tol_;
  std::int64_t max_iters_ = 0;
  Vector precond_, tmp_m_, op_;
  double last_rel_ = 0.0;
};

}  // namespace

double default_sigma_hat(const QpInstance& inst) {
  double worst = 0.0;
  const SparseMatrix& off = inst.q_off;
  for (int r = 0; r < off.rows; ++r) {
    double s = 0.0;
    for (int k = off.row_ptr[r]; k < off.row_ptr[std::size_t(r) + 1]; ++k)
      if (off.col_idx[std::size_t(k)] != r) s += std::fabs(off.values[std::size_t(k)]);
    worst = std::max(worst, s);
  }
  return std::max(1.01 * worst, 1e-6);
}

std::unique_ptr<XStepSolver> make_x_step_solver(const QpInstance& inst, double sigma,
                                                double sigma_hat, double linsolve_tol,
                                                XStepMethod method,
                                                std::int64_t cg_max_iters) {
  XStepMethod m = method;
  if (m == XStepMethod::Auto) {
    switch (inst.structure) {
      case QpStructure::FdPoisson: m = XStepMethod::FastPoisson; break;
      case QpStructure::FdConvectionDiffusion: m = XStepMethod::BandedCholesky; break;
      case QpStructure::General: m = XStepMethod::ConjugateGradient; break;
    }
  }
  switch (m) {
    case XStepMethod::FastPoisson:
      if (inst.structure != QpStructure::FdPoisson)
        throw std::invalid_argument("FastPoisson x-step needs a Poisson FD instance");
      return std::make_unique<FastPoissonXStep>(inst, sigma, sigma_hat);
    case XStepMethod::BandedCholesky:
      if (inst.structure == QpStructure::General)
        throw std::invalid_argument("BandedCholesky x-step needs an FD instance");
      return std::make_unique<BandedXStep>(inst, sigma, sigma_hat);
    case XStepMethod::ConjugateGradient:
    default:
      return std::make_unique<CgXStep>(inst, sigma, sigma_hat, linsolve_tol, cg_max_iters);
  }
}

PadmmState make_padmm_state(const QpInstance& inst) {
  PadmmState s;
  s.x.assign(std::size_t(inst.n()), 0.0);
  s.w.assign(std::size_t(inst.n()), 0.0);
  s.y1.assign(std::size_t(inst.m()), 0.0);
  s.y2.assign(std::size_t(inst.n()), 0.0);
  return s;
}

void compute_residuals(const QpInstance& inst, PadmmState& state) {
  const Vector Ax = inst.A.multiply(state.x);
  double eq = 0.0;
  for (std::size_t i = 0; i < Ax.size(); ++i) {
    const double d = Ax[i] - inst.b[i];
    eq += d * d;
  }
  eq = std::sqrt(eq) / (1.0 + nrm2(inst.b));
  const double coupling = nrm2(vec_sub(state.w, state.x)) / (1.0 + nrm2(state.x));

  Vector grad = inst.q_off.multiply(state.x);
  const Vector Aty = inst.A.multiply_transpose(state.y1);
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad[i] += inst.c[i] + inst.q_diag[i] * state.x[i] - Aty[i] + state.y2[i];
  const double dual = nrm2(grad) / (1.0 + nrm2(inst.c));

  state.primal_residual = std::max(eq, coupling);
  state.dual_residual = dual;
  state.scaled_residual = std::max(state.primal_residual, dual);
}

namespace {

void validate_config(const PadmmConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("padmm: sigma must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma < kGammaUpper))
    throw std::invalid_argument("padmm: gamma must lie in (0, (1+sqrt(5))/2)");
}

struct PadmmDriver {
  const QpInstance& inst;
  const PadmmConfig& cfg;
  double sigma_hat;
  std::unique_ptr<XStepSolver> solver;
  Vector rhs, w_arg, atb, aty, offx, x_new;

  PadmmDriver(const QpInstance& inst_, const PadmmConfig& cfg_)
      : inst(inst_), cfg(cfg_) {
    validate_config(cfg);
    inst.box.validate();
    sigma_hat = cfg.sigma_hat > 0.0 ? cfg.sigma_hat : default_sigma_hat(inst);
    solver = make_x_step_solver(inst, cfg.sigma, sigma_hat, cfg.linsolve_tol, cfg.x_step,
                                cfg.cg_max_iters);
    atb = inst.A.multiply_transpose(inst.b);
    rhs.resize(std::size_t(inst.n()));
    w_arg.resize(std::size_t(inst.n()));
    aty.resize(std::size_t(inst.n()));
  }

  void sweep(PadmmState& state) {
    const double sigma = cfg.sigma;
    const int n = inst.n();
    for (int i = 0; i < n; ++i)
      w_arg[std::size_t(i)] = state.x[std::size_t(i)] + state.y2[std::size_t(i)] / sigma;
    state.w = prox_box_soft_threshold(w_arg, inst.d_weights, 1.0 / sigma, inst.box);

    inst.A.multiply_transpose(state.y1.data(), aty.data());
    offx = inst.q_off.multiply(state.x);
    for (int i = 0; i < n; ++i)
      rhs[std::size_t(i)] = -inst.c[std::size_t(i)] + aty[std::size_t(i)] -
                            state.y2[std::size_t(i)] + sigma * atb[std::size_t(i)] +
                            sigma * state.w[std::size_t(i)] +
                            sigma_hat * state.x[std::size_t(i)] - offx[std::size_t(i)];
    solver->solve(rhs, state.x, x_new);
    state.x = x_new;

    const Vector Ax = inst.A.multiply(state.x);
    const double step = cfg.gamma * sigma;
    for (int i = 0; i < inst.m(); ++i)
      state.y1[std::size_t(i)] -= step * (Ax[std::size_t(i)] - inst.b[std::size_t(i)]);
    for (int i = 0; i < n; ++i)
      state.y2[std::size_t(i)] -= step * (state.w[std::size_t(i)] - state.x[std::size_t(i)]);
    ++state.iter;
    compute_residuals(inst, state);
  }
};

}  // namespace

PadmmState padmm_step(const QpInstance& inst, const PadmmState& state,
                      const PadmmConfig& cfg) {
  PadmmDriver driver(inst, cfg);
  PadmmState next = state;
  driver.sweep(next);
  return next;
}

PadmmRun run_padmm(const QpInstance& inst, const PadmmConfig& cfg, const Vector& x_start) {
  if (int(x_start.size()) != inst.n())
    throw std::invalid_argument("run_padmm: x_start dimension mismatch");
  PadmmDriver driver(inst, cfg);
  PadmmRun run;
  run.state = make_padmm_state(inst);
  run.state.x = x_start;
  compute_residuals(inst, run.state);
  run.history.push_back({0, run.state.primal_residual, run.state.dual_residual,
                         run.state.scaled_residual});
  for (std::int64_t it = 1; it <= cfg.max_iters; ++it) {
    driver.sweep(run.state);
    run.history.push_back({it, run.state.primal_residual, run.state.dual_residual,
                           run.state.scaled_residual});
    if (run.state.scaled_residual <= cfg.residual_tol) break;
  }
  return run;
}

PadmmRun run_padmm(const QpInstance& inst, const PadmmConfig& cfg) {
  return run_padmm(inst, cfg, Vector(std::size_t(inst.n()), 0.0));
}

double residual_reduction(const QpInstance& inst, double sigma, std::int64_t k,
                          const PadmmConfig& base) {
  if (k < 0) throw std::invalid_argument("residual_reduction: k >= 0 required");
  PadmmConfig cfg = base;
  cfg.sigma = sigma;
  cfg.max_iters = k;
  cfg.residual_tol = 0.0;  // run exactly k sweeps
  PadmmRun run = run_padmm(inst, cfg);
  const double initial = run.history.front().scaled;
  if (!(initial > 0.0))
    throw std::runtime_error("residual_reduction: zero initial residual");
  return run.history.back().scaled / initial;
}

void write_residual_csv(const std::vector<ResidualRecord>& history,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_residual_csv: cannot open " + path);
  out << "iteration,primal,dual,scaled\n";
  char buf[128];
  for (const ResidualRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.iteration), r.primal, r.dual, r.scaled);
    out << buf;
  }
}

}  // namespace zoprox
