#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "reference_qp.hpp"
#include "zoprox/padmm.hpp"
#include "zoprox/pde.hpp"
#include "zoprox/smoothing.hpp"

using namespace zoprox;

namespace {

// tiny equality-constrained QP with a dense random Q (exercises the Off(Q) path)
QpInstance dense_instance(int n, int m, std::uint64_t seed) {
  RngStream s = make_stream(seed);
  std::vector<double> root(std::size_t(n) * n);
  for (double& v : root) v = s.next_normal();
  // Q = root^T root + I, split into diagonal and strict off-diagonal parts
  std::vector<double> q(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += root[std::size_t(k) * n + i] * root[std::size_t(k) * n + j];
      q[std::size_t(i) * n + j] = acc + (i == j ? 1.0 : 0.0);
    }
  QpInstance inst;
  inst.q_diag.resize(n);
  std::vector<std::tuple<int, int, double>> off;
  for (int i = 0; i < n; ++i) {
    inst.q_diag[std::size_t(i)] = q[std::size_t(i) * n + i];
    for (int j = 0; j < n; ++j)
      if (i != j) off.emplace_back(i, j, q[std::size_t(i) * n + j]);
  }
  inst.q_off = SparseMatrix::from_triplets(n, n, off);
  std::vector<std::tuple<int, int, double>> a_entries;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) a_entries.emplace_back(r, c, s.next_normal());
  inst.A = SparseMatrix::from_triplets(m, n, a_entries);
  inst.b.resize(m);
  for (double& v : inst.b) v = s.next_normal();
  inst.c.resize(n);
  for (double& v : inst.c) v = s.next_normal();
  inst.d_weights.assign(n, 0.0);
  inst.box = BoxSet::unbounded(n);
  inst.structure = QpStructure::General;
  return inst;
}

QpInstance one_dim_toy() {
  QpInstance inst;
  inst.c = {0.0};
  inst.q_diag = {0.0};
  inst.q_off = SparseMatrix::zero(1, 1);
  inst.A = SparseMatrix::from_triplets(1, 1, {{0, 0, 1.0}});
  inst.b = {1.0};
  inst.d_weights = {0.0};
  inst.box = BoxSet::unbounded(1);
  inst.structure = QpStructure::General;
  return inst;
}

}  // namespace

TEST_CASE("sigma_hat default covers the off-diagonal mass") {
  PdeSpec spec;
  spec.grid_n = 5;
  QpInstance fd = assemble(spec);
  CHECK(default_sigma_hat(fd) == doctest::Approx(1e-6));  // diagonal Q -> floor

  QpInstance dense = dense_instance(6, 2, 11);
  const double sh = default_sigma_hat(dense);
  CHECK(sh > 1e-6);

  // R_x = sigma_hat I - Off(Q) stays positive definite: unit-vector quadratic forms
  RngStream s = make_stream(12);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v = sample_standard_normal(s, 6);
    const double norm = nrm2(v);
    for (double& e : v) e /= norm;
    Vector off_v = dense.q_off.multiply(v);
    const double quad = sh * dot(v, v) - dot(v, off_v);
    CHECK(quad >= 1e-10);
  }
}

TEST_CASE("gamma outside the admissible interval is rejected") {
  QpInstance toy = one_dim_toy();
  PadmmConfig cfg;
  cfg.gamma = 1.6181;  // just above (1+sqrt(5))/2
  CHECK_THROWS_AS((void)run_padmm(toy, cfg), std::invalid_argument);
  cfg.gamma = 0.0;
  CHECK_THROWS_AS((void)run_padmm(toy, cfg), std::invalid_argument);
  cfg.gamma = 1.618;
  cfg.sigma = -1.0;
  CHECK_THROWS_AS((void)run_padmm(toy, cfg), std::invalid_argument);
}

TEST_CASE("pADMM solves the 1-D feasibility toy") {
  QpInstance toy = one_dim_toy();
  PadmmConfig cfg;
  cfg.sigma = 1.0;
  cfg.residual_tol = 1e-10;
  cfg.max_iters = 2000;
  PadmmRun run = run_padmm(toy, cfg);
  CHECK(run.state.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(run.state.w[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(run.state.scaled_residual <= 1e-10);
}

TEST_CASE("a KKT point is a fixed point of the sweep") {
  QpInstance inst = dense_instance(6, 2, 21);
  testsupport::KktSolution kkt = testsupport::dense_kkt_solve(inst);

  PadmmState state = make_padmm_state(inst);
  state.x = kkt.x;
  state.w = kkt.x;
  state.y1 = kkt.y1;
  state.y2.assign(6, 0.0);  // free box, zero shrinkage -> zero coupling multiplier

  PadmmConfig cfg;
  cfg.sigma = 0.8;
  PadmmState next = padmm_step(inst, state, cfg);
  CHECK(nrm2(vec_sub(next.x, state.x)) <= 1e-7);
  CHECK(nrm2(vec_sub(next.w, state.w)) <= 1e-7);
  CHECK(nrm2(vec_sub(next.y1, state.y1)) <= 1e-7);
  CHECK(nrm2(vec_sub(next.y2, state.y2)) <= 1e-7);
}

TEST_CASE("x-update satisfies its subproblem optimality condition") {
  PdeSpec spec;
  spec.grid_n = 5;
  spec.beta1 = 1e-2;
  spec.beta2 = 1e-4;
  QpInstance inst = assemble(spec);
  PadmmConfig cfg;
  cfg.sigma = 0.5;
  cfg.x_step = XStepMethod::ConjugateGradient;

  PadmmState state = make_padmm_state(inst);
  // advance a few sweeps from zero before probing the condition
  for (int i = 0; i < 3; ++i) state = padmm_step(inst, state, cfg);
  PadmmState before = state;
  PadmmState after = padmm_step(inst, state, cfg);

  // gradient of the x-subproblem at the accepted x, with R_x = sigma_hat I;
  // the subproblem sees the pre-update multipliers
  const double sigma_hat = default_sigma_hat(inst);
  Vector grad = inst.A.multiply_transpose(before.y1);
  for (double& v : grad) v = -v;
  Vector ax = inst.A.multiply(after.x);
  for (int i = 0; i < inst.m(); ++i) ax[std::size_t(i)] -= inst.b[std::size_t(i)];
  Vector at_ax_b(std::size_t(inst.n()), 0.0);
  inst.A.multiply_transpose(ax.data(), at_ax_b.data());
  double rhs_scale = 0.0;
  for (int i = 0; i < inst.n(); ++i) {
    grad[std::size_t(i)] += inst.c[std::size_t(i)] + inst.q_diag[std::size_t(i)] * after.x[std::size_t(i)] +
                            before.y2[std::size_t(i)] + cfg.sigma * at_ax_b[std::size_t(i)] -
                            cfg.sigma * (after.w[std::size_t(i)] - after.x[std::size_t(i)]) +
                            sigma_hat * (after.x[std::size_t(i)] - before.x[std::size_t(i)]);
    rhs_scale = std::max(rhs_scale, std::fabs(inst.c[std::size_t(i)]));
  }
  CHECK(nrm2(grad) <= cfg.linsolve_tol * (1.0 + rhs_scale) * 100.0 + 1e-8);
}

TEST_CASE("w-update is the exact prox of its subproblem") {
  PdeSpec spec;
  spec.grid_n = 5;
  spec.beta1 = 1e-2;
  QpInstance inst = assemble(spec);
  PadmmConfig cfg;
  cfg.sigma = 0.7;
  PadmmState state = make_padmm_state(inst);
  for (int i = 0; i < 2; ++i) state = padmm_step(inst, state, cfg);
  PadmmState before = state;
  PadmmState after = padmm_step(inst, state, cfg);

  CHECK(inst.box.contains(after.w, 1e-12));
  // subgradient inclusion per coordinate: sigma (v - w) in d d|.|(w) + N_box(w)
  for (int i = 0; i < inst.n(); ++i) {
    const double v = before.x[std::size_t(i)] + before.y2[std::size_t(i)] / cfg.sigma;
    const double w = after.w[std::size_t(i)];
    const double d = inst.d_weights[std::size_t(i)];
    const double lo = inst.box.lower[std::size_t(i)], hi = inst.box.upper[std::size_t(i)];
    const double slack = cfg.sigma * (v - w);
    if (w > lo + 1e-12 && w < hi - 1e-12) {
      if (w > 1e-12) CHECK(slack == doctest::Approx(d).epsilon(1e-9));
      else if (w < -1e-12) CHECK(slack == doctest::Approx(-d).epsilon(1e-9));
      else CHECK(std::fabs(slack) <= d + 1e-12);
    } else if (w >= hi - 1e-12) {
      CHECK(slack >= d - 1e-9);
    } else {
      CHECK(slack <= -d + 1e-9);
    }
  }
}

TEST_CASE("x-step backends agree on FD instances") {
  for (PdeEquation eq : {PdeEquation::Poisson, PdeEquation::ConvectionDiffusion}) {
    PdeSpec spec;
    spec.equation = eq;
    spec.grid_n = 9;
    spec.beta1 = 1e-2;
    spec.beta2 = 1e-4;
    QpInstance inst = assemble(spec);
    RngStream s = make_stream(31);
    Vector rhs = sample_standard_normal(s, inst.n());
    Vector warm(std::size_t(inst.n()), 0.0);

    Vector x_cg, x_band;
    auto cg = make_x_step_solver(inst, 0.6, 1e-6, 1e-12, XStepMethod::ConjugateGradient);
    cg->solve(rhs, warm, x_cg);
    auto band = make_x_step_solver(inst, 0.6, 1e-6, 1e-12, XStepMethod::BandedCholesky);
    band->solve(rhs, warm, x_band);
    CHECK(nrm2(vec_sub(x_cg, x_band)) <= 1e-8 * (1.0 + nrm2(x_cg)));

    if (eq == PdeEquation::Poisson) {
      Vector x_dst;
      auto dst = make_x_step_solver(inst, 0.6, 1e-6, 1e-12, XStepMethod::FastPoisson);
      dst->solve(rhs, warm, x_dst);
      CHECK(nrm2(vec_sub(x_dst, x_band)) <= 1e-10 * (1.0 + nrm2(x_dst)));
    } else {
      CHECK_THROWS_AS((void)make_x_step_solver(inst, 0.6, 1e-6, 1e-12, XStepMethod::FastPoisson),
                      std::invalid_argument);
    }
  }
}

TEST_CASE("cg x-step reports non-convergence with its residual") {
  QpInstance inst = dense_instance(8, 3, 77);
  auto cg = make_x_step_solver(inst, 1.0, default_sigma_hat(inst), 1e-14,
                               XStepMethod::ConjugateGradient, 1);
  RngStream s = make_stream(5);
  Vector rhs = sample_standard_normal(s, 8), warm(8, 0.0), out;
  CHECK_THROWS_AS(cg->solve(rhs, warm, out), std::runtime_error);
}

TEST_CASE("smallest poisson instance converges within the iteration budget") {
  PdeSpec spec;
  spec.grid_n = 9;
  spec.beta1 = 1e-2;
  spec.beta2 = 1e-2;
  QpInstance inst = assemble(spec);
  PadmmConfig cfg;
  cfg.sigma = 0.2778;
  cfg.residual_tol = 1e-6;
  cfg.max_iters = 5000;
  PadmmRun run = run_padmm(inst, cfg);
  CHECK(run.state.scaled_residual <= 1e-6);
  CHECK(run.state.iter <= 5000);
  CHECK(run.history.front().iteration == 0);
  CHECK(run.history.front().scaled > 0.0);
}

TEST_CASE("coarse residual decrease holds across the sigma range") {
  for (PdeEquation eq : {PdeEquation::Poisson, PdeEquation::ConvectionDiffusion}) {
    PdeSpec spec;
    spec.equation = eq;
    spec.grid_n = 9;
    spec.beta1 = 1e-4;
    spec.beta2 = 1e-2;
    QpInstance inst = assemble(spec);
    for (double sigma : {0.05, 0.3, 1.0, 5.0}) {
      PadmmConfig cfg;
      cfg.sigma = sigma;
      cfg.residual_tol = 0.0;
      cfg.max_iters = 200;
      PadmmRun run = run_padmm(inst, cfg);
      CHECK(run.history.back().scaled < run.history.front().scaled);
    }
  }
}

TEST_CASE("pADMM matches the independent reference solve") {
  for (PdeEquation eq : {PdeEquation::Poisson, PdeEquation::ConvectionDiffusion}) {
    PdeSpec spec;
    spec.equation = eq;
    spec.grid_n = 9;
    spec.beta1 = 1e-2;
    spec.beta2 = 1e-4;
    QpInstance inst = assemble(spec);
    PadmmConfig cfg;
    cfg.sigma = 1.0;
    cfg.residual_tol = 1e-9;
    cfg.max_iters = 60000;
    PadmmRun run = run_padmm(inst, cfg);
    Vector u(run.state.w.begin() + inst.n() / 2, run.state.w.end());
    const double obj = testsupport::reduced_objective_at(inst, u);
    testsupport::ReferenceSolution ref = testsupport::reference_solve(inst);
    CHECK(obj <= ref.objective + 1e-5 * std::max(1.0, std::fabs(ref.objective)));
    CHECK(obj >= ref.objective - 1e-7);
  }
}

TEST_CASE("residual reduction is one at k = 0 and finite over the training pool") {
  PdeSpec spec;
  spec.grid_n = 9;
  QpInstance inst = assemble(spec);
  PadmmConfig base;
  CHECK(residual_reduction(inst, 1.0, 0, base) == doctest::Approx(1.0));

  InstanceSampler sampler;
  int count = 0;
  for (double b1 : sampler.beta1_set)
    for (double b2 : sampler.beta2_set)
      for (int n : sampler.size_set) {
        PdeSpec s2;
        s2.beta1 = b1;
        s2.beta2 = b2;
        s2.grid_n = n;
        const double red = residual_reduction(assemble(s2), 1.0, 15, base);
        CHECK(red >= 0.0);
        CHECK(red < 10.0);
        ++count;
      }
  CHECK(count == 80);
}

TEST_CASE("residual history CSV carries the fixed schema") {
  QpInstance toy = one_dim_toy();
  PadmmConfig cfg;
  cfg.max_iters = 3;
  cfg.residual_tol = 0.0;
  PadmmRun run = run_padmm(toy, cfg);
  const std::string path =
      (std::filesystem::temp_directory_path() / "zoprox_hist.csv").string();
  write_residual_csv(run.history, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,primal,dual,scaled");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);  // entry 0 plus three sweeps
  std::filesystem::remove(path);
}

TEST_CASE("padmm rejects inconsistent start dimensions") {
  QpInstance toy = one_dim_toy();
  PadmmConfig cfg;
  CHECK_THROWS_AS((void)run_padmm(toy, cfg, Vector{1.0, 2.0}), std::invalid_argument);
}
