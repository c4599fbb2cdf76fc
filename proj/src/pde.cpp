#include "zoprox/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <tuple>

namespace zoprox {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SparseMatrix SparseMatrix::zero(int rows, int cols) {
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(std::size_t(rows) + 1, 0);
  return m;
}

SparseMatrix SparseMatrix::from_triplets(
    int rows, int cols, const std::vector<std::tuple<int, int, double>>& ts) {
  std::vector<std::tuple<int, int, double>> sorted = ts;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  SparseMatrix m = zero(rows, cols);
  m.col_idx.reserve(sorted.size());
  m.values.reserve(sorted.size());
  int prev_r = -1, prev_c = -1;
  for (const auto& [r, c, v] : sorted) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw std::invalid_argument("from_triplets: index out of range");
    if (r == prev_r && c == prev_c) {
      m.values.back() += v;  // accumulate duplicates
    } else {
      m.col_idx.push_back(c);
      m.values.push_back(v);
      ++m.row_ptr[std::size_t(r) + 1];
      prev_r = r;
      prev_c = c;
    }
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[std::size_t(r) + 1] += m.row_ptr[std::size_t(r)];
  return m;
}

void SparseMatrix::multiply(const double* x, double* y) const {
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[std::size_t(r) + 1]; ++k)
      s += values[std::size_t(k)] * x[col_idx[std::size_t(k)]];
    y[r] = s;
  }
}

void SparseMatrix::multiply_transpose(const double* x, double* y) const {
  std::fill(y, y + cols, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[std::size_t(r) + 1]; ++k)
      y[col_idx[std::size_t(k)]] += values[std::size_t(k)] * x[r];
}

Vector SparseMatrix::multiply(const Vector& x) const {
  if (int(x.size()) != cols) throw std::invalid_argument("SparseMatrix: size mismatch");
  Vector y(rows);
  multiply(x.data(), y.data());
  return y;
}

Vector SparseMatrix::multiply_transpose(const Vector& x) const {
  if (int(x.size()) != rows) throw std::invalid_argument("SparseMatrix: size mismatch");
  Vector y(cols);
  multiply_transpose(x.data(), y.data());
  return y;
}

Vector SparseMatrix::column_squared_norms() const {
  Vector out(cols, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[std::size_t(r) + 1]; ++k)
      out[col_idx[std::size_t(k)]] += values[std::size_t(k)] * values[std::size_t(k)];
  return out;
}

SparseMatrix SparseMatrix::submatrix_cols(int col_begin, int col_end) const {
  SparseMatrix m = zero(rows, col_end - col_begin);
  for (int r = 0; r < rows; ++r) {
    for (int k = row_ptr[r]; k < row_ptr[std::size_t(r) + 1]; ++k) {
      const int c = col_idx[std::size_t(k)];
      if (c >= col_begin && c < col_end) {
        m.col_idx.push_back(c - col_begin);
        m.values.push_back(values[std::size_t(k)]);
        ++m.row_ptr[std::size_t(r) + 1];
      }
    }
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[std::size_t(r) + 1] += m.row_ptr[std::size_t(r)];
  return m;
}

void save_coo(const SparseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_coo: cannot open " + path);
  out << m.rows << " " << m.cols << " " << m.nnz() << "\n";
  char buf[40];
  for (int r = 0; r < m.rows; ++r)
    for (int k = m.row_ptr[r]; k < m.row_ptr[std::size_t(r) + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values[std::size_t(k)]);
      out << r << " " << m.col_idx[std::size_t(k)] << " " << buf << "\n";
    }
}

SparseMatrix load_coo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_coo: cannot open " + path);
  int rows = 0, cols = 0;
  std::int64_t nnz = 0;
  in >> rows >> cols >> nnz;
  std::vector<std::tuple<int, int, double>> ts;
  ts.reserve(std::size_t(nnz));
  for (std::int64_t k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    in >> r >> c >> v;
    ts.emplace_back(r, c, v);
  }
  if (!in) throw std::runtime_error("load_coo: truncated file " + path);
  return SparseMatrix::from_triplets(rows, cols, ts);
}

// ---- discretization ------------------------------------------------------------

double desired_state(const PdeSpec& spec, int i, int j) {
  const double h = 1.0 / double(spec.grid_n + 1);
  const double x1 = i * h, x2 = j * h;
  if (spec.equation == PdeEquation::Poisson)
    return std::sin(kPi * x1) * std::sin(kPi * x2);
  const double dx = x1 - 0.5, dy = x2 - 0.5;
  return std::exp(-64.0 * (dx * dx + dy * dy));
}

QpInstance assemble(const PdeSpec& spec) {
  const int N = spec.grid_n;
  if (N < 3) throw std::invalid_argument("assemble: grid_n >= 3 required");
  if (!(spec.control_lower < spec.control_upper))
    throw std::invalid_argument("assemble: control bounds out of order");
  if (spec.equation == PdeEquation::ConvectionDiffusion && !(spec.diffusion_eps > 0.0))
    throw std::invalid_argument("assemble: diffusion_eps must be positive");

  const double h = 1.0 / double(N + 1);
  const double ih2 = 1.0 / (h * h);
  const int ny = N * N;
  const int n = 2 * ny;
  const bool poisson = spec.equation == PdeEquation::Poisson;
  const double eps = poisson ? 1.0 : spec.diffusion_eps;

  auto idx = [N](int i, int j) { return (j - 1) * N + (i - 1); };  // i, j in 1..N

  std::vector<std::tuple<int, int, double>> ts;
  ts.reserve(std::size_t(ny) * 6);
  for (int j = 1; j <= N; ++j) {
    for (int i = 1; i <= N; ++i) {
      const int row = idx(i, j);
      double w1 = 0.0, w2 = 0.0;
      if (!poisson) {
        const double x1 = i * h, x2 = j * h;
        w1 = 2.0 * x2 * (1.0 - x1) * (1.0 - x1);
        w2 = -2.0 * x1 * (1.0 - x2 * x2);
      }
      // diffusion stencil plus first-order upwind convection
      ts.emplace_back(row, row, 4.0 * eps * ih2 + (std::fabs(w1) + std::fabs(w2)) / h);
      if (i > 1) ts.emplace_back(row, idx(i - 1, j), -eps * ih2 - std::max(w1, 0.0) / h);
      if (i < N) ts.emplace_back(row, idx(i + 1, j), -eps * ih2 - std::max(-w1, 0.0) / h);
      if (j > 1) ts.emplace_back(row, idx(i, j - 1), -eps * ih2 - std::max(w2, 0.0) / h);
      if (j < N) ts.emplace_back(row, idx(i, j + 1), -eps * ih2 - std::max(-w2, 0.0) / h);
      // control coupling, A = [L, -I]
      ts.emplace_back(row, ny + row, -1.0);
    }
  }

  QpInstance inst;
  inst.A = SparseMatrix::from_triplets(ny, n, ts);
  inst.b.assign(ny, 0.0);  // zero Dirichlet data and zero source
  inst.c.assign(n, 0.0);
  inst.q_diag.assign(n, 0.0);
  inst.d_weights.assign(n, 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  inst.box.lower.assign(n, -inf);
  inst.box.upper.assign(n, inf);
  for (int j = 1; j <= N; ++j)
    for (int i = 1; i <= N; ++i) {
      const int k = idx(i, j);
      inst.c[k] = -h * h * desired_state(spec, i, j);
      inst.q_diag[k] = h * h;
      inst.q_diag[ny + k] = spec.beta2 * h * h;
      inst.d_weights[ny + k] = 0.5 * spec.beta1 * h * h;
      inst.box.lower[ny + k] = spec.control_lower;
      inst.box.upper[ny + k] = spec.control_upper;
    }
  inst.q_off = SparseMatrix::zero(n, n);
  inst.structure = poisson ? QpStructure::FdPoisson : QpStructure::FdConvectionDiffusion;
  inst.grid_n = N;
  inst.h = h;
  return inst;
}

// ---- samplers --------------------------------------------------------------------

void InstanceSampler::cap_grid(int max_n) {
  auto trim = [max_n](std::vector<int>& v) {
    v.erase(std::remove_if(v.begin(), v.end(), [max_n](int n) { return n > max_n; }), v.end());
    if (v.empty()) throw std::invalid_argument("InstanceSampler: cap removed every size");
  };
  trim(size_set);
  trim(holdout_size_set);
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& pool, RngStream& stream) {
  if (pool.empty()) throw std::invalid_argument("InstanceSampler: empty pool");
  std::size_t i = std::size_t(stream.next_uniform() * double(pool.size()));
  if (i >= pool.size()) i = pool.size() - 1;
  return pool[i];
}

}  // namespace

std::pair<PdeSpec, QpInstance> sample_training_instance(const InstanceSampler& sampler,
                                                        RngStream& stream) {
  PdeSpec spec;
  spec.equation = sampler.equation;
  spec.beta1 = pick(sampler.beta1_set, stream);
  spec.beta2 = pick(sampler.beta2_set, stream);
  spec.grid_n = pick(sampler.size_set, stream);
  return {spec, assemble(spec)};
}

std::pair<PdeSpec, QpInstance> sample_holdout_instance(const InstanceSampler& sampler,
                                                       RngStream& stream) {
  PdeSpec spec;
  spec.equation = sampler.equation;
  spec.beta1 = pick(sampler.holdout_beta1_set, stream);
  spec.beta2 = pick(sampler.holdout_beta2_set, stream);
  spec.grid_n = pick(sampler.holdout_size_set, stream);
  return {spec, assemble(spec)};
}

}  // namespace zoprox
