#pragma once

#include <string>
#include <utility>

#include "zoprox/core.hpp"
#include "zoprox/prox.hpp"

namespace zoprox {

// ---- sparse matrices -----------------------------------------------------------

struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;   // size rows + 1
  std::vector<int> col_idx;
  std::vector<double> values;

  static SparseMatrix zero(int rows, int cols);
  static SparseMatrix from_triplets(int rows, int cols,
                                    const std::vector<std::tuple<int, int, double>>& ts);

  void multiply(const double* x, double* y) const;            // y = A x
  void multiply_transpose(const double* x, double* y) const;  // y = A^T x
  Vector multiply(const Vector& x) const;
  Vector multiply_transpose(const Vector& x) const;
  /// Per-column sum of squares (diagonal of A^T A).
  Vector column_squared_norms() const;
  /// Columns [col_begin, col_end) as their own matrix, indices re-based.
  SparseMatrix submatrix_cols(int col_begin, int col_end) const;
  std::int64_t nnz() const { return std::int64_t(values.size()); }
};

/// Coordinate (row, col, value) text format, one entry per line after a
/// "rows cols nnz" header.
void save_coo(const SparseMatrix& m, const std::string& path);
SparseMatrix load_coo(const std::string& path);

// ---- PDE-constrained QP instances -----------------------------------------------

enum class PdeEquation { Poisson, ConvectionDiffusion };

/// Finite-difference discretization request on the unit square: interior grid
/// N x N with spacing h = 1/(N+1), zero Dirichlet data, desired states and
/// control bounds fixed per equation family.
struct PdeSpec {
  PdeEquation equation = PdeEquation::Poisson;
  int grid_n = 9;             // interior points per side
  double beta1 = 0.0;         // L1 control regularization weight
  double beta2 = 0.0;         // L2 control regularization weight
  double control_lower = -2.0;
  double control_upper = 1.5;
  double diffusion_eps = 0.05;  // convection-diffusion only
};

enum class QpStructure { General, FdPoisson, FdConvectionDiffusion };

/// min c^T x + 1/2 x^T Q x + ||D x||_1 + delta_box(x)  s.t.  A x = b,
/// with Q split into its diagonal and strict off-diagonal parts.
struct QpInstance {
  Vector c;
  Vector q_diag;
  SparseMatrix q_off;       // Off(Q); empty pattern for generated instances
  SparseMatrix A;
  Vector b;
  Vector d_weights;         // diagonal of D, >= 0
  BoxSet box;
  QpStructure structure = QpStructure::General;
  int grid_n = 0;           // N for FD instances
  double h = 0.0;

  int n() const { return int(c.size()); }
  int m() const { return A.rows; }
};

/// Assembles the stacked (y, u) quadratic program: A = [L, -I] with L the
/// 5-point Laplacian (or eps-diffusion plus first-order upwind convection),
/// Q = diag(h^2 I, beta2 h^2 I), c = (-h^2 ybar, 0), D = (beta1/2) h^2 on the
/// control block, box on the control block only.
QpInstance assemble(const PdeSpec& spec);

/// Desired state sampled at interior node (i, j), 1-based.
double desired_state(const PdeSpec& spec, int i, int j);

// ---- instance samplers -------------------------------------------------------------

struct InstanceSampler {
  PdeEquation equation = PdeEquation::Poisson;
  std::vector<double> beta1_set{0.0, 1e-2, 1e-4, 1e-6};
  std::vector<double> beta2_set{0.0, 1e-2, 1e-4, 1e-6};
  std::vector<int> size_set{9, 17, 33, 65, 129};  // interior N per side
  std::vector<double> holdout_beta1_set{1e-3, 5e-3, 1e-5, 5e-5};
  std::vector<double> holdout_beta2_set{1e-3, 5e-3, 1e-5, 5e-5};
  std::vector<int> holdout_size_set{9, 17, 33, 65, 129, 257};

  std::size_t training_triples() const {
    return beta1_set.size() * beta2_set.size() * size_set.size();
  }
  std::size_t holdout_triples() const {
    return holdout_beta1_set.size() * holdout_beta2_set.size() * holdout_size_set.size();
  }
  /// Drop grid sizes above max_n from both pools (desk-scale runs).
  void cap_grid(int max_n);
};

std::pair<PdeSpec, QpInstance> sample_training_instance(const InstanceSampler& sampler,
                                                        RngStream& stream);
std::pair<PdeSpec, QpInstance> sample_holdout_instance(const InstanceSampler& sampler,
                                                       RngStream& stream);

}  // namespace zoprox
