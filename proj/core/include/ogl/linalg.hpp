#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <span>
#include <variant>

#include "ogl/groups.hpp"

namespace ogl {

using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Design matrix A (m x n), dense or compressed-sparse-column.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Mat dense) : storage_(std::move(dense)) {}
  explicit DesignMatrix(SpMat sparse) : storage_(std::move(sparse)) {}

  Index rows() const;
  Index cols() const;
  bool is_sparse() const noexcept { return std::holds_alternative<SpMat>(storage_); }
  const Mat& dense() const { return std::get<Mat>(storage_); }
  const SpMat& sparse() const { return std::get<SpMat>(storage_); }

  Vec apply(const Vec& x) const;             // A x
  Vec apply_transpose(const Vec& r) const;   // A^T r

  /// Column block A_{cols}, same storage kind.
  DesignMatrix select_columns(std::span<const Index> cols) const;

  /// A^T A, dense n x n.
  Mat gram() const;
  /// A diag(d) A^T, dense m x m.
  Mat weighted_outer(const Vec& d) const;
  /// ||A_{:,j}||^2 for every column.
  Vec column_sq_norms() const;

  Mat to_dense() const;
  /// Fraction of stored entries that are nonzero.
  double density() const;

  /// Sparse when density < threshold, dense otherwise.
  static DesignMatrix with_density_switch(const SpMat& A, double threshold = 0.10);

 private:
  std::variant<Mat, SpMat> storage_;
};

enum class LinearSolverKind { DirectCholesky, Pcg };

struct LinearSolverPlan {
  LinearSolverKind kind = LinearSolverKind::DirectCholesky;
  double tolerance = 1e-12;  // relative residual bound for pcg
  Index max_iters = 1000;
};

/// Cached Cholesky factor of an SPD matrix. Throws FactorizationError when a
/// pivot is not strictly positive.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(const Mat& M);
  Vec solve(const Vec& b) const;
  Index size() const noexcept { return llt_.rows(); }

 private:
  Eigen::LLT<Mat> llt_;
};

Vec cholesky_solve(const Mat& M, const Vec& b);

struct PcgResult {
  Vec x;
  Index iterations = 0;
  double relative_residual = 0.0;
};

using LinearOperator = std::function<Vec(const Vec&)>;

/// Jacobi-preconditioned conjugate gradient for an SPD operator. Throws
/// ConvergenceError (carrying the last relative residual) after max_iters.
PcgResult pcg_solve(const LinearOperator& apply_M, const Vec& precond_diag, const Vec& b,
                    double tol, Index max_iters, const Vec* x0 = nullptr);

/// Solves (c D + A^T A) x = r for a positive diagonal D and c > 0.
///
/// Uses an n x n system when n <= m and the m x m Woodbury reduction
///   (c D + A^T A)^{-1} = (1/c) (D^{-1} - D^{-1} A^T (c I + A D^{-1} A^T)^{-1} A D^{-1})
/// otherwise. Direct plans factor once at construction; pcg plans are
/// matrix-free and Jacobi-preconditioned.
class ShiftedGramSolver {
 public:
  enum class Route { Auto, Primal, Woodbury };

  ShiftedGramSolver(const DesignMatrix& A, Vec d, double c, LinearSolverPlan plan,
                    Route route = Route::Auto);

  Vec solve(const Vec& r) const;
  bool uses_woodbury() const noexcept { return woodbury_; }

 private:
  const DesignMatrix* A_;
  Vec d_;
  Vec d_inv_;
  double c_;
  LinearSolverPlan plan_;
  bool woodbury_ = false;
  CholeskyFactor factor_;
  Vec precond_;
};

/// (c D + A^T A)^{-1} r through the m x m Woodbury system, D = diag(1 / d_inv).
Vec smw_apply(const DesignMatrix& A, const Vec& d_inv, double c, const Vec& r,
              const LinearSolverPlan& plan = {});

}  // namespace ogl
