#include "ogl/linalg.hpp"

#include <cmath>
#include <string>

#include "ogl/errors.hpp"

namespace ogl {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

Index DesignMatrix::rows() const {
  return std::visit([](const auto& M) -> Index { return M.rows(); }, storage_);
}

Index DesignMatrix::cols() const {
  return std::visit([](const auto& M) -> Index { return M.cols(); }, storage_);
}

Vec DesignMatrix::apply(const Vec& x) const {
  if (x.size() != cols()) throw DimensionError("A x: length mismatch");
  return std::visit([&](const auto& M) -> Vec { return M * x; }, storage_);
}

Vec DesignMatrix::apply_transpose(const Vec& r) const {
  if (r.size() != rows()) throw DimensionError("A^T r: length mismatch");
  return std::visit([&](const auto& M) -> Vec { return M.transpose() * r; }, storage_);
}

DesignMatrix DesignMatrix::select_columns(std::span<const Index> cols) const {
  return std::visit(
      Overloaded{
          [&](const Mat& M) {
            Mat out(M.rows(), static_cast<Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = M.col(cols[j]);
            return DesignMatrix(std::move(out));
          },
          [&](const SpMat& M) {
            std::vector<Eigen::Triplet<double>> trips;
            for (std::size_t j = 0; j < cols.size(); ++j) {
              for (SpMat::InnerIterator it(M, cols[j]); it; ++it) {
                trips.emplace_back(it.row(), static_cast<Index>(j), it.value());
              }
            }
            SpMat out(M.rows(), static_cast<Index>(cols.size()));
            out.setFromTriplets(trips.begin(), trips.end());
            return DesignMatrix(std::move(out));
          }},
      storage_);
}

Mat DesignMatrix::gram() const {
  return std::visit(Overloaded{[](const Mat& M) {
                                 Mat G = Mat::Zero(M.cols(), M.cols());
                                 G.selfadjointView<Eigen::Lower>().rankUpdate(M.transpose());
                                 return Mat(G.selfadjointView<Eigen::Lower>());
                               },
                               [](const SpMat& M) {
                                 SpMat G = M.transpose() * M;
                                 return Mat(G);
                               }},
                    storage_);
}

Mat DesignMatrix::weighted_outer(const Vec& d) const {
  if (d.size() != cols()) throw DimensionError("A diag(d) A^T: length mismatch");
  return std::visit(Overloaded{[&](const Mat& M) {
                                 const Mat S = M * d.cwiseSqrt().asDiagonal();
                                 Mat K = Mat::Zero(M.rows(), M.rows());
                                 K.selfadjointView<Eigen::Lower>().rankUpdate(S);
                                 return Mat(K.selfadjointView<Eigen::Lower>());
                               },
                               [&](const SpMat& M) {
                                 SpMat S = M * d.asDiagonal();
                                 SpMat K = S * M.transpose();
                                 return Mat(K);
                               }},
                    storage_);
}

Vec DesignMatrix::column_sq_norms() const {
  return std::visit(Overloaded{[](const Mat& M) -> Vec { return M.colwise().squaredNorm().transpose(); },
                               [](const SpMat& M) -> Vec {
                                 Vec out(M.cols());
                                 for (Index j = 0; j < M.cols(); ++j) out[j] = M.col(j).squaredNorm();
                                 return out;
                               }},
                    storage_);
}

Mat DesignMatrix::to_dense() const {
  return std::visit(Overloaded{[](const Mat& M) { return M; }, [](const SpMat& M) { return Mat(M); }},
                    storage_);
}

double DesignMatrix::density() const {
  const double total = static_cast<double>(rows()) * static_cast<double>(cols());
  if (total == 0.0) return 0.0;
  return std::visit(Overloaded{[&](const Mat& M) {
                                 return static_cast<double>((M.array() != 0.0).count()) / total;
                               },
                               [&](const SpMat& M) { return static_cast<double>(M.nonZeros()) / total; }},
                    storage_);
}

DesignMatrix DesignMatrix::with_density_switch(const SpMat& A, double threshold) {
  const double total = static_cast<double>(A.rows()) * static_cast<double>(A.cols());
  const double density = total > 0 ? static_cast<double>(A.nonZeros()) / total : 0.0;
  if (density < threshold) {
    SpMat copy = A;
    copy.makeCompressed();
    return DesignMatrix(std::move(copy));
  }
  return DesignMatrix(Mat(A));
}

CholeskyFactor::CholeskyFactor(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("cholesky: matrix is not square");
  llt_.compute(M);
  if (llt_.info() != Eigen::Success) {
    throw FactorizationError("cholesky: matrix is not symmetric positive definite");
  }
}

Vec CholeskyFactor::solve(const Vec& b) const {
  if (b.size() != llt_.rows()) throw DimensionError("cholesky solve: length mismatch");
  return llt_.solve(b);
}

Vec cholesky_solve(const Mat& M, const Vec& b) { return CholeskyFactor(M).solve(b); }

PcgResult pcg_solve(const LinearOperator& apply_M, const Vec& precond_diag, const Vec& b,
                    double tol, Index max_iters, const Vec* x0) {
  const Index n = b.size();
  if (precond_diag.size() != n) throw DimensionError("pcg: preconditioner length mismatch");
  if (x0 && x0->size() != n) throw DimensionError("pcg: initial guess length mismatch");
  if ((precond_diag.array() <= 0.0).any()) throw ConfigError("pcg: preconditioner must be positive");

  PcgResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = Vec::Zero(n);
    return out;
  }
  const Vec inv_diag = precond_diag.cwiseInverse();
  Vec x = x0 ? *x0 : Vec::Zero(n);
  Vec r = x0 ? Vec(b - apply_M(x)) : b;
  double rel = r.norm() / bnorm;
  if (rel <= tol) {
    out.x = std::move(x);
    out.relative_residual = rel;
    return out;
  }
  Vec z = inv_diag.cwiseProduct(r);
  Vec p = z;
  double rz = r.dot(z);
  for (Index it = 1; it <= max_iters; ++it) {
    const Vec Ap = apply_M(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw FactorizationError("pcg: operator is not positive definite");
    const double alpha = rz / pAp;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    rel = r.norm() / bnorm;
    if (rel <= tol) {
      out.x = std::move(x);
      out.iterations = it;
      out.relative_residual = rel;
      return out;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw ConvergenceError("pcg: no convergence after " + std::to_string(max_iters) + " iterations",
                         rel);
}

ShiftedGramSolver::ShiftedGramSolver(const DesignMatrix& A, Vec d, double c, LinearSolverPlan plan,
                                     Route route)
    : A_(&A), d_(std::move(d)), c_(c), plan_(plan) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (d_.size() != n) throw DimensionError("shifted gram: diagonal length mismatch");
  if (!(c_ > 0.0)) throw ConfigError("shifted gram: shift must be positive");
  if ((d_.array() <= 0.0).any()) throw ConfigError("shifted gram: diagonal must be positive");
  d_inv_ = d_.cwiseInverse();
  woodbury_ = route == Route::Woodbury || (route == Route::Auto && m < n);

  if (plan_.kind == LinearSolverKind::DirectCholesky) {
    if (woodbury_) {
      Mat K = A.weighted_outer(d_inv_);
      K.diagonal().array() += c_;
      factor_ = CholeskyFactor(K);
    } else {
      Mat G = A.gram();
      G.diagonal() += c_ * d_;
      factor_ = CholeskyFactor(G);
    }
  } else if (woodbury_) {
    // diag(c I + A D^{-1} A^T)
    precond_ = Vec::Constant(m, c_);
    if (A.is_sparse()) {
      const SpMat& S = A.sparse();
      for (Index j = 0; j < S.outerSize(); ++j) {
        for (SpMat::InnerIterator it(S, j); it; ++it) precond_[it.row()] += it.value() * it.value() * d_inv_[j];
      }
    } else {
      precond_ += A.dense().array().square().matrix() * d_inv_;
    }
  } else {
    precond_ = c_ * d_ + A.column_sq_norms();
  }
}

Vec ShiftedGramSolver::solve(const Vec& r) const {
  const DesignMatrix& A = *A_;
  if (r.size() != A.cols()) throw DimensionError("shifted gram solve: length mismatch");
  const bool direct = plan_.kind == LinearSolverKind::DirectCholesky;
  if (!woodbury_) {
    if (direct) return factor_.solve(r);
    auto op = [&](const Vec& v) -> Vec { return c_ * d_.cwiseProduct(v) + A.apply_transpose(A.apply(v)); };
    return pcg_solve(op, precond_, r, plan_.tolerance, plan_.max_iters).x;
  }
  const Vec dr = d_inv_.cwiseProduct(r);
  const Vec rhs = A.apply(dr);
  Vec inner;
  if (direct) {
    inner = factor_.solve(rhs);
  } else {
    auto op = [&](const Vec& v) -> Vec { return c_ * v + A.apply(d_inv_.cwiseProduct(A.apply_transpose(v))); };
    inner = pcg_solve(op, precond_, rhs, plan_.tolerance, plan_.max_iters).x;
  }
  return (dr - d_inv_.cwiseProduct(A.apply_transpose(inner))) / c_;
}

Vec smw_apply(const DesignMatrix& A, const Vec& d_inv, double c, const Vec& r,
              const LinearSolverPlan& plan) {
  if (d_inv.size() != A.cols()) throw DimensionError("smw: diagonal length mismatch");
  if ((d_inv.array() <= 0.0).any()) throw ConfigError("smw: diagonal must be positive");
  ShiftedGramSolver solver(A, d_inv.cwiseInverse(), c, plan, ShiftedGramSolver::Route::Woodbury);
  return solver.solve(r);
}

}  // namespace ogl
