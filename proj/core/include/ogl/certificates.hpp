#pragma once

#include <optional>

#include "ogl/groups.hpp"
#include "ogl/problem.hpp"

namespace ogl {

/// beta = -(1/lambda) A^T (Ax - y).
struct LassoCertificate {
  Vec beta;
};

/// Lifted certificate: unit group directions on the active groups, the
/// minimal-norm solution of L-hat^T u = beta on the others.
struct OgnCertificate {
  Vec u;
  SupportState source;
};

/// Strict: groups certified zero, margin < 1 - tol. Violating: the rest,
/// margin >= 1 - tol (the boundary case counts as violating). A positive tol
/// guards against certifying at an inexact solution.
enum class DetectMode { Strict, Violating };

LassoCertificate lasso_certificate(const ProblemData& problem, const Vec& x);

/// u_min = L-hat diag(L-hat^T L-hat)^{-1} beta, computed matrix-free.
Vec min_norm_certificate(const LiftingOperator& L, const SupportState& S, const Vec& beta);

/// Throws Error if an active group of S has x_{G_t} = 0.
OgnCertificate ogn_certificate(const LiftingOperator& L, const SupportState& S,
                               const LassoCertificate& beta, const Vec& x);

/// ||beta_{G_t}|| / w_t for every group.
Vec lasso_margins(const LiftingOperator& L, const Vec& beta);

/// ||u_{J_t}|| for every group.
Vec ogn_margins(const LiftingOperator& L, const Vec& u);

/// Margin ||beta_{G_t}|| / w_t.
IndexList detect_zero_groups_lasso(const LassoCertificate& beta, const LiftingOperator& L,
                                   DetectMode mode, double tol = 0.0);
/// Margin ||u_{J_t}||; the active groups of u.source have margin exactly 1.
IndexList detect_zero_groups_ogn(const OgnCertificate& u, const LiftingOperator& L,
                                 DetectMode mode, double tol = 0.0);

/// ||A_{G_t}||_F for every group. Cache this across correlation_init calls.
Vec group_frobenius_norms(const DesignMatrix& A, const LiftingOperator& L);

/// ||A_{G_t}^T y|| / (||A_{G_t}||_F ||y||); 0 when y = 0 or the block is zero.
Vec correlation_scores(const ProblemData& problem, const LiftingOperator& L,
                       const Vec* frobenius = nullptr);

/// The k groups with the largest correlation scores, sorted ascending.
/// Ties go to the smaller group index. Requires 1 <= k <= N.
IndexList correlation_init(const ProblemData& problem, const LiftingOperator& L, Index k,
                           const Vec* frobenius = nullptr);

/// Relative KKT residual
///   ||Lx - prox(Lx - (1/lambda) L^{-T} A^T (Ax - y))|| / (1 + ||Lx||_{1,2} + ||Ax - y||)
/// with prox the unit block soft-threshold. Only defined for nonoverlapping
/// coverings; throws UnsupportedError otherwise.
double kkt_residual(const ProblemData& problem, const LiftingOperator& L, const Vec& x);

}  // namespace ogl
