#include "ogl/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ogl/errors.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

LassoCertificate lasso_certificate(const ProblemData& problem, const Vec& x) {
  if (x.size() != problem.cols()) throw DimensionError("lasso_certificate: length mismatch");
  return {-problem.A.apply_transpose(residual(problem, x)) / problem.lambda};
}

Vec min_norm_certificate(const LiftingOperator& L, const SupportState& S, const Vec& beta) {
  if (beta.size() != L.dim()) throw DimensionError("min_norm_certificate: length mismatch");
  const Vec d = effective_gram_diag(L, S);
  return effective_lift_apply(L, S, beta.cwiseQuotient(d));
}

OgnCertificate ogn_certificate(const LiftingOperator& L, const SupportState& S,
                               const LassoCertificate& beta, const Vec& x) {
  if (x.size() != L.dim()) throw DimensionError("ogn_certificate: length mismatch");
  Vec u = min_norm_certificate(L, S, beta.beta);
  const auto& cov = L.covering();
  for (Index t : S.active_groups) {
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += x[i] * x[i];
    if (sq == 0.0) {
      throw Error("ogn_certificate: active group " + std::to_string(t + 1) + " has x_G = 0");
    }
    const double inv = 1.0 / std::sqrt(sq);
    Index k = L.block_begin(t);
    for (Index i : cov.group(t)) u[k++] = x[i] * inv;
  }
  return {std::move(u), S};
}

Vec lasso_margins(const LiftingOperator& L, const Vec& beta) {
  return group_coord_norms(L, beta).cwiseQuotient(
      Eigen::Map<const Vec>(L.covering().weights().data(), L.num_groups()));
}

Vec ogn_margins(const LiftingOperator& L, const Vec& u) { return L.block_norms(u); }

namespace {

IndexList threshold_groups(const Vec& margins, DetectMode mode, double tol) {
  IndexList out;
  for (Index t = 0; t < margins.size(); ++t) {
    const bool strict = margins[t] < 1.0 - tol;
    if (strict == (mode == DetectMode::Strict)) out.push_back(t);
  }
  return out;
}

}  // namespace

IndexList detect_zero_groups_lasso(const LassoCertificate& beta, const LiftingOperator& L,
                                   DetectMode mode, double tol) {
  return threshold_groups(lasso_margins(L, beta.beta), mode, tol);
}

IndexList detect_zero_groups_ogn(const OgnCertificate& u, const LiftingOperator& L,
                                 DetectMode mode, double tol) {
  Vec margins = ogn_margins(L, u.u);
  for (Index t : u.source.active_groups) margins[t] = 1.0;
  return threshold_groups(margins, mode, tol);
}

Vec group_frobenius_norms(const DesignMatrix& A, const LiftingOperator& L) {
  const Vec col_sq = A.column_sq_norms();
  const auto& cov = L.covering();
  Vec out(cov.num_groups());
  for (Index t = 0; t < cov.num_groups(); ++t) {
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += col_sq[i];
    out[t] = std::sqrt(sq);
  }
  return out;
}

Vec correlation_scores(const ProblemData& problem, const LiftingOperator& L, const Vec* frobenius) {
  const Index N = L.num_groups();
  Vec scores = Vec::Zero(N);
  const double ynorm = problem.y.norm();
  if (ynorm == 0.0) return scores;
  const Vec frob = frobenius ? *frobenius : group_frobenius_norms(problem.A, L);
  const Vec corr = group_coord_norms(L, problem.A.apply_transpose(problem.y));
  for (Index t = 0; t < N; ++t) {
    if (frob[t] > 0.0) scores[t] = corr[t] / (frob[t] * ynorm);
  }
  return scores;
}

IndexList correlation_init(const ProblemData& problem, const LiftingOperator& L, Index k,
                           const Vec* frobenius) {
  const Index N = L.num_groups();
  if (k < 1 || k > N) {
    throw ConfigError("correlation_init: k must lie in [1, " + std::to_string(N) + "]");
  }
  const Vec scores = correlation_scores(problem, L, frobenius);
  IndexList order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] > scores[b]; });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

double kkt_residual(const ProblemData& problem, const LiftingOperator& L, const Vec& x) {
  if (!L.covering().is_partition()) {
    throw UnsupportedError("kkt_residual: undefined for overlapping coverings (L is not invertible)");
  }
  if (x.size() != L.dim()) throw DimensionError("kkt_residual: length mismatch");
  const Vec r = residual(problem, x);
  const Vec grad = problem.A.apply_transpose(r) / problem.lambda;
  const Vec z = L.apply(x);
  // L^{-T} g: row k carries w_k in column j_k, so (L^{-T} g)_k = g_{j_k} / w_k.
  Vec step(z.size());
  for (Index k = 0; k < z.size(); ++k) step[k] = z[k] - grad[L.row_column(k)] / L.row_weight(k);
  const Vec diff = z - prox_group_norm(step, L.offsets(), 1.0);
  const double lifted_norm = L.block_norms(z).sum();
  return diff.norm() / (1.0 + lifted_norm + r.norm());
}

}  // namespace ogl
