#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ogl/errors.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

namespace {

// Lower-level solver at a given v. A^T A is formed once when the primal
// route is taken with a direct plan.
class LowerSolver {
 public:
  LowerSolver(const ProblemData& problem, const LiftingOperator& L, LinearSolverPlan plan,
              double freeze_tol)
      : problem_(problem), L_(L), plan_(plan), freeze_tol_(freeze_tol),
        primal_(problem.cols() <= problem.rows()),
        Aty_(problem.A.apply_transpose(problem.y)) {
    if (primal_ && plan_.kind == LinearSolverKind::DirectCholesky) gram_ = problem.A.gram();
  }

  VarProLower operator()(const Vec& v) const {
    const auto& cov = L_.covering();
    const Index n = L_.dim();
    const Index N = L_.num_groups();
    if (v.size() != N) throw DimensionError("varpro: v has wrong length");

    std::vector<bool> frozen(static_cast<std::size_t>(N));
    Vec W = Vec::Zero(n);
    Mask pinned(static_cast<std::size_t>(n), false);
    for (Index t = 0; t < N; ++t) {
      frozen[t] = std::abs(v[t]) < freeze_tol_;
      const double wt = cov.weight(t);
      for (Index i : cov.group(t)) {
        if (frozen[t]) {
          pinned[i] = true;
        } else {
          W[i] += wt * wt / (v[t] * v[t]);
        }
      }
    }
    Vec W_inv = Vec::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (!pinned[i]) W_inv[i] = 1.0 / W[i];
    }

    const double lambda = problem_.lambda;
    Vec x;
    if (primal_) {
      x = primal_solve(W, pinned);
    } else {
      // (lambda I + A W^{-1} A^T) alpha = -y,  x = -W^{-1} A^T alpha
      const Vec rhs = -problem_.y;
      Vec alpha;
      if (plan_.kind == LinearSolverKind::DirectCholesky) {
        Mat M = problem_.A.weighted_outer(W_inv);
        M.diagonal().array() += lambda;
        alpha = cholesky_solve(M, rhs);
      } else {
        const auto op = [&](const Vec& a) -> Vec {
          return lambda * a + problem_.A.apply(W_inv.cwiseProduct(problem_.A.apply_transpose(a)));
        };
        const Vec diag = Vec::Constant(problem_.rows(), lambda);
        alpha = pcg_solve(op, diag, rhs, plan_.tolerance, plan_.max_iters).x;
      }
      x = -W_inv.cwiseProduct(problem_.A.apply_transpose(alpha));
    }

    VarProLower out;
    const Vec r = problem_.A.apply(x) - problem_.y;
    out.alpha = r / lambda;
    out.xi = Vec::Zero(L_.lifted_dim());
    double penalty = 0.0;
    for (Index t = 0; t < N; ++t) {
      if (frozen[t]) continue;
      const double scale = cov.weight(t) / (v[t] * v[t]);
      Index k = L_.block_begin(t);
      double sq = 0.0;
      for (Index i : cov.group(t)) {
        out.xi[k] = scale * x[i];
        sq += out.xi[k] * out.xi[k];
        ++k;
      }
      penalty += v[t] * v[t] * sq;
    }
    out.value = 0.5 * v.squaredNorm() + 0.5 * penalty + 0.5 * r.squaredNorm() / lambda;
    out.x = std::move(x);
    return out;
  }

  Index free_count(const Vec& v) const {
    const auto& cov = L_.covering();
    Mask pinned(static_cast<std::size_t>(L_.dim()), false);
    for (Index t = 0; t < L_.num_groups(); ++t) {
      if (std::abs(v[t]) < freeze_tol_) {
        for (Index i : cov.group(t)) pinned[i] = true;
      }
    }
    Index count = 0;
    for (bool p : pinned) count += p ? 0 : 1;
    return count;
  }

 private:
  // (A^T A + lambda W) x = A^T y on the unpinned coordinates.
  Vec primal_solve(const Vec& W, const Mask& pinned) const {
    const Index n = L_.dim();
    const double lambda = problem_.lambda;
    Vec rhs = Aty_;
    for (Index i = 0; i < n; ++i) {
      if (pinned[i]) rhs[i] = 0.0;
    }
    if (plan_.kind == LinearSolverKind::DirectCholesky) {
      Mat M = gram_;
      for (Index i = 0; i < n; ++i) {
        if (pinned[i]) {
          M.row(i).setZero();
          M.col(i).setZero();
          M(i, i) = 1.0;
        } else {
          M(i, i) += lambda * W[i];
        }
      }
      return cholesky_solve(M, rhs);
    }
    const Vec col_sq = problem_.A.column_sq_norms();
    Vec diag(n);
    for (Index i = 0; i < n; ++i) diag[i] = pinned[i] ? 1.0 : col_sq[i] + lambda * W[i];
    const auto op = [&](const Vec& z) -> Vec {
      Vec zf = z;
      for (Index i = 0; i < n; ++i) {
        if (pinned[i]) zf[i] = 0.0;
      }
      Vec out = problem_.A.apply_transpose(problem_.A.apply(zf)) + lambda * W.cwiseProduct(zf);
      for (Index i = 0; i < n; ++i) {
        if (pinned[i]) out[i] = z[i];
      }
      return out;
    };
    return pcg_solve(op, diag, rhs, plan_.tolerance, plan_.max_iters).x;
  }

  const ProblemData& problem_;
  const LiftingOperator& L_;
  LinearSolverPlan plan_;
  double freeze_tol_;
  bool primal_;
  Vec Aty_;
  Mat gram_;
};

constexpr double kMinStep = 1e-10;
constexpr double kMaxStep = 1e10;
constexpr double kReviveBelow = 1e-3;
constexpr double kReviveSlack = 1e-6;

}  // namespace

VarProLower varpro_lower_solve(const ProblemData& problem, const LiftingOperator& L,
                               const Vec& v, const LinearSolverPlan& plan, double freeze_tol) {
  validate(problem, L);
  return LowerSolver(problem, L, plan, freeze_tol)(v);
}

Vec varpro_gradient(const LiftingOperator& L, const Vec& v, const Vec& xi) {
  if (v.size() != L.num_groups() || xi.size() != L.lifted_dim()) {
    throw DimensionError("varpro_gradient: length mismatch");
  }
  const Vec sq = L.block_norms(xi).array().square();
  return v - v.cwiseProduct(sq);
}

SolveResult varpro_solve(const ProblemData& problem, const LiftingOperator& L,
                         const SolverConfig& config, const WarmStart* warm) {
  validate(problem, L);
  const auto& ls = config.line_search;
  if (!(ls.initial_step > 0.0) || !(ls.shrink > 0.0 && ls.shrink < 1.0) || !(ls.slope > 0.0) ||
      !(ls.value_tolerance >= 0.0)) {
    throw ConfigError("varpro: invalid line-search parameters");
  }
  const auto start = std::chrono::steady_clock::now();
  const LowerSolver lower(problem, L, config.linear_plan, config.varpro_freeze);

  Vec v = warm && warm->v ? *warm->v : Vec::Ones(L.num_groups());
  if (v.size() != L.num_groups()) throw DimensionError("varpro: warm start length mismatch");
  if ((v.array() < 0.0).any()) throw ConfigError("varpro: initial v must be nonnegative");

  SolveResult out;
  VarProLower cur = lower(v);
  Vec grad = varpro_gradient(L, v, cur.xi);
  double res = grad.norm() / (1.0 + v.norm());
  Index steps = 0;
  Vec last_step;
  Vec last_dgrad;
  Index revivals = 0;
  // A small v_t has a small gradient even when f decreases by growing it;
  // such groups are reset to 1 before convergence is accepted, at most N
  // times.
  const auto revive = [&]() {
    Vec xi_sq = L.block_norms(cur.xi).array().square();
    // for a frozen group, xi_{J_t} tends to beta_i / w_t on the coordinates
    // no other frozen group pins
    const auto& cov = L.covering();
    Mask frozen(static_cast<std::size_t>(v.size()));
    std::vector<int> pins(static_cast<std::size_t>(L.dim()), 0);
    for (Index t = 0; t < v.size(); ++t) {
      frozen[t] = std::abs(v[t]) < config.varpro_freeze;
      if (frozen[t]) {
        for (Index i : cov.group(t)) ++pins[i];
      }
    }
    const Vec beta = problem.A.apply_transpose(cur.alpha);
    for (Index t = 0; t < v.size(); ++t) {
      if (!frozen[t]) continue;
      double sq = 0.0;
      for (Index i : cov.group(t)) {
        if (pins[i] == 1) sq += beta[i] * beta[i];
      }
      xi_sq[t] = sq / (cov.weight(t) * cov.weight(t));
    }
    const double small = kReviveBelow * std::max(1.0, v.cwiseAbs().maxCoeff());
    bool any = false;
    for (Index t = 0; t < v.size(); ++t) {
      if (std::abs(v[t]) <= small && xi_sq[t] > 1.0 + kReviveSlack) {
        v[t] = 1.0;
        any = true;
      }
    }
    if (!any) return false;
    ++revivals;
    cur = lower(v);
    grad = varpro_gradient(L, v, cur.xi);
    res = grad.norm() / (1.0 + v.norm());
    last_step.resize(0);
    return true;
  };
  for (Index k = 1; k <= config.max_iters; ++k) {
    if (res <= config.stop_tol && (revivals >= v.size() || !revive())) break;
    const double g2 = grad.squaredNorm();
    const double fuzz = ls.value_tolerance * (1.0 + std::abs(cur.value));
    double step = ls.initial_step;
    if (ls.barzilai_borwein && last_step.size() > 0) {
      const double sd = last_step.dot(last_dgrad);
      if (sd > 0.0) step = std::clamp(last_step.squaredNorm() / sd, kMinStep, kMaxStep);
    }
    std::optional<VarProLower> next;
    Vec v_next;
    Vec g_next;
    for (int b = 0; b <= ls.max_backtracks; ++b) {
      v_next = v - step * grad;
      VarProLower trial = lower(v_next);
      if (!std::isfinite(trial.value)) throw DivergenceError("varpro: objective is not finite");
      g_next = varpro_gradient(L, v_next, trial.xi);
      const bool armijo = trial.value <= cur.value - ls.slope * step * g2;
      const bool approx = trial.value <= cur.value + fuzz &&
                          -g_next.dot(grad) <= (1.0 - 2.0 * ls.slope) * g2;
      if (armijo || approx) {
        next = std::move(trial);
        break;
      }
      step *= ls.shrink;
    }
    if (!next) {
      throw ConvergenceError("varpro: line search failed after " +
                                 std::to_string(ls.max_backtracks) + " backtracks (f=" +
                                 std::to_string(cur.value) + ", |grad|=" +
                                 std::to_string(std::sqrt(g2)) + ")",
                             res);
    }
    if (v_next == v) break;
    steps = k;
    last_step = v_next - v;
    last_dgrad = g_next - grad;
    v = std::move(v_next);
    cur = std::move(*next);
    grad = std::move(g_next);
    res = grad.norm() / (1.0 + v.norm());

    if (k % config.trace_every == 0 || res <= config.stop_tol || k == config.max_iters) {
      const double obj = objective(problem, L, cur.x);
      const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.trace.records.push_back({k, obj, res, lower.free_count(v), t});
    }
  }
  out.converged = res <= config.stop_tol;
  out.iterations = steps;
  out.residual = res;
  out.objective = objective(problem, L, cur.x);
  if (!std::isfinite(out.objective)) throw DivergenceError("varpro: objective is not finite");
  out.x = std::move(cur.x);
  out.v = v.cwiseAbs();
  return out;
}

}  // namespace ogl
