#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "ogl/groups.hpp"
#include "ogl/linalg.hpp"
#include "ogl/problem.hpp"

namespace ogl {

enum class SolverKind { PrimalDual, Admm, VarPro };

std::string_view to_string(SolverKind kind);
/// Accepts "pd", "admm", "varpro". Throws ConfigError otherwise.
SolverKind parse_solver_kind(std::string_view name);

struct TraceRecord {
  Index iter = 0;
  double objective = 0.0;
  double residual = 0.0;
  Index kappa = 0;  // dimension of the linear systems solved at this iterate
  double seconds = 0.0;
};

struct SolverTrace {
  std::vector<TraceRecord> records;

  bool empty() const noexcept { return records.empty(); }
  const TraceRecord& back() const { return records.back(); }
};

/// Writes one JSON object per line with keys iter, obj, res, kappa, t.
void write_trace_jsonl(std::ostream& os, const SolverTrace& trace);

/// Armijo backtracking on the projected function f(v). A trial step s with
/// trial gradient g' is accepted when
///   f(v - s g) <= f(v) - slope s ||g||^2,
/// or, once the change in f is below rounding, when
///   f(v - s g) <= f(v) + value_tolerance (1 + |f(v)|)  and
///   -<g', g> <= (1 - 2 slope) ||g||^2
/// (the derivative form of the Armijo test, exact for quadratics).
/// With `barzilai_borwein` the first trial step after iteration 1 is
/// <s, s> / <s, d> for the last step s and gradient change d (initial_step
/// when <s, d> <= 0).
struct LineSearchParams {
  double initial_step = 1.0;
  bool barzilai_borwein = true;
  double shrink = 0.5;
  double slope = 1e-4;
  int max_backtracks = 60;
  double value_tolerance = 1e-13;
};

struct SolverConfig {
  Index max_iters = 50000;
  /// Threshold on the solver-native residual:
  ///   pd:     ||(x+, psi+) - (x, psi)|| / (1 + ||(x, psi)||)
  ///   admm:   max(||z - Lx||, tau ||L^T (z+ - z)||) / (1 + ||Lx||)
  ///   varpro: ||grad f(v)|| / (1 + ||v||)
  double stop_tol = 1e-8;
  /// Primal-dual steps; both default to 0.99 / ||L||.
  std::optional<double> pd_sigma;
  std::optional<double> pd_tau;
  double admm_tau = 1.0;
  LineSearchParams line_search;
  /// |v_t| below this freezes group t at zero in the VarPro lower problem.
  double varpro_freeze = 1e-10;
  LinearSolverPlan linear_plan;
  std::uint64_t seed = 0;
  /// Record every k-th iterate (the final iterate is always recorded).
  Index trace_every = 1;
};

/// Resolved (sigma, tau) for the primal-dual method. Throws ConfigError unless
/// sigma * tau * ||L||^2 < 1 with sigma, tau > 0.
std::pair<double, double> pd_stepsizes(const SolverConfig& config, const LiftingOperator& L);

/// Optional starting point. Missing pieces default to zero (x, psi), Lx (z)
/// and ones (v).
struct WarmStart {
  std::optional<Vec> x;
  std::optional<Vec> psi;
  std::optional<Vec> z;
  std::optional<Vec> v;
};

struct SolveResult {
  Vec x;
  Vec z;      // admm: lifted split variable
  Vec psi;    // pd / admm: lifted dual variable
  Vec v;      // varpro: projected variable
  SolverTrace trace;
  bool converged = false;
  Index iterations = 0;
  double residual = 0.0;
  double objective = 0.0;
};

/// Block soft-thresholding on the partition given by `offsets`
/// (block t spans [offsets[t], offsets[t+1])).
Vec prox_group_norm(const Vec& z, const IndexList& offsets, double gamma);

/// Projection onto {psi : ||psi_{J_t}|| <= 1 for every t}.
Vec project_omega(const Vec& psi, const IndexList& offsets);

SolveResult pd_solve(const ProblemData& problem, const LiftingOperator& L,
                     const SolverConfig& config, const WarmStart* warm = nullptr);

SolveResult admm_solve(const ProblemData& problem, const LiftingOperator& L,
                       const SolverConfig& config, const WarmStart* warm = nullptr);

SolveResult varpro_solve(const ProblemData& problem, const LiftingOperator& L,
                         const SolverConfig& config, const WarmStart* warm = nullptr);

SolveResult solve(SolverKind kind, const ProblemData& problem, const LiftingOperator& L,
                  const SolverConfig& config, const WarmStart* warm = nullptr);

/// Lower-level VarPro solution at v: (x, alpha, xi) with
///   lambda alpha = Ax - y,  Lx = xi (.)_J v^2,  L^T xi + A^T alpha = 0,
/// and the projected function value f(v).
struct VarProLower {
  Vec x;
  Vec alpha;
  Vec xi;
  double value = 0.0;
};

/// Uses (A^T A + lambda W) x = A^T y when n <= m and
/// (lambda I + A W^{-1} A^T) alpha = -y otherwise, W = L^T D_v L.
/// Groups with |v_t| < freeze_tol are frozen: their coordinates are pinned
/// to zero and xi_{J_t} = 0.
VarProLower varpro_lower_solve(const ProblemData& problem, const LiftingOperator& L,
                               const Vec& v, const LinearSolverPlan& plan = {},
                               double freeze_tol = 1e-10);

/// grad f(v) = v - v (.) (||xi_{J_t}||^2)_t
Vec varpro_gradient(const LiftingOperator& L, const Vec& v, const Vec& xi);

/// Optimal Hadamard split Lx = u (.)_J v of the group norm; value equals
/// group_norm(L, x).
struct HadamardSplit {
  Vec u;
  Vec v;
  double value = 0.0;
};

HadamardSplit hadamard_value(const LiftingOperator& L, const Vec& x);

/// Active groups for reporting: ||x_{G_t}|| > rel_tol * ||x||. Groups with
/// no coordinate outside the inactive groups are dropped.
IndexList reported_support(const LiftingOperator& L, const Vec& x, double rel_tol = 1e-8);
/// Nonzero blocks of the split variable z when the solver returns one
/// (ADMM), otherwise reported_support on x.
IndexList reported_support(const LiftingOperator& L, const SolveResult& result,
                           double rel_tol = 1e-8);

}  // namespace ogl
