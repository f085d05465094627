#include <chrono>
#include <cmath>

#include "ogl/errors.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

// ADMM on  min (1/(2 lambda)) ||Ax - y||^2 + ||z||_{1,2}  s.t.  z = Lx,
// augmented Lagrangian  + <psi, z - Lx> + (tau/2) ||z - Lx||^2.
SolveResult admm_solve(const ProblemData& problem, const LiftingOperator& L,
                       const SolverConfig& config, const WarmStart* warm) {
  validate(problem, L);
  const double tau = config.admm_tau;
  if (!(tau > 0.0)) throw ConfigError("admm: tau must be positive");
  const auto start = std::chrono::steady_clock::now();
  const double lambda = problem.lambda;
  const Index n = L.dim();
  const Index p = L.lifted_dim();

  // L^T L is diagonal, so (A^T A + lambda tau L^T L) is a shifted gram.
  const ShiftedGramSolver system(problem.A, L.gram_diag(), lambda * tau, config.linear_plan);
  const Vec Aty = problem.A.apply_transpose(problem.y);

  SolveResult out;
  Vec x = warm && warm->x ? *warm->x : Vec::Zero(n);
  if (x.size() != n) throw DimensionError("admm: warm start length mismatch");
  Vec z = warm && warm->z ? *warm->z : L.apply(x);
  Vec psi = warm && warm->psi ? *warm->psi : Vec::Zero(p);
  if (z.size() != p || psi.size() != p) throw DimensionError("admm: warm start length mismatch");

  double res = 0.0;
  Index k = 0;
  for (k = 1; k <= config.max_iters; ++k) {
    x = system.solve(Aty + lambda * L.apply_adjoint(psi + tau * z));
    const Vec Lx = L.apply(x);
    Vec z_next = prox_group_norm(Lx - psi / tau, L.offsets(), 1.0 / tau);
    const Vec gap = z_next - Lx;
    psi += tau * gap;

    const double primal = gap.norm();
    const double dual = tau * L.apply_adjoint(z_next - z).norm();
    res = std::max(primal, dual) / (1.0 + Lx.norm());
    z = std::move(z_next);

    const bool done = res <= config.stop_tol;
    if (done || k % config.trace_every == 0 || k == config.max_iters) {
      const double obj = objective(problem, L, x);
      if (!std::isfinite(obj)) throw DivergenceError("admm: objective is not finite");
      const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.trace.records.push_back({k, obj, res, n, t});
    }
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.iterations = std::min(k, config.max_iters);
  out.residual = res;
  out.objective = out.trace.empty() ? objective(problem, L, x) : out.trace.back().objective;
  out.x = std::move(x);
  out.z = std::move(z);
  out.psi = std::move(psi);
  return out;
}

}  // namespace ogl
