#include <chrono>
#include <cmath>

#include "ogl/errors.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

// Primal-dual splitting on
//   min_x max_{psi in Omega} (1/(2 lambda)) ||Ax - y||^2 + <Lx, psi>
// with primal step sigma and dual step tau.
SolveResult pd_solve(const ProblemData& problem, const LiftingOperator& L,
                     const SolverConfig& config, const WarmStart* warm) {
  validate(problem, L);
  const auto [sigma, tau] = pd_stepsizes(config, L);
  const auto start = std::chrono::steady_clock::now();
  const double lambda = problem.lambda;
  const Index n = L.dim();

  // (lambda I + sigma A^T A) x = rhs  <=>  (lambda/sigma I + A^T A) x = rhs / sigma
  const ShiftedGramSolver system(problem.A, Vec::Ones(n), lambda / sigma, config.linear_plan);
  const Vec Aty = problem.A.apply_transpose(problem.y);

  SolveResult out;
  Vec x = warm && warm->x ? *warm->x : Vec::Zero(n);
  Vec psi = warm && warm->psi ? *warm->psi : Vec::Zero(L.lifted_dim());
  if (x.size() != n || psi.size() != L.lifted_dim()) throw DimensionError("pd: warm start length mismatch");

  double res = 0.0;
  Index k = 0;
  for (k = 1; k <= config.max_iters; ++k) {
    const Vec rhs = lambda * x - lambda * sigma * L.apply_adjoint(psi) + sigma * Aty;
    const Vec x_next = system.solve(rhs / sigma);
    const Vec x_bar = 2.0 * x_next - x;
    const Vec psi_next = project_omega(psi + tau * L.apply(x_bar), L.offsets());

    const double step = std::sqrt((x_next - x).squaredNorm() + (psi_next - psi).squaredNorm());
    const double scale = 1.0 + std::sqrt(x.squaredNorm() + psi.squaredNorm());
    res = step / scale;
    x = x_next;
    psi = psi_next;

    const bool done = res <= config.stop_tol;
    if (done || k % config.trace_every == 0 || k == config.max_iters) {
      const double obj = objective(problem, L, x);
      if (!std::isfinite(obj)) throw DivergenceError("pd: objective is not finite");
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
  out.psi = std::move(psi);
  return out;
}

}  // namespace ogl
