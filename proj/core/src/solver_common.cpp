#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "json.hpp"

#include "ogl/errors.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::PrimalDual: return "pd";
    case SolverKind::Admm: return "admm";
    case SolverKind::VarPro: return "varpro";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "pd") return SolverKind::PrimalDual;
  if (name == "admm") return SolverKind::Admm;
  if (name == "varpro") return SolverKind::VarPro;
  throw ConfigError("unknown solver '" + std::string(name) + "' (expected pd, admm or varpro)");
}

void write_trace_jsonl(std::ostream& os, const SolverTrace& trace) {
  for (const auto& r : trace.records) {
    nlohmann::json j = {{"iter", r.iter}, {"obj", r.objective}, {"res", r.residual},
                        {"kappa", r.kappa}, {"t", r.seconds}};
    os << j.dump() << '\n';
  }
}

Vec prox_group_norm(const Vec& z, const IndexList& offsets, double gamma) {
  if (offsets.empty() || offsets.back() != z.size()) {
    throw DimensionError("prox_group_norm: partition does not match vector length");
  }
  Vec out = z;
  if (gamma == 0.0) return out;
  for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
    auto block = out.segment(offsets[t], offsets[t + 1] - offsets[t]);
    const double nrm = block.norm();
    if (nrm <= gamma) {
      block.setZero();
    } else {
      block *= 1.0 - gamma / nrm;
    }
  }
  return out;
}

Vec project_omega(const Vec& psi, const IndexList& offsets) {
  if (offsets.empty() || offsets.back() != psi.size()) {
    throw DimensionError("project_omega: partition does not match vector length");
  }
  Vec out = psi;
  for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
    auto block = out.segment(offsets[t], offsets[t + 1] - offsets[t]);
    const double nrm = block.norm();
    if (nrm > 1.0) block /= nrm;
  }
  return out;
}

std::pair<double, double> pd_stepsizes(const SolverConfig& config, const LiftingOperator& L) {
  const double norm = std::sqrt(L.norm_sq());
  const double sigma = config.pd_sigma.value_or(0.99 / norm);
  const double tau = config.pd_tau.value_or(0.99 / norm);
  if (!(sigma > 0.0) || !(tau > 0.0)) throw ConfigError("pd: stepsizes must be positive");
  if (!(sigma * tau * L.norm_sq() < 1.0)) {
    throw ConfigError("pd: stepsizes violate sigma * tau * ||L||^2 < 1 (sigma=" +
                      std::to_string(sigma) + ", tau=" + std::to_string(tau) +
                      ", ||L||^2=" + std::to_string(L.norm_sq()) + ")");
  }
  return {sigma, tau};
}

SolveResult solve(SolverKind kind, const ProblemData& problem, const LiftingOperator& L,
                  const SolverConfig& config, const WarmStart* warm) {
  switch (kind) {
    case SolverKind::PrimalDual: return pd_solve(problem, L, config, warm);
    case SolverKind::Admm: return admm_solve(problem, L, config, warm);
    case SolverKind::VarPro: return varpro_solve(problem, L, config, warm);
  }
  throw ConfigError("unknown solver kind");
}

HadamardSplit hadamard_value(const LiftingOperator& L, const Vec& x) {
  const Vec z = L.apply(x);
  HadamardSplit out;
  out.u = Vec::Zero(z.size());
  out.v = Vec::Zero(L.num_groups());
  for (Index t = 0; t < L.num_groups(); ++t) {
    const auto block = z.segment(L.block_begin(t), L.block_size(t));
    const double nrm = block.norm();
    if (nrm == 0.0) continue;
    const double root = std::sqrt(nrm);
    out.v[t] = root;
    out.u.segment(L.block_begin(t), L.block_size(t)) = block / root;
  }
  out.value = 0.5 * out.u.squaredNorm() + 0.5 * out.v.squaredNorm();
  return out;
}

namespace {

// Drops active groups lying entirely inside the union of inactive groups.
IndexList consistent_support(const LiftingOperator& L, const IndexList& active) {
  const SupportState S = compute_supports(L, active);
  IndexList out;
  for (Index t : active) {
    const auto& g = L.covering().group(t);
    if (std::any_of(g.begin(), g.end(), [&](Index i) { return S.x_mask[static_cast<std::size_t>(i)]; })) {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace

IndexList reported_support(const LiftingOperator& L, const Vec& x, double rel_tol) {
  return consistent_support(L, active_groups(L, x, rel_tol * x.norm()));
}

IndexList reported_support(const LiftingOperator& L, const SolveResult& result, double rel_tol) {
  if (result.z.size() != L.lifted_dim()) return reported_support(L, result.x, rel_tol);
  const Vec norms = L.block_norms(result.z);
  IndexList out;
  for (Index t = 0; t < norms.size(); ++t) {
    if (norms[t] > 0.0) out.push_back(t);
  }
  return consistent_support(L, out);
}

}  // namespace ogl
