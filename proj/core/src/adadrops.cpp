#include "ogl/adadrops.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <string>

#include "json.hpp"

#include "ogl/errors.hpp"

namespace ogl {

std::string_view to_string(UpdateOption option) {
  return option == UpdateOption::Lasso ? "I" : "II";
}

UpdateOption parse_update_option(std::string_view name) {
  if (name == "lasso" || name == "I") return UpdateOption::Lasso;
  if (name == "ogn" || name == "II") return UpdateOption::Ogn;
  throw ConfigError("unknown support-update option '" + std::string(name) +
                    "' (expected lasso or ogn)");
}

Vec RestrictedProblem::scatter(const Vec& x_sub, Index n) const {
  Vec x = Vec::Zero(n);
  for (std::size_t k = 0; k < columns.size(); ++k) x[columns[k]] = x_sub[static_cast<Index>(k)];
  return x;
}

Vec RestrictedProblem::gather(const Vec& x) const {
  Vec out(kappa());
  for (std::size_t k = 0; k < columns.size(); ++k) out[static_cast<Index>(k)] = x[columns[k]];
  return out;
}

Vec RestrictedProblem::gather_lifted(const Vec& z) const {
  Vec out(static_cast<Index>(row_map.size()));
  for (std::size_t k = 0; k < row_map.size(); ++k) out[static_cast<Index>(k)] = z[row_map[k]];
  return out;
}

void RestrictedProblem::scatter_lifted(const Vec& z_sub, Vec& z) const {
  for (std::size_t k = 0; k < row_map.size(); ++k) z[row_map[k]] = z_sub[static_cast<Index>(k)];
}

Vec RestrictedProblem::gather_groups(const Vec& v) const {
  Vec out(static_cast<Index>(group_map.size()));
  for (std::size_t k = 0; k < group_map.size(); ++k) out[static_cast<Index>(k)] = v[group_map[k]];
  return out;
}

void RestrictedProblem::scatter_groups(const Vec& v_sub, Vec& v) const {
  for (std::size_t k = 0; k < group_map.size(); ++k) v[group_map[k]] = v_sub[static_cast<Index>(k)];
}

RestrictedProblem build_restricted(const ProblemData& problem, const LiftingOperator& L,
                                   std::span<const Index> active) {
  validate(problem, L);
  RestrictedProblem out;
  out.support = compute_supports(L, active);
  out.columns = out.support.coord_support;
  out.gram_diag = effective_gram_diag(L, out.support);
  if (out.columns.empty()) return out;

  const auto& cov = L.covering();
  std::vector<Index> position(static_cast<std::size_t>(L.dim()), -1);
  for (std::size_t k = 0; k < out.columns.size(); ++k) {
    position[static_cast<std::size_t>(out.columns[k])] = static_cast<Index>(k);
  }

  std::vector<IndexList> groups;
  std::vector<double> weights;
  for (Index t : out.support.active_groups) {
    IndexList g;
    Index row = L.block_begin(t);
    for (Index i : cov.group(t)) {
      const Index pos = position[static_cast<std::size_t>(i)];
      if (pos >= 0) {
        g.push_back(pos);
        out.row_map.push_back(row);
      }
      ++row;
    }
    if (g.empty()) continue;
    groups.push_back(std::move(g));
    weights.push_back(cov.weight(t));
    out.group_map.push_back(t);
  }

  out.problem.emplace(problem.A.select_columns(out.columns), problem.y, problem.lambda);
  out.lifting.emplace(GroupCovering(out.kappa(), std::move(groups), std::move(weights)));
  return out;
}

SupportUpdate support_update(const ProblemData& problem, const LiftingOperator& L,
                             const SupportState& S, const Vec& x, UpdateOption option,
                             Index growth_cap, double outer_tol) {
  if (growth_cap < 1) throw ConfigError("support_update: growth cap must be at least 1");
  const LassoCertificate beta = lasso_certificate(problem, x);
  SupportUpdate out;
  out.margins = option == UpdateOption::Lasso
                    ? lasso_margins(L, beta.beta)
                    : ogn_margins(L, min_norm_certificate(L, S, beta.beta));
  for (Index t = 0; t < L.num_groups(); ++t) {
    if (!S.active[static_cast<std::size_t>(t)] && out.margins[t] >= 1.0 + outer_tol) {
      out.violating.push_back(t);
    }
  }
  out.added = out.violating;
  std::stable_sort(out.added.begin(), out.added.end(),
                   [&](Index a, Index b) { return out.margins[a] > out.margins[b]; });
  if (static_cast<Index>(out.added.size()) > growth_cap) {
    out.added.resize(static_cast<std::size_t>(growth_cap));
  }
  std::sort(out.added.begin(), out.added.end());
  return out;
}

double max_inactive_ogn_margin(const ProblemData& problem, const LiftingOperator& L,
                               const SupportState& S, const Vec& x) {
  const LassoCertificate beta = lasso_certificate(problem, x);
  const Vec margins = ogn_margins(L, min_norm_certificate(L, S, beta.beta));
  double worst = 0.0;
  for (Index t = 0; t < L.num_groups(); ++t) {
    if (!S.active[static_cast<std::size_t>(t)]) worst = std::max(worst, margins[t]);
  }
  return worst;
}

void write_rounds_jsonl(std::ostream& os, const std::vector<RoundRecord>& rounds) {
  for (const auto& r : rounds) {
    nlohmann::json added = nlohmann::json::array();
    for (Index t : r.added_groups) added.push_back(t + 1);
    nlohmann::json j = {{"round", r.round},
                        {"kappa", r.kappa},
                        {"added_groups", added},
                        {"option", std::string(to_string(r.option))}};
    os << j.dump() << '\n';
  }
}

constexpr double kVarProRestart = 1e-6;

AdaDropsResult adadrops_run(const ProblemData& problem, const LiftingOperator& L,
                            SolverKind solver, const AdaDropsConfig& config) {
  validate(problem, L);
  if (config.init_size < 1) throw ConfigError("adadrops: init size must be at least 1");
  if (config.growth_cap < 1) throw ConfigError("adadrops: growth cap must be at least 1");
  if (config.max_outer_rounds < 1) throw ConfigError("adadrops: max outer rounds must be at least 1");

  const auto start = std::chrono::steady_clock::now();
  const Index n = L.dim();
  const Index N = L.num_groups();

  IndexList active;
  if (config.initial_groups) {
    active = *config.initial_groups;
    for (Index t : active) {
      if (t < 0 || t >= N) throw ConfigError("adadrops: initial group out of range");
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
  } else {
    active = correlation_init(problem, L, std::min(config.init_size, N));
  }

  Vec x = Vec::Zero(n);
  Vec psi = Vec::Zero(L.lifted_dim());
  Vec z = Vec::Zero(L.lifted_dim());
  Vec v = Vec::Ones(N);

  AdaDropsResult out;
  Index iter_offset = 0;
  for (Index round = 0; round < config.max_outer_rounds; ++round) {
    const RestrictedProblem R = build_restricted(problem, L, active);

    RoundRecord rec;
    rec.round = round;
    rec.kappa = R.kappa();
    rec.option = config.option;

    bool inner_converged = true;
    if (R.empty()) {
      x.setZero();
    } else {
      WarmStart warm;
      warm.x = R.gather(x);
      warm.psi = R.gather_lifted(psi);
      warm.z = R.gather_lifted(z);
      // groups driven to zero in an earlier round restart at 1
      Vec vr = R.gather_groups(v);
      const double floor = kVarProRestart * std::max(1.0, vr.cwiseAbs().maxCoeff());
      for (Index t = 0; t < vr.size(); ++t) {
        if (std::abs(vr[t]) < floor) vr[t] = 1.0;
      }
      warm.v = std::move(vr);
      SolveResult res = solve(solver, *R.problem, *R.lifting, config.inner, &warm);
      x = R.scatter(res.x, n);
      if (res.psi.size() > 0) R.scatter_lifted(res.psi, psi);
      if (res.z.size() > 0) R.scatter_lifted(res.z, z);
      if (res.v.size() > 0) R.scatter_groups(res.v, v);
      inner_converged = res.converged;
      rec.inner_iterations = res.iterations;

      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const double base = elapsed - (res.trace.empty() ? 0.0 : res.trace.back().seconds);
      for (TraceRecord r : res.trace.records) {
        r.iter += iter_offset;
        r.kappa = R.kappa();
        r.seconds += base;
        out.trace.records.push_back(r);
      }
      iter_offset += res.iterations;
    }
    rec.inner_converged = inner_converged;
    rec.objective = objective(problem, L, x);

    const SupportUpdate upd =
        support_update(problem, L, R.support, x, config.option, config.growth_cap, config.outer_tol);
    rec.added_groups = upd.added;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rounds.push_back(rec);

    if (upd.added.empty() && inner_converged) {
      out.converged = true;
      break;
    }
    IndexList merged;
    std::set_union(active.begin(), active.end(), upd.added.begin(), upd.added.end(),
                   std::back_inserter(merged));
    active = std::move(merged);
  }

  if (!out.converged) {
    std::string ids;
    for (Index t : active) ids += (ids.empty() ? "" : ",") + std::to_string(t + 1);
    throw ConvergenceError("adadrops: exceeded " + std::to_string(config.max_outer_rounds) +
                               " outer rounds; last support {" + ids + "}",
                           0.0);
  }
  out.x = std::move(x);
  out.active = std::move(active);
  out.objective = out.rounds.back().objective;
  out.iterations = iter_offset;
  return out;
}

}  // namespace ogl
