#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "ogl/certificates.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

/// Lasso: ||beta_{G_t}|| / w_t drives support growth (option I).
/// Ogn: ||u_{J_t}|| with u = L-hat (L-hat^T L-hat)^{-1} beta (option II).
enum class UpdateOption { Lasso, Ogn };

std::string_view to_string(UpdateOption option);  // "I" or "II"
/// Accepts "lasso", "ogn", "I", "II".
UpdateOption parse_update_option(std::string_view name);

struct AdaDropsConfig {
  UpdateOption option = UpdateOption::Ogn;
  /// Groups taken by correlation_init in round 0, clamped to N.
  Index init_size = 10;
  /// At most this many groups join per round (largest margins first).
  Index growth_cap = 10;
  SolverConfig inner;
  /// A group outside I violates when its margin is >= 1 + outer_tol.
  double outer_tol = 0.0;
  Index max_outer_rounds = 1000;
  /// Replaces correlation_init when set (0-based group ids).
  std::optional<IndexList> initial_groups;
};

/// The problem restricted to E_x, compacted to |E_x| columns.
///
/// The restricted covering is {G_t cap E_x : t in I}. `group_map` sends a
/// restricted group to its original id and `row_map` sends a restricted
/// lifted row to its original lifted row. When E_x is empty `problem` and
/// `lifting` are unset and the restricted solution is x = 0.
struct RestrictedProblem {
  SupportState support;
  IndexList columns;
  std::optional<ProblemData> problem;
  std::optional<LiftingOperator> lifting;
  IndexList group_map;
  IndexList row_map;
  Vec gram_diag;  // diag(L-hat^T L-hat) over all n coordinates

  Index kappa() const noexcept { return static_cast<Index>(columns.size()); }
  bool empty() const noexcept { return columns.empty(); }

  /// x_sub -> x with zeros off E_x.
  Vec scatter(const Vec& x_sub, Index n) const;
  /// x -> x_{E_x}.
  Vec gather(const Vec& x) const;
  /// Lifted vector of the full problem -> rows of the restricted lift.
  Vec gather_lifted(const Vec& z) const;
  void scatter_lifted(const Vec& z_sub, Vec& z) const;
  Vec gather_groups(const Vec& v) const;
  void scatter_groups(const Vec& v_sub, Vec& v) const;
};

RestrictedProblem build_restricted(const ProblemData& problem, const LiftingOperator& L,
                                   std::span<const Index> active);

struct SupportUpdate {
  IndexList added;   // sorted ascending, at most growth_cap entries
  IndexList violating;  // every violating group outside I, before truncation
  Vec margins;       // per group; the option's statistic
};

/// beta is computed with the full A.
SupportUpdate support_update(const ProblemData& problem, const LiftingOperator& L,
                             const SupportState& S, const Vec& x, UpdateOption option,
                             Index growth_cap = 10, double outer_tol = 0.0);

/// max over t outside I of ||u_{J_t}||, u = L-hat (L-hat^T L-hat)^{-1} beta(x).
/// Returns 0 when I covers every group.
double max_inactive_ogn_margin(const ProblemData& problem, const LiftingOperator& L,
                               const SupportState& S, const Vec& x);

struct RoundRecord {
  Index round = 0;
  Index kappa = 0;
  IndexList added_groups;
  UpdateOption option = UpdateOption::Ogn;
  Index inner_iterations = 0;
  bool inner_converged = false;
  double objective = 0.0;
  double seconds = 0.0;
};

/// Writes {round, kappa, added_groups (1-based), option} per line.
void write_rounds_jsonl(std::ostream& os, const std::vector<RoundRecord>& rounds);

struct AdaDropsResult {
  Vec x;
  /// Inner iterations of every round, iteration counts and times cumulative.
  SolverTrace trace;
  std::vector<RoundRecord> rounds;
  IndexList active;  // final I
  bool converged = false;
  double objective = 0.0;
  Index iterations = 0;
};

/// Throws ConvergenceError (listing the last I) when max_outer_rounds is
/// exceeded; inner solver errors propagate.
AdaDropsResult adadrops_run(const ProblemData& problem, const LiftingOperator& L,
                            SolverKind solver, const AdaDropsConfig& config);

}  // namespace ogl
