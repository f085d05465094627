#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ogl/problem.hpp"
#include "ogl/solvers.hpp"

namespace ogl {

/// A sparse design and its labels as read from LIBSVM text.
struct LabeledData {
  SpMat A;
  Vec y;
};

/// One sample per line: `label idx:val idx:val ...`, 1-based indices in any
/// order. Blank lines and lines starting with '#' are skipped. The column
/// count is the largest index seen, or `num_features` when that is larger.
/// Throws ParseError with the line number on a malformed token.
LabeledData parse_libsvm(std::istream& in, Index num_features = 0);
LabeledData parse_libsvm_file(const std::string& path, Index num_features = 0);

/// Writes the nonzeros of every row with 1-based indices and full precision.
void write_libsvm(std::ostream& out, const DesignMatrix& A, const Vec& y);

/// Group file: a header `n N`, then one line per group `w k i_1 ... i_k`
/// with 1-based coordinates. '#' starts a comment.
GroupCovering read_groups(std::istream& in);
GroupCovering read_groups_file(const std::string& path);
void write_groups(std::ostream& out, const GroupCovering& covering);

/// Sliding-window instance: G_t = {t (gs - os), ..., t (gs - os) + gs - 1}.
struct SyntheticSpec {
  Index num_groups = 100;
  Index group_size = 10;
  Index overlap = 0;
  /// Defaults to sqrt(group_size).
  std::optional<double> weight;
  /// Defaults to round(n / 2).
  std::optional<Index> rows;
  std::uint64_t seed = 0;
  /// lambda = lambda_max / lambda_ratio unless `lambda` is set.
  double lambda_ratio = 10.0;
  std::optional<double> lambda;
};

struct SyntheticInstance {
  ProblemData problem;
  GroupCovering covering;
  double lambda_max = 0.0;
};

/// rows x cols matrix of i.i.d. standard normal entries from a
/// std::mt19937_64 seeded with {seed, stream}, filled column-major.
Mat gaussian_matrix(Index rows, Index cols, std::uint64_t seed, std::uint64_t stream);

/// n = N gs - (N - 1) os
Index sliding_dim(Index num_groups, Index group_size, Index overlap);

GroupCovering sliding_covering(Index num_groups, Index group_size, Index overlap, double weight);

/// A and y have i.i.d. standard normal entries; A comes from stream 1 and y
/// from stream 2 of gaussian_matrix.
SyntheticInstance gen_sliding(const SyntheticSpec& spec);

/// Complete fanout-ary tree of the given depth, nodes numbered breadth-first.
/// One group {node} + children per internal node (in breadth-first order),
/// then one singleton per leaf. Unit weights.
GroupCovering gen_tree_groups(Index depth, Index fanout);

/// min_X (1/(2 lambda)) ||AX - Y||_F^2 + sum_j ||X_{j,:}|| as a group problem
/// over vec(X) (column-major): block-diagonal design, G_j = {j, j+n, ...}.
struct MultitaskInstance {
  ProblemData problem;
  GroupCovering covering;
};

MultitaskInstance multitask_to_group(const Mat& A, const Mat& Y, double lambda);

/// max_t ||A_{G_t}^T y|| / w_t, the smallest lambda with x = 0 optimal.
double lambda_max(const DesignMatrix& A, const Vec& y, const LiftingOperator& L);
/// ||A^T y||_inf
double lasso_lambda_max(const DesignMatrix& A, const Vec& y);

struct LambdaTuning {
  double lambda = 0.0;
  Index active_groups = 0;
  int evaluations = 0;
  bool hit_target = false;
  IndexList active;        // reported support at `lambda`
  Vec x;                   // solution at `lambda`
  bool converged = false;  // of the solve that produced x
};

/// Warm-started descent lambda_max * 0.8^k (not below lambda_max * floor_ratio)
/// until at least `lo` groups are reported active, then bisection on
/// log(lambda) until the count lies in [lo, hi]. Returns the closest attempt
/// when the target is not hit.
LambdaTuning tune_lambda(const DesignMatrix& A, const Vec& y, const LiftingOperator& L,
                         Index lo, Index hi, SolverKind solver, const SolverConfig& config,
                         int max_evaluations = 40, double floor_ratio = 1e-4,
                         double rel_tol = 1e-6);

}  // namespace ogl
