#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace ogl {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using IndexList = std::vector<Index>;
using Mask = std::vector<bool>;

/// A weighted covering {G_1, ..., G_N} of the coordinates {0, ..., n-1}.
///
/// Indices are 0-based in memory; files and user-facing output use 1-based
/// indices (see data.hpp). Each group is stored sorted and deduplicated.
/// Construction throws CoveringError when a group is empty, holds an index
/// outside [0, n), carries a non-positive weight, or when the union of the
/// groups misses a coordinate.
class GroupCovering {
 public:
  GroupCovering(Index n, std::vector<IndexList> groups,
                std::vector<double> weights);

  /// All weights equal to `weight`.
  GroupCovering(Index n, std::vector<IndexList> groups, double weight = 1.0);

  Index dim() const noexcept { return n_; }
  Index num_groups() const noexcept { return static_cast<Index>(groups_.size()); }
  const IndexList& group(Index t) const { return groups_[static_cast<std::size_t>(t)]; }
  double weight(Index t) const { return weights_[static_cast<std::size_t>(t)]; }
  const std::vector<IndexList>& groups() const noexcept { return groups_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// True when every coordinate belongs to exactly one group.
  bool is_partition() const noexcept { return partition_; }

 private:
  Index n_;
  std::vector<IndexList> groups_;
  std::vector<double> weights_;
  bool partition_ = false;
};

/// Implicit lifting operator L : R^n -> R^p with (Lx)_{J_t} = w_t x_{G_t}.
///
/// Rows are enumerated group-major, then by increasing coordinate inside the
/// group. Every row has a single nonzero (column `row_column(k)`, value
/// `row_weight(k)`), so all applications cost O(p) and L is never formed.
class LiftingOperator {
 public:
  explicit LiftingOperator(GroupCovering covering);

  const GroupCovering& covering() const noexcept { return covering_; }
  Index dim() const noexcept { return covering_.dim(); }
  Index lifted_dim() const noexcept { return static_cast<Index>(row_column_.size()); }
  Index num_groups() const noexcept { return covering_.num_groups(); }

  Index block_begin(Index t) const { return offsets_[static_cast<std::size_t>(t)]; }
  Index block_end(Index t) const { return offsets_[static_cast<std::size_t>(t) + 1]; }
  Index block_size(Index t) const { return block_end(t) - block_begin(t); }
  const IndexList& offsets() const noexcept { return offsets_; }

  Index row_column(Index k) const { return row_column_[static_cast<std::size_t>(k)]; }
  Index row_group(Index k) const { return row_group_[static_cast<std::size_t>(k)]; }
  double row_weight(Index k) const { return row_weight_[static_cast<std::size_t>(k)]; }

  /// diag(L^T L): entry i is the sum of w_t^2 over the groups containing i.
  const Vec& gram_diag() const noexcept { return gram_diag_; }
  /// Squared spectral norm, max_i (L^T L)_ii since the columns are orthogonal.
  double norm_sq() const noexcept { return norm_sq_; }

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& u) const;

  /// ||z_{J_t}|| for a lifted vector z.
  double block_norm(const Vec& z, Index t) const;
  /// (||z_{J_t}||)_t for every group.
  Vec block_norms(const Vec& z) const;

 private:
  GroupCovering covering_;
  IndexList offsets_;
  IndexList row_column_;
  IndexList row_group_;
  std::vector<double> row_weight_;
  Vec gram_diag_;
  double norm_sq_ = 0.0;
};

/// Active groups I, the extended supports E_x, E_z, E_L and their masks.
struct SupportState {
  Mask active;              // size N
  IndexList active_groups;  // sorted
  IndexList coord_support;  // E_x, sorted, subset of [0, n)
  IndexList group_support;  // E_z, sorted, subset of [0, p)
  IndexList lifted_support; // E_L, sorted, subset of E_z
  Mask x_mask;              // realizes P_{T_x}
  Mask z_mask;              // realizes P_{T_z}
  Mask l_mask;              // realizes P_{T_L}

  Index kappa() const noexcept { return static_cast<Index>(coord_support.size()); }
};

LiftingOperator build_lifting(const GroupCovering& covering);

Vec lift(const LiftingOperator& L, const Vec& x);
Vec adjoint_lift(const LiftingOperator& L, const Vec& u);

/// sum_t w_t ||x_{G_t}|| = ||Lx||_{1,2}.
double group_norm(const LiftingOperator& L, const Vec& x);

/// (||x_{G_t}||)_t, unweighted.
Vec group_coord_norms(const LiftingOperator& L, const Vec& x);

/// {t : ||x_{G_t}|| > tol}.
IndexList active_groups(const LiftingOperator& L, const Vec& x, double tol = 0.0);

/// Throws DimensionError for out-of-range group ids. Duplicates are ignored.
SupportState compute_supports(const LiftingOperator& L, std::span<const Index> active);

/// L-hat x = Lx - P_{T_z} L P_{T_x^perp} x.
Vec effective_lift_apply(const LiftingOperator& L, const SupportState& S, const Vec& x);

/// L-hat^T u, the adjoint of effective_lift_apply.
Vec effective_lift_adjoint(const LiftingOperator& L, const SupportState& S, const Vec& u);

/// diag(L-hat^T L-hat); every entry is strictly positive.
Vec effective_gram_diag(const LiftingOperator& L, const SupportState& S);

/// Zeroes the entries of v outside (or, with complement, inside) the mask.
Vec mask_project(const Vec& v, const Mask& mask, bool complement = false);

}  // namespace ogl
