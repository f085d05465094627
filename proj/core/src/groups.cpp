#include "ogl/groups.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ogl/errors.hpp"

namespace ogl {

namespace {

void check_dim(Index got, Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace

GroupCovering::GroupCovering(Index n, std::vector<IndexList> groups,
                             std::vector<double> weights)
    : n_(n), groups_(std::move(groups)), weights_(std::move(weights)) {
  if (n_ <= 0) throw CoveringError("covering dimension must be positive", -1);
  if (groups_.empty()) throw CoveringError("covering has no groups", -1);
  if (weights_.size() != groups_.size()) {
    throw CoveringError("expected " + std::to_string(groups_.size()) + " weights, got " +
                            std::to_string(weights_.size()),
                        -1);
  }
  std::vector<int> hits(static_cast<std::size_t>(n_), 0);
  for (std::size_t t = 0; t < groups_.size(); ++t) {
    const auto tt = static_cast<std::ptrdiff_t>(t);
    auto& g = groups_[t];
    if (g.empty()) throw CoveringError("group " + std::to_string(t + 1) + " is empty", tt);
    if (!(weights_[t] > 0.0) || !std::isfinite(weights_[t])) {
      throw CoveringError("group " + std::to_string(t + 1) + " has non-positive weight", tt);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (g.front() < 0 || g.back() >= n_) {
      throw CoveringError("group " + std::to_string(t + 1) + " has an index outside [1, " +
                              std::to_string(n_) + "]",
                          tt);
    }
    for (Index i : g) ++hits[static_cast<std::size_t>(i)];
  }
  partition_ = true;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] == 0) {
      throw CoveringError("coordinate " + std::to_string(i + 1) + " is not covered by any group",
                          -1);
    }
    if (hits[i] > 1) partition_ = false;
  }
}

GroupCovering::GroupCovering(Index n, std::vector<IndexList> groups, double weight)
    : GroupCovering(n, groups, std::vector<double>(groups.size(), weight)) {}

LiftingOperator::LiftingOperator(GroupCovering covering) : covering_(std::move(covering)) {
  const Index N = covering_.num_groups();
  offsets_.reserve(static_cast<std::size_t>(N) + 1);
  offsets_.push_back(0);
  for (Index t = 0; t < N; ++t) {
    const auto& g = covering_.group(t);
    const double w = covering_.weight(t);
    for (Index i : g) {
      row_column_.push_back(i);
      row_group_.push_back(t);
      row_weight_.push_back(w);
    }
    offsets_.push_back(static_cast<Index>(row_column_.size()));
  }
  gram_diag_ = Vec::Zero(covering_.dim());
  for (std::size_t k = 0; k < row_column_.size(); ++k) {
    gram_diag_[row_column_[k]] += row_weight_[k] * row_weight_[k];
  }
  norm_sq_ = gram_diag_.maxCoeff();
}

Vec LiftingOperator::apply(const Vec& x) const {
  check_dim(x.size(), dim(), "lift");
  const Index p = lifted_dim();
  Vec z(p);
  for (Index k = 0; k < p; ++k) z[k] = row_weight(k) * x[row_column(k)];
  return z;
}

Vec LiftingOperator::apply_adjoint(const Vec& u) const {
  check_dim(u.size(), lifted_dim(), "adjoint_lift");
  Vec x = Vec::Zero(dim());
  const Index p = lifted_dim();
  for (Index k = 0; k < p; ++k) x[row_column(k)] += row_weight(k) * u[k];
  return x;
}

double LiftingOperator::block_norm(const Vec& z, Index t) const {
  return z.segment(block_begin(t), block_size(t)).norm();
}

Vec LiftingOperator::block_norms(const Vec& z) const {
  check_dim(z.size(), lifted_dim(), "block_norms");
  const Index N = num_groups();
  Vec out(N);
  for (Index t = 0; t < N; ++t) out[t] = block_norm(z, t);
  return out;
}

LiftingOperator build_lifting(const GroupCovering& covering) { return LiftingOperator(covering); }

Vec lift(const LiftingOperator& L, const Vec& x) { return L.apply(x); }

Vec adjoint_lift(const LiftingOperator& L, const Vec& u) { return L.apply_adjoint(u); }

double group_norm(const LiftingOperator& L, const Vec& x) {
  check_dim(x.size(), L.dim(), "group_norm");
  double total = 0.0;
  const auto& cov = L.covering();
  for (Index t = 0; t < cov.num_groups(); ++t) {
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += x[i] * x[i];
    total += cov.weight(t) * std::sqrt(sq);
  }
  return total;
}

Vec group_coord_norms(const LiftingOperator& L, const Vec& x) {
  check_dim(x.size(), L.dim(), "group_coord_norms");
  const auto& cov = L.covering();
  Vec out(cov.num_groups());
  for (Index t = 0; t < cov.num_groups(); ++t) {
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += x[i] * x[i];
    out[t] = std::sqrt(sq);
  }
  return out;
}

IndexList active_groups(const LiftingOperator& L, const Vec& x, double tol) {
  const Vec norms = group_coord_norms(L, x);
  IndexList out;
  for (Index t = 0; t < norms.size(); ++t) {
    if (norms[t] > tol) out.push_back(t);
  }
  return out;
}

SupportState compute_supports(const LiftingOperator& L, std::span<const Index> active) {
  const Index N = L.num_groups();
  const Index n = L.dim();
  const Index p = L.lifted_dim();
  SupportState S;
  S.active.assign(static_cast<std::size_t>(N), false);
  for (Index t : active) {
    if (t < 0 || t >= N) {
      throw DimensionError("active group " + std::to_string(t + 1) + " outside [1, " +
                           std::to_string(N) + "]");
    }
    S.active[static_cast<std::size_t>(t)] = true;
  }
  for (Index t = 0; t < N; ++t) {
    if (S.active[static_cast<std::size_t>(t)]) S.active_groups.push_back(t);
  }

  // E_x: coordinates untouched by every inactive group.
  S.x_mask.assign(static_cast<std::size_t>(n), true);
  const auto& cov = L.covering();
  for (Index t = 0; t < N; ++t) {
    if (S.active[static_cast<std::size_t>(t)]) continue;
    for (Index i : cov.group(t)) S.x_mask[static_cast<std::size_t>(i)] = false;
  }
  for (Index i = 0; i < n; ++i) {
    if (S.x_mask[static_cast<std::size_t>(i)]) S.coord_support.push_back(i);
  }

  S.z_mask.assign(static_cast<std::size_t>(p), false);
  S.l_mask.assign(static_cast<std::size_t>(p), false);
  for (Index k = 0; k < p; ++k) {
    if (S.active[static_cast<std::size_t>(L.row_group(k))]) {
      S.z_mask[static_cast<std::size_t>(k)] = true;
      S.group_support.push_back(k);
    }
    // supp(L P_{T_x} 1): rows whose single column lies in E_x.
    if (S.x_mask[static_cast<std::size_t>(L.row_column(k))]) {
      S.l_mask[static_cast<std::size_t>(k)] = true;
      S.lifted_support.push_back(k);
    }
  }
  return S;
}

Vec effective_lift_apply(const LiftingOperator& L, const SupportState& S, const Vec& x) {
  check_dim(x.size(), L.dim(), "effective_lift_apply");
  const Index p = L.lifted_dim();
  Vec z(p);
  for (Index k = 0; k < p; ++k) {
    const Index j = L.row_column(k);
    const bool leaked = S.z_mask[static_cast<std::size_t>(k)] && !S.x_mask[static_cast<std::size_t>(j)];
    z[k] = leaked ? 0.0 : L.row_weight(k) * x[j];
  }
  return z;
}

Vec effective_lift_adjoint(const LiftingOperator& L, const SupportState& S, const Vec& u) {
  check_dim(u.size(), L.lifted_dim(), "effective_lift_adjoint");
  Vec x = Vec::Zero(L.dim());
  const Index p = L.lifted_dim();
  for (Index k = 0; k < p; ++k) {
    const Index j = L.row_column(k);
    if (S.z_mask[static_cast<std::size_t>(k)] && !S.x_mask[static_cast<std::size_t>(j)]) continue;
    x[j] += L.row_weight(k) * u[k];
  }
  return x;
}

Vec effective_gram_diag(const LiftingOperator& L, const SupportState& S) {
  Vec d = Vec::Zero(L.dim());
  const Index p = L.lifted_dim();
  for (Index k = 0; k < p; ++k) {
    const Index j = L.row_column(k);
    const bool in_ex = S.x_mask[static_cast<std::size_t>(j)];
    const bool active = S.z_mask[static_cast<std::size_t>(k)];
    // Coordinates outside E_x only keep contributions from inactive groups.
    if (in_ex || !active) d[j] += L.row_weight(k) * L.row_weight(k);
  }
  return d;
}

Vec mask_project(const Vec& v, const Mask& mask, bool complement) {
  check_dim(v.size(), static_cast<Index>(mask.size()), "mask_project");
  Vec out = v;
  for (Index i = 0; i < v.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)] == complement) out[i] = 0.0;
  }
  return out;
}

}  // namespace ogl
