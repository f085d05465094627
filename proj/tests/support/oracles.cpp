#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace ogl::testing {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

Vec gaussian_vec(Rng& rng, Index size) {
  std::normal_distribution<double> d(0.0, 1.0);
  Vec v(size);
  for (Index i = 0; i < size; ++i) v[i] = d(rng);
  return v;
}

Mat gaussian_mat(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = d(rng);
  }
  return M;
}

GroupCovering random_covering(Rng& rng, Index n, Index N, bool random_weights) {
  std::vector<IndexList> groups(static_cast<std::size_t>(N));
  std::vector<bool> covered(static_cast<std::size_t>(n), false);
  const Index max_size = std::max<Index>(1, std::min<Index>(n, 2 * n / N + 2));
  for (auto& g : groups) {
    const Index size = uniform_index(rng, 1, max_size);
    // contiguous windows mixed with scattered picks
    if (uniform(rng, 0.0, 1.0) < 0.5) {
      const Index start = uniform_index(rng, 0, n - size);
      for (Index i = start; i < start + size; ++i) g.push_back(i);
    } else {
      for (Index k = 0; k < size; ++k) g.push_back(uniform_index(rng, 0, n - 1));
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    for (Index i : g) covered[static_cast<std::size_t>(i)] = true;
  }
  for (Index i = 0; i < n; ++i) {
    if (!covered[static_cast<std::size_t>(i)]) {
      auto& g = groups[static_cast<std::size_t>(uniform_index(rng, 0, N - 1))];
      g.insert(std::upper_bound(g.begin(), g.end(), i), i);
    }
  }
  std::vector<double> w(static_cast<std::size_t>(N), 1.0);
  if (random_weights) {
    for (auto& wt : w) wt = uniform(rng, 0.5, 2.0);
  }
  return GroupCovering(n, std::move(groups), std::move(w));
}

GroupCovering random_partition(Rng& rng, Index n, Index N) {
  N = std::min(N, n);
  IndexList cuts;
  IndexList all(static_cast<std::size_t>(n - 1));
  std::iota(all.begin(), all.end(), Index{1});
  std::shuffle(all.begin(), all.end(), rng);
  cuts.assign(all.begin(), all.begin() + (N - 1));
  cuts.push_back(0);
  cuts.push_back(n);
  std::sort(cuts.begin(), cuts.end());
  std::vector<IndexList> groups;
  std::vector<double> w;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    IndexList g;
    for (Index i = cuts[k]; i < cuts[k + 1]; ++i) g.push_back(i);
    groups.push_back(std::move(g));
    w.push_back(uniform(rng, 0.5, 2.0));
  }
  return GroupCovering(n, std::move(groups), std::move(w));
}

GroupCovering random_sliding(Rng& rng, Index N, Index gs, Index os) {
  const Index n = N * gs - (N - 1) * os;
  std::vector<IndexList> groups;
  std::vector<double> w;
  for (Index t = 0; t < N; ++t) {
    IndexList g;
    for (Index j = 0; j < gs; ++j) g.push_back(t * (gs - os) + j);
    groups.push_back(std::move(g));
    w.push_back(uniform(rng, 0.5, 2.0));
  }
  return GroupCovering(n, std::move(groups), std::move(w));
}

IndexList dense_offsets(const GroupCovering& cov) {
  IndexList off{0};
  for (const auto& g : cov.groups()) off.push_back(off.back() + static_cast<Index>(g.size()));
  return off;
}

Mat dense_lift(const GroupCovering& cov) {
  const IndexList off = dense_offsets(cov);
  Mat L = Mat::Zero(off.back(), cov.dim());
  for (Index t = 0; t < cov.num_groups(); ++t) {
    Index row = off[static_cast<std::size_t>(t)];
    for (Index i : cov.group(t)) L(row++, i) = cov.weight(t);
  }
  return L;
}

DenseSupports dense_supports(const GroupCovering& cov, const Mask& active) {
  const IndexList off = dense_offsets(cov);
  DenseSupports s;
  s.x.assign(static_cast<std::size_t>(cov.dim()), true);
  s.z.assign(static_cast<std::size_t>(off.back()), false);
  for (Index t = 0; t < cov.num_groups(); ++t) {
    if (active[static_cast<std::size_t>(t)]) {
      for (Index k = off[static_cast<std::size_t>(t)]; k < off[static_cast<std::size_t>(t) + 1]; ++k) {
        s.z[static_cast<std::size_t>(k)] = true;
      }
    } else {
      for (Index i : cov.group(t)) s.x[static_cast<std::size_t>(i)] = false;
    }
  }
  const Mat L = dense_lift(cov);
  Vec ones_x(cov.dim());
  for (Index i = 0; i < cov.dim(); ++i) ones_x[i] = s.x[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const Vec lx = L * ones_x;
  s.l.resize(static_cast<std::size_t>(lx.size()));
  for (Index k = 0; k < lx.size(); ++k) s.l[static_cast<std::size_t>(k)] = lx[k] != 0.0;
  return s;
}

Mat diag_mask(const Mask& m, bool complement) {
  Mat P = Mat::Zero(static_cast<Index>(m.size()), static_cast<Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    P(static_cast<Index>(i), static_cast<Index>(i)) = (m[i] != complement) ? 1.0 : 0.0;
  }
  return P;
}

Mat dense_effective_lift(const GroupCovering& cov, const Mask& active) {
  const DenseSupports s = dense_supports(cov, active);
  const Mat L = dense_lift(cov);
  return L - diag_mask(s.z) * L * diag_mask(s.x, true);
}

Mask random_group_mask(Rng& rng, Index N, double prob) {
  Mask m(static_cast<std::size_t>(N));
  for (Index t = 0; t < N; ++t) m[static_cast<std::size_t>(t)] = uniform(rng, 0.0, 1.0) < prob;
  return m;
}

Vec random_support_vector(Rng& rng, const GroupCovering& cov, Mask& active) {
  const DenseSupports s = dense_supports(cov, active);
  Vec x = Vec::Zero(cov.dim());
  for (Index i = 0; i < cov.dim(); ++i) {
    if (s.x[static_cast<std::size_t>(i)]) x[i] = uniform(rng, 0.5, 1.5) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
  }
  for (Index t = 0; t < cov.num_groups(); ++t) {
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += x[i] * x[i];
    active[static_cast<std::size_t>(t)] = sq > 0.0;
  }
  return x;
}

DesignedInstance designed_instance(Rng& rng, const GroupCovering& cov, Index m, double lambda,
                                   double active_prob) {
  Mask active = random_group_mask(rng, cov.num_groups(), active_prob);
  Vec x = random_support_vector(rng, cov, active);
  const DenseSupports s = dense_supports(cov, active);

  IndexList E;
  for (Index i = 0; i < cov.dim(); ++i) {
    if (s.x[static_cast<std::size_t>(i)]) E.push_back(i);
  }
  Vec g = Vec::Zero(static_cast<Index>(E.size()));
  for (Index t = 0; t < cov.num_groups(); ++t) {
    if (!active[static_cast<std::size_t>(t)]) continue;
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += x[i] * x[i];
    const double nrm = std::sqrt(sq);
    for (std::size_t k = 0; k < E.size(); ++k) {
      const auto& grp = cov.group(t);
      if (std::binary_search(grp.begin(), grp.end(), E[k])) {
        g[static_cast<Index>(k)] += cov.weight(t) * x[E[k]] / nrm;
      }
    }
  }
  const Mat A = gaussian_mat(rng, m, cov.dim());
  Mat AE(m, static_cast<Index>(E.size()));
  for (std::size_t k = 0; k < E.size(); ++k) AE.col(static_cast<Index>(k)) = A.col(E[k]);
  Vec y = A * x;
  if (!E.empty()) {
    const Vec c = (AE.transpose() * AE).ldlt().solve(g);
    y += lambda * AE * c;
  }
  return {ProblemData(DesignMatrix(A), y, lambda), std::move(x), std::move(active)};
}

double dense_objective(const ProblemData& problem, const GroupCovering& cov, const Vec& x) {
  const Vec r = problem.A.to_dense() * x - problem.y;
  double pen = 0.0;
  for (Index t = 0; t < cov.num_groups(); ++t) {
    double sq = 0.0;
    for (Index i : cov.group(t)) sq += x[i] * x[i];
    pen += cov.weight(t) * std::sqrt(sq);
  }
  return 0.5 * r.squaredNorm() / problem.lambda + pen;
}

Vec proximal_gradient_oracle(const ProblemData& problem, const GroupCovering& partition,
                             double tol, Index max_iters) {
  const Mat A = problem.A.to_dense();
  const double lambda = problem.lambda;
  const double lip = A.operatorNorm() * A.operatorNorm() / lambda;
  const double step = 1.0 / lip;
  const auto prox = [&](const Vec& v) {
    Vec out = v;
    for (Index t = 0; t < partition.num_groups(); ++t) {
      double sq = 0.0;
      for (Index i : partition.group(t)) sq += v[i] * v[i];
      const double nrm = std::sqrt(sq);
      const double shrink = nrm > step * partition.weight(t) ? 1.0 - step * partition.weight(t) / nrm : 0.0;
      for (Index i : partition.group(t)) out[i] = shrink * v[i];
    }
    return out;
  };
  const Vec Aty = A.transpose() * problem.y;
  const Mat G = A.transpose() * A;
  Vec x = Vec::Zero(A.cols());
  Vec yk = x;
  double theta = 1.0;
  for (Index k = 0; k < max_iters; ++k) {
    const Vec grad = (G * yk - Aty) / lambda;
    const Vec x_next = prox(yk - step * grad);
    const double change = (x_next - x).norm();
    // gradient-mapping restart
    if ((yk - x_next).dot(x_next - x) > 0.0) {
      theta = 1.0;
      yk = x_next;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      yk = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
      theta = theta_next;
    }
    x = x_next;
    if (change <= tol * (1.0 + x.norm())) break;
  }
  return x;
}

}  // namespace ogl::testing
