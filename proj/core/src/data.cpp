#include "ogl/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ogl/errors.hpp"

namespace ogl {

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto pos = s.find('#');
  return trim(pos == std::string_view::npos ? s : s.substr(0, pos));
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace

Mat gaussian_matrix(Index rows, Index cols, std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = dist(rng);
  }
  return out;
}

LabeledData parse_libsvm(std::istream& in, Index num_features) {
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> labels;
  Index max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = split_ws(body);
    double label = 0.0;
    if (!parse_number(tokens[0], label)) {
      throw ParseError("libsvm: bad label '" + std::string(tokens[0]) + "'", line_no);
    }
    const Index row = static_cast<Index>(labels.size());
    labels.push_back(label);
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto tok = tokens[k];
      const auto colon = tok.find(':');
      Index idx = 0;
      double val = 0.0;
      if (colon == std::string_view::npos || !parse_number(tok.substr(0, colon), idx) ||
          !parse_number(tok.substr(colon + 1), val)) {
        throw ParseError("libsvm: malformed feature '" + std::string(tok) + "'", line_no);
      }
      if (idx < 1) throw ParseError("libsvm: feature index must be >= 1", line_no);
      max_col = std::max(max_col, idx);
      entries.emplace_back(row, idx - 1, val);
    }
  }
  LabeledData out;
  const Index n = std::max(max_col, num_features);
  out.A = SpMat(static_cast<Index>(labels.size()), n);
  out.A.setFromTriplets(entries.begin(), entries.end());
  out.A.makeCompressed();
  out.y = Eigen::Map<const Vec>(labels.data(), static_cast<Index>(labels.size()));
  return out;
}

LabeledData parse_libsvm_file(const std::string& path, Index num_features) {
  auto in = open_input(path);
  return parse_libsvm(in, num_features);
}

void write_libsvm(std::ostream& out, const DesignMatrix& A, const Vec& y) {
  if (A.rows() != y.size()) throw DimensionError("write_libsvm: A and y disagree");
  const Eigen::SparseMatrix<double, Eigen::RowMajor> R =
      A.is_sparse() ? Eigen::SparseMatrix<double, Eigen::RowMajor>(A.sparse())
                    : Eigen::SparseMatrix<double, Eigen::RowMajor>(A.dense().sparseView());
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < R.rows(); ++i) {
    out << y[i];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R, i); it; ++it) {
      if (it.value() != 0.0) out << ' ' << it.col() + 1 << ':' << it.value();
    }
    out << '\n';
  }
  out.precision(old_precision);
}

GroupCovering read_groups(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Index n = -1;
  Index N = -1;
  std::vector<IndexList> groups;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = strip_comment(line);
    if (body.empty()) continue;
    const auto tokens = split_ws(body);
    if (n < 0) {
      if (tokens.size() != 2 || !parse_number(tokens[0], n) || !parse_number(tokens[1], N) ||
          n < 1 || N < 1) {
        throw ParseError("groups: header must be 'n N' with positive integers", line_no);
      }
      continue;
    }
    double w = 0.0;
    Index k = 0;
    if (tokens.size() < 2 || !parse_number(tokens[0], w) || !parse_number(tokens[1], k)) {
      throw ParseError("groups: expected 'w k i_1 ... i_k'", line_no);
    }
    if (k < 1 || static_cast<std::size_t>(k) + 2 != tokens.size()) {
      throw ParseError("groups: group size does not match the listed indices", line_no);
    }
    IndexList g;
    for (std::size_t j = 2; j < tokens.size(); ++j) {
      Index idx = 0;
      if (!parse_number(tokens[j], idx)) {
        throw ParseError("groups: bad index '" + std::string(tokens[j]) + "'", line_no);
      }
      g.push_back(idx - 1);
    }
    groups.push_back(std::move(g));
    weights.push_back(w);
  }
  if (n < 0) throw ParseError("groups: missing header", line_no);
  if (static_cast<Index>(groups.size()) != N) {
    throw ParseError("groups: header announces " + std::to_string(N) + " groups, found " +
                         std::to_string(groups.size()),
                     line_no);
  }
  return GroupCovering(n, std::move(groups), std::move(weights));
}

GroupCovering read_groups_file(const std::string& path) {
  auto in = open_input(path);
  return read_groups(in);
}

void write_groups(std::ostream& out, const GroupCovering& covering) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << covering.dim() << ' ' << covering.num_groups() << '\n';
  for (Index t = 0; t < covering.num_groups(); ++t) {
    const auto& g = covering.group(t);
    out << covering.weight(t) << ' ' << g.size();
    for (Index i : g) out << ' ' << i + 1;
    out << '\n';
  }
  out.precision(old_precision);
}

Index sliding_dim(Index num_groups, Index group_size, Index overlap) {
  if (num_groups < 1 || group_size < 1) throw ConfigError("sliding: N and gs must be positive");
  if (overlap < 0 || overlap >= group_size) throw ConfigError("sliding: need 0 <= os < gs");
  return num_groups * group_size - (num_groups - 1) * overlap;
}

GroupCovering sliding_covering(Index num_groups, Index group_size, Index overlap, double weight) {
  sliding_dim(num_groups, group_size, overlap);
  std::vector<IndexList> groups(static_cast<std::size_t>(num_groups));
  for (Index t = 0; t < num_groups; ++t) {
    auto& g = groups[static_cast<std::size_t>(t)];
    for (Index j = 0; j < group_size; ++j) g.push_back(t * (group_size - overlap) + j);
  }
  return GroupCovering(sliding_dim(num_groups, group_size, overlap), std::move(groups), weight);
}

SyntheticInstance gen_sliding(const SyntheticSpec& spec) {
  const Index n = sliding_dim(spec.num_groups, spec.group_size, spec.overlap);
  const double w = spec.weight.value_or(std::sqrt(static_cast<double>(spec.group_size)));
  const Index m = spec.rows.value_or(static_cast<Index>(std::llround(static_cast<double>(n) / 2.0)));
  if (m < 1) throw ConfigError("sliding: need at least one row");
  if (!spec.lambda && !(spec.lambda_ratio > 0.0)) throw ConfigError("sliding: lambda ratio must be positive");

  GroupCovering cov = sliding_covering(spec.num_groups, spec.group_size, spec.overlap, w);
  Mat A = gaussian_matrix(m, n, spec.seed, 1);
  Vec y = gaussian_matrix(m, 1, spec.seed, 2).col(0);

  DesignMatrix D(std::move(A));
  const LiftingOperator L(cov);
  const double lmax = lambda_max(D, y, L);
  double lambda = spec.lambda.value_or(lmax / spec.lambda_ratio);
  if (!(lambda > 0.0)) throw ConfigError("sliding: lambda must be positive (is y zero?)");
  return {ProblemData(std::move(D), std::move(y), lambda), std::move(cov), lmax};
}

GroupCovering gen_tree_groups(Index depth, Index fanout) {
  if (depth < 1 || fanout < 1) throw ConfigError("tree: depth and fanout must be positive");
  Index n = 0;
  Index level = 1;
  Index internal = 0;
  for (Index d = 0; d < depth; ++d) {
    if (d + 1 < depth) internal += level;
    n += level;
    level *= fanout;
  }
  std::vector<IndexList> groups;
  for (Index node = 0; node < internal; ++node) {
    IndexList g{node};
    for (Index c = 1; c <= fanout; ++c) g.push_back(node * fanout + c);
    groups.push_back(std::move(g));
  }
  for (Index leaf = internal; leaf < n; ++leaf) groups.push_back({leaf});
  return GroupCovering(n, std::move(groups), 1.0);
}

MultitaskInstance multitask_to_group(const Mat& A, const Mat& Y, double lambda) {
  if (A.rows() != Y.rows()) throw DimensionError("multitask: A and Y need the same row count");
  const Index m = A.rows();
  const Index n = A.cols();
  const Index q = Y.cols();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(m * n * q));
  for (Index task = 0; task < q; ++task) {
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        if (A(i, j) != 0.0) entries.emplace_back(task * m + i, task * n + j, A(i, j));
      }
    }
  }
  SpMat B(m * q, n * q);
  B.setFromTriplets(entries.begin(), entries.end());
  B.makeCompressed();
  const Vec y = Eigen::Map<const Vec>(Y.data(), m * q);

  std::vector<IndexList> groups(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index task = 0; task < q; ++task) groups[static_cast<std::size_t>(j)].push_back(j + task * n);
  }
  return {ProblemData(DesignMatrix(std::move(B)), y, lambda),
          GroupCovering(n * q, std::move(groups), 1.0)};
}

double lambda_max(const DesignMatrix& A, const Vec& y, const LiftingOperator& L) {
  const Vec norms = group_coord_norms(L, A.apply_transpose(y));
  double best = 0.0;
  for (Index t = 0; t < L.num_groups(); ++t) best = std::max(best, norms[t] / L.covering().weight(t));
  return best;
}

double lasso_lambda_max(const DesignMatrix& A, const Vec& y) {
  return A.apply_transpose(y).cwiseAbs().maxCoeff();
}

constexpr double kDescentFactor = 0.8;

LambdaTuning tune_lambda(const DesignMatrix& A, const Vec& y, const LiftingOperator& L,
                         Index lo, Index hi, SolverKind solver, const SolverConfig& config,
                         int max_evaluations, double floor_ratio, double rel_tol) {
  if (lo < 1 || hi < lo) throw ConfigError("tune_lambda: need 1 <= lo <= hi");
  const double lmax = lambda_max(A, y, L);
  if (!(lmax > 0.0)) throw ConfigError("tune_lambda: lambda_max is zero");
  // Descend from lambda_max until enough groups are active, then bisect.
  const double floor_lambda = lmax * floor_ratio;
  const Index target = (lo + hi) / 2;
  double upper = lmax;
  std::optional<double> lower;

  LambdaTuning best;
  Index best_gap = std::numeric_limits<Index>::max();
  WarmStart warm;
  for (int e = 0; e < max_evaluations; ++e) {
    const double lambda =
        lower ? std::sqrt(upper * *lower) : std::max(floor_lambda, upper * kDescentFactor);
    const ProblemData problem(A, y, lambda);
    const SolveResult res = solve(solver, problem, L, config, e > 0 ? &warm : nullptr);
    warm.x = res.x;
    IndexList active = reported_support(L, res, rel_tol);
    const Index count = static_cast<Index>(active.size());
    const Index gap = count < lo ? lo - count : (count > hi ? count - hi : 0);
    if (gap < best_gap || (gap == best_gap && std::abs(count - target) < std::abs(best.active_groups - target))) {
      best_gap = gap;
      best.lambda = lambda;
      best.active_groups = count;
      best.active = std::move(active);
      best.x = res.x;
      best.converged = res.converged;
    }
    best.evaluations = e + 1;
    if (gap == 0) {
      best.hit_target = true;
      break;
    }
    if (count < lo) {
      upper = lambda;
      if (!lower && lambda <= floor_lambda) break;
    } else {
      lower = lambda;
    }
  }
  return best;
}

}  // namespace ogl
