#include "ogl/problem.hpp"

#include <cmath>
#include <string>

#include "ogl/errors.hpp"

namespace ogl {

ProblemData::ProblemData(DesignMatrix A_, Vec y_, double lambda_)
    : A(std::move(A_)), y(std::move(y_)), lambda(lambda_) {
  if (A.rows() != y.size()) {
    throw DimensionError("problem: A has " + std::to_string(A.rows()) + " rows but y has length " +
                         std::to_string(y.size()));
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("problem: lambda must be positive");
}

void validate(const ProblemData& problem, const LiftingOperator& L) {
  if (problem.A.rows() != problem.y.size()) throw DimensionError("problem: A rows != len(y)");
  if (problem.A.cols() != L.dim()) {
    throw DimensionError("problem: A has " + std::to_string(problem.A.cols()) +
                         " columns but the covering has dimension " + std::to_string(L.dim()));
  }
  if (!(problem.lambda > 0.0)) throw ConfigError("problem: lambda must be positive");
}

Vec residual(const ProblemData& problem, const Vec& x) { return problem.A.apply(x) - problem.y; }

double objective(const ProblemData& problem, const LiftingOperator& L, const Vec& x) {
  return residual(problem, x).squaredNorm() / (2.0 * problem.lambda) + group_norm(L, x);
}

}  // namespace ogl
