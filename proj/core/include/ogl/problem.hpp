#pragma once

#include "ogl/linalg.hpp"

namespace ogl {

/// min_x (1/(2 lambda)) ||Ax - y||^2 + ||Lx||_{1,2}
struct ProblemData {
  DesignMatrix A;
  Vec y;
  double lambda = 1.0;

  ProblemData() = default;
  ProblemData(DesignMatrix A_, Vec y_, double lambda_);

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
};

/// Throws DimensionError / ConfigError when A, y, lambda or L disagree.
void validate(const ProblemData& problem, const LiftingOperator& L);

/// (1/(2 lambda)) ||Ax - y||^2 + group_norm(L, x)
double objective(const ProblemData& problem, const LiftingOperator& L, const Vec& x);

/// Ax - y
Vec residual(const ProblemData& problem, const Vec& x);

}  // namespace ogl
