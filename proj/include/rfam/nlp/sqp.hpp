#pragma once

#include "rfam/nlp/problem.hpp"

namespace rfam::nlp {

// Sequential quadratic programming with a damped limited-memory quasi-Newton
// Hessian and an l1-penalty merit line search.  Each subproblem is an
// elastic QP (the penalty caps the multipliers), so locally infeasible
// linearizations still yield feasibility-restoring directions.
NLPSolution solve(const NLPProblem& problem, const Eigen::VectorXd& x0,
                  const SolverOptions& options = {});

/** Row-by-row comparison of the configured derivative path against a dense
 *  central-difference reference. */
struct DerivativeReport {
    Eigen::VectorXd row_errors;  // per constraint row, relative
    double gradient_error = 0.0; // objective gradient, relative
    double max_error = 0.0;      // worst of all of the above
    int worst_row = -1;          // -1 means the gradient was worst
};

DerivativeReport check_derivatives(const NLPProblem& problem, const Eigen::VectorXd& x,
                                   const SolverOptions& options = {});

} // namespace rfam::nlp
