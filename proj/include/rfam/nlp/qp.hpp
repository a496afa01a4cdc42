#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rfam::nlp {

/** Convex quadratic program in the form the outer solver produces:
 *
 *      min ½ zᵀH z + cᵀz    s.t.  A z = b,   G z ≤ h,
 *
 *  with H = diag(hessian_diag) − W·Minv⁻¹·Wᵀ (the caller supplies Minv, the
 *  small inverse block of a compact quasi-Newton representation; W may have
 *  zero columns for a purely diagonal Hessian).  Variable bounds are rows of
 *  G by convention. */
struct QPProblem {
    int n = 0;
    Eigen::VectorXd hessian_diag;
    Eigen::MatrixXd low_rank_w;    // n x k
    Eigen::MatrixXd low_rank_minv; // k x k, symmetric
    Eigen::VectorXd linear_cost;
    Eigen::SparseMatrix<double> a_eq; // me x n
    Eigen::VectorXd b_eq;
    Eigen::SparseMatrix<double> g_in; // mi x n
    Eigen::VectorXd h_in;
};

struct QPOptions {
    double tolerance = 1e-10;  // residual and gap target, relative to data size
    int max_iterations = 60;
};

struct QPResult {
    bool success = false;
    Eigen::VectorXd z;
    Eigen::VectorXd y_eq;      // equality multipliers
    Eigen::VectorXd lambda_in; // inequality multipliers, >= 0
    Eigen::VectorXd slack;     // h - Gz at the solution
    int iterations = 0;
    double gap = 0.0;          // final complementarity measure
};

// Primal-dual interior-point method with a Mehrotra predictor-corrector
// step; each iteration factorizes one sparse augmented KKT system (the
// low-rank Hessian block enters through bordered rows, so sparsity is kept).
QPResult solve_qp(const QPProblem& qp, const QPOptions& options = {});

} // namespace rfam::nlp
