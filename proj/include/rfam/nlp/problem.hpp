#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace rfam::nlp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/** Smooth constrained program
 *      min f(x)   s.t.  c_eq(x) = 0,  c_in(x) <= 0,  lb <= x <= ub.
 *
 *  Derivatives are optional: when absent the solver builds sparse finite
 *  differences from jacobian_pattern (dense if the pattern is empty) and a
 *  finite-difference gradient restricted to objective_pattern. */
struct NLPProblem {
    int n = 0;      // variables
    int n_eq = 0;   // equality rows
    int n_in = 0;   // inequality rows (g(x) <= 0 convention)

    Eigen::VectorXd lb, ub; // size n; +-inf entries mean unbounded

    std::function<double(const Eigen::VectorXd&)> objective;
    // Fills c_eq (size n_eq) and c_in (size n_in).
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::VectorXd&)> constraints;

    // Optional analytic derivatives.  jacobian fills values[i] for entry i of
    // jacobian_pattern; gradient returns the dense objective gradient.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<void(const Eigen::VectorXd&, std::vector<double>&)> jacobian;

    // Possibly-nonzero entries of the stacked constraint Jacobian
    // [c_eq; c_in] as (row, col) pairs; rows n_eq.. are inequalities.
    // Empty means dense.
    std::vector<std::pair<int, int>> jacobian_pattern;

    // Variables the objective can depend on; empty means all of them.
    std::vector<int> objective_pattern;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible, LineSearchFailure };

const char* to_string(SolveStatus s);

struct NLPSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    double max_violation = 0.0;      // scaled units
    double kkt_residual = 0.0;       // scaled stationarity, infinity norm
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIterations;
    std::string diagnostic;          // human-readable failure context
    Eigen::VectorXd lambda_eq;       // multipliers, useful for warm starts
    Eigen::VectorXd lambda_in;
};

enum class DerivativeMode { Provided, ForwardDifference, CentralDifference };

struct SolverOptions {
    double opt_tol = 1e-6;
    double feas_tol = 1e-6;
    int max_iterations = 500;
    DerivativeMode derivative_mode = DerivativeMode::ForwardDifference;

    // Optional diagonal scalings; empty means unit.  Residuals and
    // feasibility are reported in the scaled space.
    Eigen::VectorXd x_scale;          // size n
    Eigen::VectorXd constraint_scale; // size n_eq + n_in

    double initial_penalty = 10.0;    // l1 merit weight
    double max_penalty = 1e10;
    int lbfgs_memory = 15;

    // Optional delimiter-separated iteration log
    // (iter, objective, merit, violation, step, penalty).
    std::ostream* iteration_log = nullptr;
};

} // namespace rfam::nlp
