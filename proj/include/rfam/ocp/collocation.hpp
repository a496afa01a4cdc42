#pragma once

#include <Eigen/Dense>
#include <functional>

#include "rfam/nlp/problem.hpp"
#include "rfam/nlp/sqp.hpp"

namespace rfam::ocp {

// Hermite–Simpson interval pieces in compressed form: the collocation state
// is interpolated, not a decision variable.
//   x_c = (x_k + x_k1)/2 + h (f_k − f_k1)/8
//   defect = x_k1 − x_k − h (f_k + 4 f_c + f_k1)/6
Eigen::VectorXd hs_midpoint_state(const Eigen::VectorXd& x_k, const Eigen::VectorXd& x_k1,
                                  const Eigen::VectorXd& f_k, const Eigen::VectorXd& f_k1,
                                  double h);
Eigen::VectorXd hs_defect(const Eigen::VectorXd& x_k, const Eigen::VectorXd& x_k1,
                          const Eigen::VectorXd& f_k, const Eigen::VectorXd& f_c,
                          const Eigen::VectorXd& f_k1, double h);

/** One-phase optimal control problem on a uniform mesh, for small dynamical
 *  systems: bounds at every node, pinned end states, an optional running
 *  cost integrated with Simpson weights, and optionally free duration. */
struct SimplePhaseOCP {
    int n_states = 0;
    int n_controls = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>
        dynamics;

    double duration_guess = 1.0;
    double duration_lb = 1.0;  // equal bounds mean fixed duration
    double duration_ub = 1.0;
    bool minimize_duration = false;

    Eigen::VectorXd x_lb, x_ub;  // per-component, applied at every node
    Eigen::VectorXd u_lb, u_ub;
    Eigen::VectorXd x_initial;   // NaN entries are free
    Eigen::VectorXd x_final;

    std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>
        running_cost;  // optional

    Eigen::VectorXd x_scale, u_scale;  // optional solver scaling hints
};

struct SimplePhaseSolution {
    Eigen::VectorXd times;     // node instants, ascending from 0
    Eigen::MatrixXd states;    // nodes x n_states
    Eigen::MatrixXd controls;  // nodes x n_controls
    double duration = 0.0;
    double objective = 0.0;
    nlp::NLPSolution raw;
};

// Transcribes onto `nodes` uniform nodes and solves. The initial guess
// interpolates the pinned end states linearly and starts controls at the
// middle of their boxes. Throws std::invalid_argument on malformed input.
SimplePhaseSolution solve_simple_phase(const SimplePhaseOCP& ocp, int nodes,
                                       const nlp::SolverOptions& options = {});

// Transcription only, for derivative checks and defect inspection. The
// layout is [x_0 u_0 x_1 u_1 ... x_{N-1} u_{N-1} (T)]; the duration slot
// exists only when the duration is free.
nlp::NLPProblem transcribe_simple_phase(const SimplePhaseOCP& ocp, int nodes);
Eigen::VectorXd simple_phase_guess(const SimplePhaseOCP& ocp, int nodes);

} // namespace rfam::ocp
