#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace rfam::nlp {

/** Column grouping for finite-difference Jacobians: columns that share no
 *  row may be perturbed together, cutting the evaluation count from n to
 *  the number of groups (classic Curtis-Powell-Reid seeding). */
struct ColoredPattern {
    int rows = 0;
    int cols = 0;
    std::vector<std::pair<int, int>> entries;    // (row, col) per nonzero
    std::vector<std::vector<int>> col_entries;   // entry indices per column
    std::vector<std::vector<int>> groups;        // columns per color group
};

// Greedy distance-2 coloring of the column intersection graph.  A dense
// pattern degenerates to one column per group.
ColoredPattern color_pattern(int rows, int cols,
                             const std::vector<std::pair<int, int>>& entries);

/** Vector-valued evaluation target for the differencing kernel. */
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Fills values[i] (aligned with pattern.entries) with forward or central
// differences of f at x.  base = f(x) is required in forward mode and unused
// in central mode.  Group evaluations are independent and run through the
// process-wide execution backend; writes are disjoint per entry, so the
// serial and parallel backends agree bitwise.
void fd_jacobian(const ColoredPattern& pattern, const VectorFn& f, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& base, bool central, std::vector<double>& values);

// Finite-difference gradient of a scalar function restricted to the listed
// components (the rest stay zero).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double base, bool central,
                            const std::vector<int>& components);

} // namespace rfam::nlp
