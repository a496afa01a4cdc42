#include "rfam/nlp/sparse_fd.hpp"

#include <cmath>
#include <stdexcept>

#include "rfam/parallel.hpp"

namespace rfam::nlp {

namespace {

constexpr double kForwardStepScale = 1.4901161193847656e-08; // sqrt(machine eps)
constexpr double kCentralStepScale = 6.0554544523933395e-06; // cbrt(machine eps)

double step_for(double xj, bool central) {
    const double scale = central ? kCentralStepScale : kForwardStepScale;
    double h = scale * std::max(1.0, std::abs(xj));
    // Snap to an exactly representable perturbation.
    volatile double tmp = xj + h;
    h = tmp - xj;
    if (h == 0.0) h = scale;
    return h;
}

} // namespace

ColoredPattern color_pattern(int rows, int cols,
                             const std::vector<std::pair<int, int>>& entries) {
    ColoredPattern p;
    p.rows = rows;
    p.cols = cols;
    p.entries = entries;
    p.col_entries.assign(cols, {});
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto [r, c] = entries[i];
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw std::invalid_argument("jacobian pattern entry out of range");
        p.col_entries[c].push_back(static_cast<int>(i));
    }

    // Greedy assignment in natural column order; a color can host a column
    // iff none of the column's rows is taken in that color yet.
    std::vector<std::vector<char>> color_rows; // per color: row occupancy
    for (int c = 0; c < cols; ++c) {
        if (p.col_entries[c].empty()) continue; // structurally zero column
        size_t g = 0;
        for (; g < p.groups.size(); ++g) {
            bool clash = false;
            for (int e : p.col_entries[c]) {
                if (color_rows[g][entries[e].first]) {
                    clash = true;
                    break;
                }
            }
            if (!clash) break;
        }
        if (g == p.groups.size()) {
            p.groups.emplace_back();
            color_rows.emplace_back(rows, 0);
        }
        p.groups[g].push_back(c);
        for (int e : p.col_entries[c]) color_rows[g][entries[e].first] = 1;
    }
    return p;
}

void fd_jacobian(const ColoredPattern& pattern, const VectorFn& f, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& base, bool central, std::vector<double>& values) {
    values.assign(pattern.entries.size(), 0.0);
    const int n_groups = static_cast<int>(pattern.groups.size());

    parallel_for(n_groups, [&](int g) {
        const std::vector<int>& cols = pattern.groups[g];
        Eigen::VectorXd xp = x;
        std::vector<double> steps(cols.size());
        for (size_t k = 0; k < cols.size(); ++k) {
            steps[k] = step_for(x(cols[k]), central);
            xp(cols[k]) = x(cols[k]) + steps[k];
        }
        const Eigen::VectorXd fp = f(xp);
        if (central) {
            Eigen::VectorXd xm = x;
            for (size_t k = 0; k < cols.size(); ++k) xm(cols[k]) = x(cols[k]) - steps[k];
            const Eigen::VectorXd fm = f(xm);
            for (size_t k = 0; k < cols.size(); ++k) {
                for (int e : pattern.col_entries[cols[k]]) {
                    const int r = pattern.entries[e].first;
                    values[e] = (fp(r) - fm(r)) / (2.0 * steps[k]);
                }
            }
        } else {
            for (size_t k = 0; k < cols.size(); ++k) {
                for (int e : pattern.col_entries[cols[k]]) {
                    const int r = pattern.entries[e].first;
                    values[e] = (fp(r) - base(r)) / steps[k];
                }
            }
        }
    });
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double base, bool central,
                            const std::vector<int>& components) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
    const int n = static_cast<int>(components.size());
    parallel_for(n, [&](int k) {
        const int j = components[k];
        const double h = step_for(x(j), central);
        Eigen::VectorXd xp = x;
        xp(j) = x(j) + h;
        const double fp = f(xp);
        if (central) {
            xp(j) = x(j) - h;
            grad(j) = (fp - f(xp)) / (2.0 * h);
        } else {
            grad(j) = (fp - base) / h;
        }
    });
    return grad;
}

} // namespace rfam::nlp
