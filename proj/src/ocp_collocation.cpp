#include "rfam/ocp/collocation.hpp"

#include <cmath>
#include <stdexcept>

namespace rfam::ocp {

Eigen::VectorXd hs_midpoint_state(const Eigen::VectorXd& x_k, const Eigen::VectorXd& x_k1,
                                  const Eigen::VectorXd& f_k, const Eigen::VectorXd& f_k1,
                                  double h) {
    return 0.5 * (x_k + x_k1) + (h / 8.0) * (f_k - f_k1);
}

Eigen::VectorXd hs_defect(const Eigen::VectorXd& x_k, const Eigen::VectorXd& x_k1,
                          const Eigen::VectorXd& f_k, const Eigen::VectorXd& f_c,
                          const Eigen::VectorXd& f_k1, double h) {
    return x_k1 - x_k - (h / 6.0) * (f_k + 4.0 * f_c + f_k1);
}

namespace {

struct Layout {
    int ns, nc, nodes;
    bool free_T;
    int per_node() const { return ns + nc; }
    int x_at(int k) const { return k * per_node(); }
    int u_at(int k) const { return k * per_node() + ns; }
    int t_index() const { return nodes * per_node(); }
    int n() const { return nodes * per_node() + (free_T ? 1 : 0); }
};

void validate(const SimplePhaseOCP& ocp, int nodes) {
    if (nodes < 2) throw std::invalid_argument("need at least two mesh nodes");
    if (ocp.n_states < 1) throw std::invalid_argument("need at least one state");
    if (ocp.n_controls < 0) throw std::invalid_argument("negative control count");
    if (!ocp.dynamics) throw std::invalid_argument("dynamics callback missing");
    if (!(ocp.duration_lb > 0.0) || ocp.duration_ub < ocp.duration_lb)
        throw std::invalid_argument("duration bounds must be positive and ordered");
    if (!ocp.minimize_duration && !ocp.running_cost)
        throw std::invalid_argument("objective missing: no duration term and no running cost");
}

} // namespace

nlp::NLPProblem transcribe_simple_phase(const SimplePhaseOCP& ocp, int nodes) {
    validate(ocp, nodes);
    const Layout lay{ocp.n_states, ocp.n_controls,
                     nodes, ocp.duration_ub > ocp.duration_lb};
    const int ns = lay.ns, nc = lay.nc;

    nlp::NLPProblem p;
    p.n = lay.n();
    p.n_eq = (nodes - 1) * ns;
    p.n_in = 0;
    p.lb = Eigen::VectorXd::Constant(p.n, -nlp::kInf);
    p.ub = Eigen::VectorXd::Constant(p.n, nlp::kInf);
    for (int k = 0; k < nodes; ++k) {
        for (int i = 0; i < ns; ++i) {
            if (ocp.x_lb.size()) p.lb(lay.x_at(k) + i) = ocp.x_lb(i);
            if (ocp.x_ub.size()) p.ub(lay.x_at(k) + i) = ocp.x_ub(i);
        }
        for (int i = 0; i < nc; ++i) {
            if (ocp.u_lb.size()) p.lb(lay.u_at(k) + i) = ocp.u_lb(i);
            if (ocp.u_ub.size()) p.ub(lay.u_at(k) + i) = ocp.u_ub(i);
        }
    }
    // End states pin through the variable box; NaN marks a free component.
    for (int i = 0; i < ns; ++i) {
        if (ocp.x_initial.size() && std::isfinite(ocp.x_initial(i)))
            p.lb(lay.x_at(0) + i) = p.ub(lay.x_at(0) + i) = ocp.x_initial(i);
        if (ocp.x_final.size() && std::isfinite(ocp.x_final(i)))
            p.lb(lay.x_at(nodes - 1) + i) = p.ub(lay.x_at(nodes - 1) + i) = ocp.x_final(i);
    }
    if (lay.free_T) {
        p.lb(lay.t_index()) = ocp.duration_lb;
        p.ub(lay.t_index()) = ocp.duration_ub;
    }

    const auto duration_of = [lay, &ocp](const Eigen::VectorXd& z) {
        return lay.free_T ? z(lay.t_index()) : ocp.duration_lb;
    };
    const auto node_x = [lay](const Eigen::VectorXd& z, int k) {
        return z.segment(lay.x_at(k), lay.ns);
    };
    const auto node_u = [lay](const Eigen::VectorXd& z, int k) {
        return lay.nc ? z.segment(lay.u_at(k), lay.nc).eval() : Eigen::VectorXd(0);
    };

    p.constraints = [lay, &ocp, duration_of, node_x, node_u](
                        const Eigen::VectorXd& z, Eigen::VectorXd& ce, Eigen::VectorXd& ci) {
        const double T = duration_of(z);
        const double h = T / (lay.nodes - 1);
        ce.resize((lay.nodes - 1) * lay.ns);
        ci.resize(0);
        Eigen::VectorXd xk = node_x(z, 0), uk = node_u(z, 0);
        Eigen::VectorXd fk = ocp.dynamics(xk, uk, 0.0);
        for (int k = 0; k + 1 < lay.nodes; ++k) {
            const Eigen::VectorXd xk1 = node_x(z, k + 1);
            const Eigen::VectorXd uk1 = node_u(z, k + 1);
            const Eigen::VectorXd fk1 = ocp.dynamics(xk1, uk1, (k + 1) * h);
            const Eigen::VectorXd xc = hs_midpoint_state(xk, xk1, fk, fk1, h);
            const Eigen::VectorXd uc = 0.5 * (uk + uk1);
            const Eigen::VectorXd fc = ocp.dynamics(xc, uc, (k + 0.5) * h);
            ce.segment(k * lay.ns, lay.ns) = hs_defect(xk, xk1, fk, fc, fk1, h);
            xk = xk1;
            uk = uk1;
            fk = fk1;
        }
    };

    p.objective = [lay, &ocp, duration_of, node_x, node_u](const Eigen::VectorXd& z) {
        double value = 0.0;
        const double T = duration_of(z);
        if (ocp.minimize_duration) value += T;
        if (ocp.running_cost) {
            // Simpson quadrature over each interval with the interpolated
            // midpoint state, matching the collocation rule.
            const double h = T / (lay.nodes - 1);
            Eigen::VectorXd xk = node_x(z, 0), uk = node_u(z, 0);
            Eigen::VectorXd fk = ocp.dynamics(xk, uk, 0.0);
            double lk = ocp.running_cost(xk, uk, 0.0);
            for (int k = 0; k + 1 < lay.nodes; ++k) {
                const Eigen::VectorXd xk1 = node_x(z, k + 1);
                const Eigen::VectorXd uk1 = node_u(z, k + 1);
                const Eigen::VectorXd fk1 = ocp.dynamics(xk1, uk1, (k + 1) * h);
                const Eigen::VectorXd xc = hs_midpoint_state(xk, xk1, fk, fk1, h);
                const Eigen::VectorXd uc = 0.5 * (uk + uk1);
                const double lk1 = ocp.running_cost(xk1, uk1, (k + 1) * h);
                const double lc = ocp.running_cost(xc, uc, (k + 0.5) * h);
                value += h / 6.0 * (lk + 4.0 * lc + lk1);
                xk = xk1;
                uk = uk1;
                fk = fk1;
                lk = lk1;
            }
        }
        return value;
    };

    // Each interval's defect rows touch both bracketing nodes and, when the
    // duration is free, the trailing duration variable.
    for (int k = 0; k + 1 < nodes; ++k)
        for (int i = 0; i < ns; ++i) {
            const int row = k * ns + i;
            for (int c = 0; c < lay.per_node() * 2; ++c)
                p.jacobian_pattern.push_back({row, lay.x_at(k) + c});
            if (lay.free_T) p.jacobian_pattern.push_back({row, lay.t_index()});
        }
    if (!ocp.running_cost && ocp.minimize_duration && lay.free_T)
        p.objective_pattern = {lay.t_index()};
    return p;
}

Eigen::VectorXd simple_phase_guess(const SimplePhaseOCP& ocp, int nodes) {
    validate(ocp, nodes);
    const Layout lay{ocp.n_states, ocp.n_controls,
                     nodes, ocp.duration_ub > ocp.duration_lb};
    Eigen::VectorXd z = Eigen::VectorXd::Zero(lay.n());
    const auto pinned_or = [](const Eigen::VectorXd& v, int i, double fallback) {
        return (v.size() && std::isfinite(v(i))) ? v(i) : fallback;
    };
    for (int k = 0; k < nodes; ++k) {
        const double tau = static_cast<double>(k) / (nodes - 1);
        for (int i = 0; i < lay.ns; ++i) {
            const double a = pinned_or(ocp.x_initial, i, 0.0);
            const double b = pinned_or(ocp.x_final, i, a);
            z(lay.x_at(k) + i) = a + tau * (b - a);
        }
        for (int i = 0; i < lay.nc; ++i) {
            const double ulo = ocp.u_lb.size() ? ocp.u_lb(i) : 0.0;
            const double uhi = ocp.u_ub.size() ? ocp.u_ub(i) : 0.0;
            z(lay.u_at(k) + i) =
                (std::isfinite(ulo) && std::isfinite(uhi)) ? 0.5 * (ulo + uhi) : 0.0;
        }
    }
    if (lay.free_T) z(lay.t_index()) = ocp.duration_guess;
    return z;
}

SimplePhaseSolution solve_simple_phase(const SimplePhaseOCP& ocp, int nodes,
                                       const nlp::SolverOptions& options) {
    const nlp::NLPProblem p = transcribe_simple_phase(ocp, nodes);
    const Layout lay{ocp.n_states, ocp.n_controls,
                     nodes, ocp.duration_ub > ocp.duration_lb};

    nlp::SolverOptions opts = options;
    if (opts.x_scale.size() == 0 && (ocp.x_scale.size() || ocp.u_scale.size())) {
        opts.x_scale = Eigen::VectorXd::Ones(p.n);
        for (int k = 0; k < nodes; ++k) {
            for (int i = 0; i < lay.ns && i < ocp.x_scale.size(); ++i)
                opts.x_scale(lay.x_at(k) + i) = ocp.x_scale(i);
            for (int i = 0; i < lay.nc && i < ocp.u_scale.size(); ++i)
                opts.x_scale(lay.u_at(k) + i) = ocp.u_scale(i);
        }
        if (lay.free_T) opts.x_scale(lay.t_index()) = ocp.duration_guess;
    }

    const nlp::NLPSolution sol = nlp::solve(p, simple_phase_guess(ocp, nodes), opts);

    SimplePhaseSolution out;
    out.duration = lay.free_T ? sol.x(lay.t_index()) : ocp.duration_lb;
    out.times = Eigen::VectorXd::LinSpaced(nodes, 0.0, out.duration);
    out.states.resize(nodes, lay.ns);
    out.controls.resize(nodes, lay.nc);
    for (int k = 0; k < nodes; ++k) {
        out.states.row(k) = sol.x.segment(lay.x_at(k), lay.ns);
        if (lay.nc) out.controls.row(k) = sol.x.segment(lay.u_at(k), lay.nc);
    }
    out.objective = sol.objective;
    out.raw = sol;
    return out;
}

} // namespace rfam::ocp
