#include "rfam/nlp/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

#include "rfam/nlp/qp.hpp"
#include "rfam/nlp/sparse_fd.hpp"

namespace rfam::nlp {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::MaxIterations: return "MaxIterations";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::LineSearchFailure: return "LineSearchFailure";
    }
    return "Unknown";
}

namespace {

// The problem as the solver core sees it: variables, constraints, and
// derivatives all in scaled space.
class ScaledProblem {
public:
    ScaledProblem(const NLPProblem& p, const SolverOptions& opt) : p_(p) {
        n_ = p.n;
        m_ = p.n_eq + p.n_in;
        sx_ = opt.x_scale.size() ? opt.x_scale
                                 : Eigen::VectorXd::Ones(n_);
        sc_ = opt.constraint_scale.size() ? opt.constraint_scale
                                          : Eigen::VectorXd::Ones(std::max(m_, 1));
        if (sx_.size() != n_) throw std::invalid_argument("x_scale size mismatch");
        if (m_ > 0 && sc_.size() != m_)
            throw std::invalid_argument("constraint_scale size mismatch");

        lb_ = Eigen::VectorXd::Constant(n_, -kInf);
        ub_ = Eigen::VectorXd::Constant(n_, kInf);
        if (p.lb.size()) lb_ = p.lb.cwiseQuotient(sx_);
        if (p.ub.size()) ub_ = p.ub.cwiseQuotient(sx_);

        pattern_ = p.jacobian_pattern;
        if (pattern_.empty() && m_ > 0) {
            pattern_.reserve(static_cast<size_t>(m_) * n_);
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < n_; ++c) pattern_.emplace_back(r, c);
        }
        colored_ = color_pattern(std::max(m_, 1), n_, pattern_);

        obj_vars_ = p.objective_pattern;
        if (obj_vars_.empty()) {
            obj_vars_.resize(n_);
            for (int i = 0; i < n_; ++i) obj_vars_[i] = i;
        }
    }

    int n() const { return n_; }
    int n_eq() const { return p_.n_eq; }
    int n_in() const { return p_.n_in; }
    int m() const { return m_; }
    const Eigen::VectorXd& lb() const { return lb_; }
    const Eigen::VectorXd& ub() const { return ub_; }
    const std::vector<std::pair<int, int>>& pattern() const { return pattern_; }
    const ColoredPattern& colored() const { return colored_; }
    const Eigen::VectorXd& x_scale() const { return sx_; }

    Eigen::VectorXd unscale(const Eigen::VectorXd& xs) const { return xs.cwiseProduct(sx_); }
    Eigen::VectorXd scale_x(const Eigen::VectorXd& x) const { return x.cwiseQuotient(sx_); }

    double objective(const Eigen::VectorXd& xs) const { return p_.objective(unscale(xs)); }

    // Stacked scaled constraints [c_eq; c_in].
    Eigen::VectorXd constraints(const Eigen::VectorXd& xs) const {
        Eigen::VectorXd c(std::max(m_, 1));
        if (m_ == 0) return Eigen::VectorXd();
        Eigen::VectorXd ce(p_.n_eq), ci(p_.n_in);
        p_.constraints(unscale(xs), ce, ci);
        c.segment(0, p_.n_eq) = ce;
        c.segment(p_.n_eq, p_.n_in) = ci;
        return c.cwiseQuotient(sc_);
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& xs, double f0, DerivativeMode mode) const {
        if (mode == DerivativeMode::Provided && p_.gradient) {
            return p_.gradient(unscale(xs)).cwiseProduct(sx_);
        }
        const bool central = mode == DerivativeMode::CentralDifference;
        auto f = [this](const Eigen::VectorXd& x) { return objective(x); };
        return fd_gradient(f, xs, f0, central, obj_vars_);
    }

    // Jacobian values aligned with pattern(), scaled rows and columns.
    void jacobian(const Eigen::VectorXd& xs, const Eigen::VectorXd& c0, DerivativeMode mode,
                  std::vector<double>& values) const {
        if (mode == DerivativeMode::Provided && p_.jacobian) {
            values.assign(pattern_.size(), 0.0);
            p_.jacobian(unscale(xs), values);
            if (values.size() != pattern_.size())
                throw std::runtime_error("provided jacobian size does not match the pattern");
            for (size_t i = 0; i < values.size(); ++i) {
                const auto [r, c] = pattern_[i];
                values[i] *= sx_(c) / sc_(r);
            }
            return;
        }
        const bool central = mode == DerivativeMode::CentralDifference;
        auto f = [this](const Eigen::VectorXd& x) { return constraints(x); };
        fd_jacobian(colored_, f, xs, c0, central, values);
    }

private:
    const NLPProblem& p_;
    int n_ = 0, m_ = 0;
    Eigen::VectorXd sx_, sc_, lb_, ub_;
    std::vector<std::pair<int, int>> pattern_;
    ColoredPattern colored_;
    std::vector<int> obj_vars_;
};

// Compact limited-memory BFGS state: B = sigma I - W Minv^{-1} W^T.
class CompactLBFGS {
public:
    explicit CompactLBFGS(int n, int memory) : n_(n), memory_(std::max(memory, 1)) {}

    double sigma() const { return sigma_; }
    int pairs() const { return static_cast<int>(s_.size()); }

    void reset() {
        s_.clear();
        y_.clear();
        sigma_ = 1.0;
    }

    Eigen::VectorXd multiply(const Eigen::VectorXd& v) const {
        Eigen::VectorXd bv = sigma_ * v;
        if (!s_.empty())
            bv -= w_ * minv_lu_.solve(w_.transpose() * v);
        return bv;
    }

    const Eigen::MatrixXd& w() const { return w_; }
    const Eigen::MatrixXd& minv() const { return minv_; }

    // Powell-damped pair admission keeping B positive definite.
    void update(const Eigen::VectorXd& s, Eigen::VectorXd y) {
        const double sn = s.norm();
        if (!(sn > 1e-14)) return;
        const Eigen::VectorXd bs = multiply(s);
        const double sbs = s.dot(bs);
        double sy = s.dot(y);
        if (sy < 0.2 * sbs) {
            const double theta = 0.8 * sbs / (sbs - sy);
            y = theta * y + (1.0 - theta) * bs;
            sy = s.dot(y);
        }
        if (!(sy > 1e-12 * sn * y.norm()) || !y.allFinite()) return;

        s_.push_back(s);
        y_.push_back(y);
        if (static_cast<int>(s_.size()) > memory_) {
            s_.pop_front();
            y_.pop_front();
        }
        sigma_ = std::clamp(y.squaredNorm() / sy, 1e-8, 1e8);
        rebuild();
    }

private:
    void rebuild() {
        const int m = pairs();
        Eigen::MatrixXd S(n_, m), Y(n_, m);
        for (int i = 0; i < m; ++i) {
            S.col(i) = s_[i];
            Y.col(i) = y_[i];
        }
        const Eigen::MatrixXd sts = S.transpose() * S;
        const Eigen::MatrixXd sty = S.transpose() * Y; // (i,j) = s_i . y_j
        w_.resize(n_, 2 * m);
        w_.leftCols(m) = Y;
        w_.rightCols(m) = sigma_ * S;
        minv_.resize(2 * m, 2 * m);
        // [ -D   L^T ]
        // [  L   sigma S^T S ],  D = diag(s_i.y_i), L strictly lower of S^T Y.
        minv_.setZero();
        for (int i = 0; i < m; ++i) minv_(i, i) = -sty(i, i);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < i; ++j) {
                minv_(m + i, j) = sty(i, j);
                minv_(j, m + i) = sty(i, j);
            }
        minv_.bottomRightCorner(m, m) = sigma_ * sts;
        minv_lu_.compute(minv_);
    }

    int n_, memory_;
    double sigma_ = 1.0;
    std::deque<Eigen::VectorXd> s_, y_;
    Eigen::MatrixXd w_, minv_;
    Eigen::PartialPivLU<Eigen::MatrixXd> minv_lu_;
};

struct Evaluation {
    double f = 0.0;
    Eigen::VectorXd c;        // stacked scaled constraints
    Eigen::VectorXd g;        // scaled gradient
    std::vector<double> jac;  // values aligned with the pattern
    bool finite() const {
        return std::isfinite(f) && (c.size() == 0 || c.allFinite());
    }
};

double violation_l1(const Eigen::VectorXd& c, int n_eq) {
    double v = 0.0;
    for (int i = 0; i < c.size(); ++i)
        v += i < n_eq ? std::abs(c(i)) : std::max(c(i), 0.0);
    return v;
}

double violation_max(const Eigen::VectorXd& c, int n_eq) {
    double v = 0.0;
    for (int i = 0; i < c.size(); ++i)
        v = std::max(v, i < n_eq ? std::abs(c(i)) : std::max(c(i), 0.0));
    return v;
}

} // namespace

NLPSolution solve(const NLPProblem& problem, const Eigen::VectorXd& x0,
                  const SolverOptions& options) {
    ScaledProblem sp(problem, options);
    const int n = sp.n();
    const int me = sp.n_eq();
    const int mi = sp.n_in();

    NLPSolution sol;
    sol.status = SolveStatus::MaxIterations;

    // Start inside the box.
    Eigen::VectorXd x = sp.scale_x(x0);
    for (int i = 0; i < n; ++i) x(i) = std::clamp(x(i), sp.lb()(i), sp.ub()(i));

    auto evaluate = [&](const Eigen::VectorXd& xs, bool with_derivatives) {
        Evaluation e;
        e.f = sp.objective(xs);
        e.c = sp.constraints(xs);
        if (with_derivatives && e.finite()) {
            e.g = sp.gradient(xs, e.f, options.derivative_mode);
            sp.jacobian(xs, e.c, options.derivative_mode, e.jac);
        }
        return e;
    };

    Evaluation cur = evaluate(x, true);
    if (!cur.finite()) {
        sol.diagnostic = "objective or constraints non-finite at the initial point";
        sol.status = SolveStatus::LineSearchFailure;
        sol.x = sp.unscale(x);
        return sol;
    }

    CompactLBFGS bfgs(n, options.lbfgs_memory);
    double penalty = options.initial_penalty;
    int feasible_streak = 0;
    const size_t n_pat = sp.pattern().size();

    // Constraint Jacobian in sparse form, rebuilt each iteration.
    Eigen::SparseMatrix<double> J(std::max(sp.m(), 1), n);
    auto rebuild_jacobian = [&](const std::vector<double>& vals) {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(n_pat);
        for (size_t i = 0; i < n_pat; ++i)
            t.emplace_back(sp.pattern()[i].first, sp.pattern()[i].second, vals[i]);
        J.setZero();
        J.setFromTriplets(t.begin(), t.end());
        J.makeCompressed();
    };

    // Minimum-norm move back onto the constraint surface for a given stacked
    // residual: all equality rows plus the violated inequality rows.
    auto normal_correction = [&](const Eigen::VectorXd& c_at) -> Eigen::VectorXd {
        std::vector<int> rows;
        for (int i = 0; i < me; ++i) rows.push_back(i);
        for (int i = 0; i < mi; ++i)
            if (c_at(me + i) > 0.0) rows.push_back(me + i);
        if (rows.empty()) return Eigen::VectorXd::Zero(n);
        const int ma = static_cast<int>(rows.size());
        std::vector<int> rowmap(sp.m(), -1);
        for (int i = 0; i < ma; ++i) rowmap[rows[i]] = i;
        std::vector<Eigen::Triplet<double>> t;
        for (int c = 0; c < J.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(J, c); it; ++it)
                if (rowmap[it.row()] >= 0)
                    t.emplace_back(rowmap[it.row()], it.col(), it.value());
        Eigen::SparseMatrix<double> ja(ma, n);
        ja.setFromTriplets(t.begin(), t.end());
        Eigen::SparseMatrix<double> jjt = (ja * Eigen::SparseMatrix<double>(ja.transpose())).pruned();
        double diag_max = 0.0;
        for (int i = 0; i < ma; ++i) diag_max = std::max(diag_max, jjt.coeff(i, i));
        Eigen::SparseMatrix<double> id(ma, ma);
        id.setIdentity();
        jjt += 1e-12 * (1.0 + diag_max) * id;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(jjt);
        if (ldlt.info() != Eigen::Success) return Eigen::VectorXd::Zero(n);
        Eigen::VectorXd r(ma);
        for (int i = 0; i < ma; ++i) r(i) = c_at(rows[i]);
        return ja.transpose() * ldlt.solve(-r);
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        rebuild_jacobian(cur.jac);
        const double v_now = violation_l1(cur.c, me);

        // --- Assemble the elastic QP over [d; p_eq; q_eq; p_in] ------------
        const int n_el = 2 * me + mi;
        const int nq = n + n_el;

        // Bound rows for d (finite only) + elastic positivity rows + the
        // linearized inequalities themselves.
        std::vector<Eigen::Triplet<double>> a_trip, g_trip;
        std::vector<double> h_vals;
        for (int c = 0; c < J.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(J, c); it; ++it) {
                if (it.row() < me)
                    a_trip.emplace_back(it.row(), it.col(), it.value());
            }
        for (int i = 0; i < me; ++i) {
            a_trip.emplace_back(i, n + i, -1.0);       // p_eq
            a_trip.emplace_back(i, n + me + i, 1.0);   // q_eq
        }

        int g_row = 0;
        for (int c = 0; c < J.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(J, c); it; ++it)
                if (it.row() >= me)
                    g_trip.emplace_back(it.row() - me, it.col(), it.value());
        for (int i = 0; i < mi; ++i)
            g_trip.emplace_back(i, n + 2 * me + i, -1.0); // p_in relaxes row i
        for (int i = 0; i < mi; ++i) h_vals.push_back(-cur.c(me + i));
        g_row = mi;

        std::vector<int> upper_rows(n, -1), lower_rows(n, -1);
        for (int j = 0; j < n; ++j) {
            if (std::isfinite(sp.ub()(j))) {
                g_trip.emplace_back(g_row, j, 1.0);
                h_vals.push_back(sp.ub()(j) - x(j));
                upper_rows[j] = g_row++;
            }
            if (std::isfinite(sp.lb()(j))) {
                g_trip.emplace_back(g_row, j, -1.0);
                h_vals.push_back(x(j) - sp.lb()(j));
                lower_rows[j] = g_row++;
            }
        }
        for (int i = 0; i < n_el; ++i) {
            g_trip.emplace_back(g_row, n + i, -1.0);
            h_vals.push_back(0.0);
            ++g_row;
        }

        QPProblem qp;
        qp.n = nq;
        qp.hessian_diag = Eigen::VectorXd::Constant(nq, 1e-10);
        qp.hessian_diag.segment(0, n).setConstant(bfgs.sigma());
        if (bfgs.pairs() > 0) {
            qp.low_rank_w = Eigen::MatrixXd::Zero(nq, bfgs.w().cols());
            qp.low_rank_w.topRows(n) = bfgs.w();
            qp.low_rank_minv = bfgs.minv();
        }
        qp.a_eq.resize(me, nq);
        qp.a_eq.setFromTriplets(a_trip.begin(), a_trip.end());
        qp.b_eq.resize(me);
        for (int i = 0; i < me; ++i) qp.b_eq(i) = -cur.c(i);
        qp.g_in.resize(g_row, nq);
        qp.g_in.setFromTriplets(g_trip.begin(), g_trip.end());
        qp.h_in = Eigen::Map<Eigen::VectorXd>(h_vals.data(), g_row);

        // Re-solve with a stiffer penalty while the multipliers press
        // against the elastic cap -- but only while stiffening keeps buying
        // a real cut in the linearized violation.  When the linearization is
        // simply infeasible from here, every penalty leaves the same elastic
        // residue, and escalating would only drown the objective in the
        // merit function.
        Eigen::VectorXd d, y_eq, lam_in, lam_up, lam_lo;
        double elastic_sum = 0.0;
        double prev_elastic = 0.0, prev_penalty = penalty;
        Eigen::VectorXd pd, py, pin, pup, plo;
        for (int attempt = 0;; ++attempt) {
            qp.linear_cost = Eigen::VectorXd::Constant(nq, penalty);
            qp.linear_cost.segment(0, n) = cur.g;
            const QPResult qr = solve_qp(qp);
            if (!qr.z.allFinite()) {
                sol.diagnostic = "QP subproblem produced a non-finite step";
                sol.status = SolveStatus::LineSearchFailure;
                goto finish;
            }
            d = qr.z.segment(0, n);
            y_eq = qr.y_eq;
            lam_in = qr.lambda_in.segment(0, mi);
            lam_up = Eigen::VectorXd::Zero(n);
            lam_lo = Eigen::VectorXd::Zero(n);
            for (int j = 0; j < n; ++j) {
                if (upper_rows[j] >= 0) lam_up(j) = qr.lambda_in(upper_rows[j]);
                if (lower_rows[j] >= 0) lam_lo(j) = qr.lambda_in(lower_rows[j]);
            }
            elastic_sum = qr.z.segment(n, n_el).cwiseMax(0.0).sum();

            const bool leaned = elastic_sum > 1e-12 * (1.0 + v_now);
            if (attempt > 0 && leaned && elastic_sum > 0.9 * prev_elastic) {
                // The stiffer penalty failed to shrink the elastic residue:
                // revert to the gentler one and its step.
                penalty = prev_penalty;
                d = pd;
                y_eq = py;
                lam_in = pin;
                lam_up = pup;
                lam_lo = plo;
                elastic_sum = prev_elastic;
                break;
            }
            // A multiplier alone touching the cap at a near-feasible point is
            // not evidence that the penalty is too low.
            const double lam_max =
                std::max(me ? y_eq.cwiseAbs().maxCoeff() : 0.0,
                         mi ? lam_in.maxCoeff() : 0.0);
            if (lam_max < 0.999 * penalty || !leaned ||
                penalty >= options.max_penalty || attempt >= 4)
                break;
            prev_elastic = elastic_sum;
            prev_penalty = penalty;
            pd = d;
            py = y_eq;
            pin = lam_in;
            pup = lam_up;
            plo = lam_lo;
            penalty = std::min(std::max(2.0 * penalty, 1.2 * lam_max), options.max_penalty);
        }

        // A penalty inflated while fighting an earlier infeasible stretch
        // holds every later step hostage: the merit term prices the O(step^2)
        // constraint-curvature violation thousands of times higher than the
        // objective improvement it buys, and the line search crawls.  Once
        // the iterate sits feasible for a few iterations with multipliers
        // far below the cap, relax the penalty back toward them.
        const double lam_now = std::max(me ? y_eq.cwiseAbs().maxCoeff() : 0.0,
                                        mi ? lam_in.maxCoeff() : 0.0);
        feasible_streak =
            elastic_sum <= 1e-12 * (1.0 + v_now) ? feasible_streak + 1 : 0;
        if (feasible_streak >= 3 && penalty > options.initial_penalty &&
            penalty > 10.0 * (lam_now + 1.0))
            penalty = std::max(options.initial_penalty, 2.0 * (lam_now + 1.0));

        // --- Convergence test at the current point -------------------------
        Eigen::VectorXd stat = cur.g + lam_up - lam_lo;
        if (sp.m() > 0) {
            Eigen::VectorXd all_lam(sp.m());
            all_lam.segment(0, me) = y_eq;
            all_lam.segment(me, mi) = lam_in;
            stat += J.transpose() * all_lam;
        }
        // Bound multipliers of inactive bounds carry O(mu) noise; project the
        // stationarity onto the box to ignore it.
        for (int j = 0; j < n; ++j) {
            if (x(j) <= sp.lb()(j) + 1e-12 && stat(j) > 0.0) stat(j) = 0.0;
            if (x(j) >= sp.ub()(j) - 1e-12 && stat(j) < 0.0) stat(j) = 0.0;
        }
        const double viol = violation_max(cur.c, me);
        const double kkt = stat.cwiseAbs().maxCoeff();
        sol.kkt_residual = kkt;
        sol.max_violation = viol;
        if (viol <= options.feas_tol && kkt <= options.opt_tol) {
            sol.status = SolveStatus::Converged;
            sol.lambda_eq = y_eq;
            sol.lambda_in = lam_in;
            break;
        }

        // --- l1 merit line search ------------------------------------------
        const double merit_now = cur.f + penalty * v_now;
        // Directional derivative bound: the elastic sum is the linearized
        // violation remaining after a unit step.
        const double deriv = cur.g.dot(d) + penalty * (elastic_sum - v_now);

        if (deriv > -1e-14 * std::max(1.0, std::abs(merit_now))) {
            if (d.lpNorm<Eigen::Infinity>() < 1e-12 && viol <= options.feas_tol) {
                // No direction left and feasible: accept as converged at the
                // achievable precision.
                sol.status = kkt <= 10.0 * options.opt_tol ? SolveStatus::Converged
                                                          : SolveStatus::LineSearchFailure;
                sol.lambda_eq = y_eq;
                sol.lambda_in = lam_in;
                if (sol.status != SolveStatus::Converged)
                    sol.diagnostic = "stalled with a non-descent direction";
                break;
            }
            if (bfgs.pairs() > 0) {
                // A non-descent direction from an exact elastic QP is
                // impossible with a sane Hessian model, so the curvature
                // model went bad; start the quasi-Newton approximation over.
                bfgs.reset();
                continue;
            }
            if (penalty < options.max_penalty) {
                penalty = std::min(10.0 * penalty, options.max_penalty);
                continue;
            }
            sol.status = viol > options.feas_tol ? SolveStatus::Infeasible
                                                 : SolveStatus::LineSearchFailure;
            sol.diagnostic = "no descent direction at the maximum penalty";
            break;
        }

        const double c_armijo = 1e-4;
        double alpha = 1.0;
        Eigen::VectorXd step = d;
        Eigen::VectorXd x_new;
        Evaluation trial;
        bool accepted = false;
        for (; alpha >= 1e-12; alpha *= 0.5) {
            x_new = x + alpha * d;
            trial = evaluate(x_new, false);
            if (trial.finite() &&
                trial.f + penalty * violation_l1(trial.c, me) <=
                    merit_now + c_armijo * alpha * deriv) {
                step = alpha * d;
                accepted = true;
                break;
            }
            // Steps along a curved constraint surface get rejected because
            // the chord re-inflates the violation term quadratically.  Retry
            // the same step with a minimum-norm correction back toward the
            // surface, computed from the violation observed at the rejected
            // point, before shortening further.
            if (sp.m() > 0 && alpha >= 0.015 && trial.finite() &&
                violation_l1(trial.c, me) > v_now) {
                const Eigen::VectorXd dc = normal_correction(trial.c);
                if (dc.allFinite() && dc.norm() <= 2.0 * alpha * d.norm()) {
                    Eigen::VectorXd xc = x_new + dc;
                    for (int i = 0; i < n; ++i)
                        xc(i) = std::clamp(xc(i), sp.lb()(i), sp.ub()(i));
                    Evaluation t2 = evaluate(xc, false);
                    if (t2.finite() && t2.f + penalty * violation_l1(t2.c, me) <=
                                           merit_now + c_armijo * alpha * deriv) {
                        trial = std::move(t2);
                        step = xc - x;
                        x_new = std::move(xc);
                        accepted = true;
                        break;
                    }
                }
            }
        }
        if (!accepted) {
            if (bfgs.pairs() > 0) {
                bfgs.reset();
                continue;
            }
            if (penalty < options.max_penalty && viol > options.feas_tol) {
                penalty = std::min(10.0 * penalty, options.max_penalty);
                continue;
            }
            sol.status = viol > options.feas_tol ? SolveStatus::Infeasible
                                                 : SolveStatus::LineSearchFailure;
            sol.diagnostic = "merit line search failed";
            sol.lambda_eq = y_eq;
            sol.lambda_in = lam_in;
            break;
        }

        trial.g = sp.gradient(x_new, trial.f, options.derivative_mode);
        sp.jacobian(x_new, trial.c, options.derivative_mode, trial.jac);

        // Quasi-Newton pair: difference of Lagrangian gradients at fixed
        // multipliers (bound terms are constant and cancel).  Steps at the
        // finite-difference noise floor carry no curvature signal, so skip
        // them rather than let them corrupt the scale of the approximation.
        Eigen::VectorXd grad_l_new = trial.g, grad_l_old = cur.g;
        if (sp.m() > 0) {
            Eigen::VectorXd all_lam(sp.m());
            all_lam.segment(0, me) = y_eq;
            all_lam.segment(me, mi) = lam_in;
            grad_l_old += J.transpose() * all_lam;
            rebuild_jacobian(trial.jac);
            grad_l_new += J.transpose() * all_lam;
        }
        const double pair_floor =
            options.derivative_mode == DerivativeMode::Provided ? 1e-14 : 1e-7;
        if (step.norm() > pair_floor * (1.0 + x.norm()))
            bfgs.update(step, grad_l_new - grad_l_old);

        x = x_new;
        for (int i = 0; i < n; ++i) x(i) = std::clamp(x(i), sp.lb()(i), sp.ub()(i));
        cur = std::move(trial);
        sol.lambda_eq = y_eq;
        sol.lambda_in = lam_in;

        if (options.iteration_log) {
            *options.iteration_log << iter << '\t' << cur.f << '\t'
                                   << cur.f + penalty * violation_l1(cur.c, me) << '\t'
                                   << violation_max(cur.c, me) << '\t' << alpha << '\t'
                                   << penalty << '\n';
        }
    }

finish:
    sol.iterations = iter;
    sol.x = sp.unscale(x);
    sol.objective = cur.f;
    sol.max_violation = violation_max(cur.c, me);
    if (sol.status == SolveStatus::MaxIterations)
        sol.diagnostic = "iteration limit reached";
    return sol;
}

DerivativeReport check_derivatives(const NLPProblem& problem, const Eigen::VectorXd& x,
                                   const SolverOptions& options) {
    ScaledProblem sp(problem, options);
    const int n = sp.n();
    const int m = sp.m();

    Eigen::VectorXd xs = sp.scale_x(x);
    const double f0 = sp.objective(xs);
    const Eigen::VectorXd c0 = sp.constraints(xs);

    // Derivatives along the configured path.
    std::vector<double> vals;
    sp.jacobian(xs, c0, options.derivative_mode, vals);
    const Eigen::VectorXd grad = sp.gradient(xs, f0, options.derivative_mode);

    Eigen::MatrixXd jac_mode = Eigen::MatrixXd::Zero(std::max(m, 1), n);
    for (size_t i = 0; i < sp.pattern().size(); ++i)
        jac_mode(sp.pattern()[i].first, sp.pattern()[i].second) = vals[i];

    // Dense central-difference reference, column by column.
    Eigen::MatrixXd jac_ref = Eigen::MatrixXd::Zero(std::max(m, 1), n);
    Eigen::VectorXd grad_ref = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const double h = 6.0554544523933395e-06 * std::max(1.0, std::abs(xs(j)));
        Eigen::VectorXd xp = xs, xm = xs;
        xp(j) += h;
        xm(j) -= h;
        if (m > 0) jac_ref.col(j) = (sp.constraints(xp) - sp.constraints(xm)) / (2.0 * h);
        grad_ref(j) = (sp.objective(xp) - sp.objective(xm)) / (2.0 * h);
    }

    DerivativeReport rep;
    rep.row_errors = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r) {
        const double scale = 1.0 + jac_ref.row(r).cwiseAbs().maxCoeff();
        rep.row_errors(r) = (jac_mode.row(r) - jac_ref.row(r)).cwiseAbs().maxCoeff() / scale;
        if (rep.row_errors(r) > rep.max_error) {
            rep.max_error = rep.row_errors(r);
            rep.worst_row = r;
        }
    }
    const double gscale = 1.0 + grad_ref.cwiseAbs().maxCoeff();
    rep.gradient_error = (grad - grad_ref).cwiseAbs().maxCoeff() / gscale;
    if (rep.gradient_error > rep.max_error) {
        rep.max_error = rep.gradient_error;
        rep.worst_row = -1;
    }
    return rep;
}

} // namespace rfam::nlp
