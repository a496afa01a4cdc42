#include "rfam/nlp/qp.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

namespace rfam::nlp {

namespace {

// Largest step in [0, 1] keeping v + alpha*dv strictly positive (fraction
// tau of the way to the boundary).
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
    double alpha = 1.0;
    for (int i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) alpha = std::min(alpha, -tau * v(i) / dv(i));
    return alpha;
}

} // namespace

QPResult solve_qp(const QPProblem& qp, const QPOptions& options) {
    const int n = qp.n;
    const int me = static_cast<int>(qp.b_eq.size());
    const int mi = static_cast<int>(qp.h_in.size());
    const int k = static_cast<int>(qp.low_rank_w.cols());
    const int dim = n + me + mi + k;

    QPResult res;
    res.z = Eigen::VectorXd::Zero(n);
    res.y_eq = Eigen::VectorXd::Zero(me);
    res.lambda_in = Eigen::VectorXd::Ones(mi);
    res.slack = Eigen::VectorXd::Ones(mi);

    // H z without forming H: diag part minus the low-rank correction.  The
    // small block is indefinite by construction, so plain LU.
    Eigen::PartialPivLU<Eigen::MatrixXd> minv_lu;
    if (k > 0) minv_lu.compute(qp.low_rank_minv);
    auto hess_mul = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        Eigen::VectorXd hz = qp.hessian_diag.cwiseProduct(z);
        if (k > 0) hz -= qp.low_rank_w * minv_lu.solve(qp.low_rank_w.transpose() * z);
        return hz;
    };

    Eigen::VectorXd& z = res.z;
    Eigen::VectorXd& y = res.y_eq;
    Eigen::VectorXd& lam = res.lambda_in;
    Eigen::VectorXd& s = res.slack;

    // Slack start: satisfy G z + s = h where possible, but stay clearly
    // interior.
    if (mi > 0) {
        const Eigen::VectorXd gz = qp.g_in * z;
        for (int i = 0; i < mi; ++i) s(i) = std::max(qp.h_in(i) - gz(i), 1.0);
    }

    const double rel = 1.0 + std::max({qp.linear_cost.size() ? qp.linear_cost.cwiseAbs().maxCoeff() : 0.0,
                                       me ? qp.b_eq.cwiseAbs().maxCoeff() : 0.0,
                                       mi ? qp.h_in.cwiseAbs().maxCoeff() : 0.0});
    const double tol = options.tolerance * rel;

    double delta_p = 1e-11 * (1.0 + qp.hessian_diag.cwiseAbs().maxCoeff());
    double delta_d = 1e-11;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analyzed = false;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        res.iterations = iter;

        Eigen::VectorXd r_dual = hess_mul(z) + qp.linear_cost;
        if (me > 0) r_dual += qp.a_eq.transpose() * y;
        if (mi > 0) r_dual += qp.g_in.transpose() * lam;
        const Eigen::VectorXd r_eq = me > 0 ? Eigen::VectorXd(qp.a_eq * z - qp.b_eq)
                                            : Eigen::VectorXd();
        const Eigen::VectorXd r_in = mi > 0 ? Eigen::VectorXd(qp.g_in * z + s - qp.h_in)
                                            : Eigen::VectorXd();
        const double mu = mi > 0 ? lam.dot(s) / mi : 0.0;
        res.gap = mu;

        const double err = std::max({r_dual.cwiseAbs().maxCoeff(),
                                     me ? r_eq.cwiseAbs().maxCoeff() : 0.0,
                                     mi ? r_in.cwiseAbs().maxCoeff() : 0.0});
        if (err <= tol && mu <= tol) {
            res.success = true;
            break;
        }

        // Assemble the bordered KKT matrix; the inequality block carries
        // Sigma = diag(s/lam).
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(qp.a_eq.nonZeros() + qp.g_in.nonZeros()) * 2 +
                     static_cast<size_t>(n + me + mi + 2 * n * k + k * k));
        for (int i = 0; i < n; ++i)
            trip.emplace_back(i, i, qp.hessian_diag(i) + delta_p);
        for (int c = 0; c < qp.a_eq.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(qp.a_eq, c); it; ++it) {
                trip.emplace_back(n + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), n + it.row(), it.value());
            }
        for (int i = 0; i < me; ++i) trip.emplace_back(n + i, n + i, -delta_d);
        for (int c = 0; c < qp.g_in.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(qp.g_in, c); it; ++it) {
                trip.emplace_back(n + me + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), n + me + it.row(), it.value());
            }
        for (int i = 0; i < mi; ++i)
            trip.emplace_back(n + me + i, n + me + i, -s(i) / lam(i));
        for (int c = 0; c < k; ++c) {
            for (int i = 0; i < n; ++i) {
                const double w = qp.low_rank_w(i, c);
                if (w != 0.0) {
                    trip.emplace_back(i, n + me + mi + c, -w);
                    trip.emplace_back(n + me + mi + c, i, w);
                }
            }
            for (int c2 = 0; c2 < k; ++c2)
                trip.emplace_back(n + me + mi + c, n + me + mi + c2,
                                  -qp.low_rank_minv(c, c2));
        }

        Eigen::SparseMatrix<double> kkt(dim, dim);
        kkt.setFromTriplets(trip.begin(), trip.end());
        kkt.makeCompressed();
        if (!analyzed) {
            lu.analyzePattern(kkt);
            analyzed = true;
        }
        lu.factorize(kkt);
        if (lu.info() != Eigen::Success) {
            delta_p *= 1e3;
            delta_d *= 1e3;
            if (delta_p > 1e-2) break; // hopelessly singular
            continue;
        }

        auto solve_with_target = [&](const Eigen::VectorXd& t) {
            Eigen::VectorXd rhs(dim);
            rhs.segment(0, n) = -r_dual;
            if (me > 0) rhs.segment(n, me) = -r_eq;
            for (int i = 0; i < mi; ++i)
                rhs(n + me + i) = -r_in(i) - (t(i) - lam(i) * s(i)) / lam(i);
            rhs.segment(n + me + mi, k).setZero();
            return Eigen::VectorXd(lu.solve(rhs));
        };

        Eigen::VectorXd dz, dy, dlam, ds;
        double sigma = 0.0;
        if (mi > 0) {
            // Affine probe to pick the centering weight.
            const Eigen::VectorXd aff = solve_with_target(Eigen::VectorXd::Zero(mi));
            const Eigen::VectorXd dlam_a = aff.segment(n + me, mi);
            Eigen::VectorXd ds_a = -r_in - qp.g_in * aff.segment(0, n);
            const double ap = max_step(s, ds_a, 1.0);
            const double ad = max_step(lam, dlam_a, 1.0);
            const double mu_aff = (lam + ad * dlam_a).dot(s + ap * ds_a) / mi;
            sigma = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);
            sigma = std::min(sigma, 1.0);

            Eigen::VectorXd t(mi);
            for (int i = 0; i < mi; ++i) t(i) = sigma * mu - dlam_a(i) * ds_a(i);
            const Eigen::VectorXd cor = solve_with_target(t);
            dz = cor.segment(0, n);
            dy = cor.segment(n, me);
            dlam = cor.segment(n + me, mi);
            ds = -r_in - qp.g_in * dz;
        } else {
            const Eigen::VectorXd sol = solve_with_target(Eigen::VectorXd());
            dz = sol.segment(0, n);
            dy = sol.segment(n, me);
        }

        if (!dz.allFinite()) {
            delta_p *= 1e3;
            delta_d *= 1e3;
            if (delta_p > 1e-2) break;
            continue;
        }

        double ap = 1.0, ad = 1.0;
        if (mi > 0) {
            ap = max_step(s, ds, 0.995);
            ad = max_step(lam, dlam, 0.995);
        }
        z += ap * dz;
        if (me > 0) y += ad * dy;
        if (mi > 0) {
            s += ap * ds;
            lam += ad * dlam;
        }
        if (mi == 0) {
            // Equality-constrained problem: one Newton step solves it; loop
            // again only to confirm the residual test.
            continue;
        }
    }
    res.slack = s;
    return res;
}

} // namespace rfam::nlp
