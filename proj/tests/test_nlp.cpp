#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "rfam/nlp/qp.hpp"
#include "rfam/nlp/sparse_fd.hpp"
#include "rfam/nlp/sqp.hpp"
#include "rfam/parallel.hpp"

using namespace rfam;
using namespace rfam::nlp;

namespace {

NLPProblem unconstrained_parabola() {
    NLPProblem p;
    p.n = 1;
    p.objective = [](const Eigen::VectorXd& x) { return (x(0) - 3.0) * (x(0) - 3.0); };
    p.constraints = [](const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::VectorXd&) {};
    return p;
}

// min x1 + x2 on the unit circle; optimum at (-s, -s), s = sqrt(2)/2.
NLPProblem circle_problem() {
    NLPProblem p;
    p.n = 2;
    p.n_eq = 1;
    p.objective = [](const Eigen::VectorXd& x) { return x(0) + x(1); };
    p.constraints = [](const Eigen::VectorXd& x, Eigen::VectorXd& ce, Eigen::VectorXd&) {
        ce(0) = x(0) * x(0) + x(1) * x(1) - 1.0;
    };
    p.jacobian_pattern = {{0, 0}, {0, 1}};
    return p;
}

// Classic four-variable benchmark: product/sum objective, one inequality,
// one sphere equality, box 1..5; optimum 17.0140173.
NLPProblem hs71() {
    NLPProblem p;
    p.n = 4;
    p.n_eq = 1;
    p.n_in = 1;
    p.lb = Eigen::VectorXd::Constant(4, 1.0);
    p.ub = Eigen::VectorXd::Constant(4, 5.0);
    p.objective = [](const Eigen::VectorXd& x) {
        return x(0) * x(3) * (x(0) + x(1) + x(2)) + x(2);
    };
    p.constraints = [](const Eigen::VectorXd& x, Eigen::VectorXd& ce, Eigen::VectorXd& ci) {
        ce(0) = x.squaredNorm() - 40.0;
        ci(0) = 25.0 - x(0) * x(1) * x(2) * x(3);
    };
    for (int j = 0; j < 4; ++j) p.jacobian_pattern.emplace_back(0, j);
    for (int j = 0; j < 4; ++j) p.jacobian_pattern.emplace_back(1, j);
    return p;
}

} // namespace

TEST_CASE("column coloring groups structurally independent columns") {
    // Block-diagonal 2x2 blocks: columns of different blocks never clash.
    std::vector<std::pair<int, int>> entries;
    for (int b = 0; b < 5; ++b)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) entries.emplace_back(2 * b + r, 2 * b + c);
    const auto colored = color_pattern(10, 10, entries);
    CHECK(colored.groups.size() == 2);

    // A dense column forces itself into a singleton-ish group.
    entries.emplace_back(0, 9);
    entries.emplace_back(9, 9);
    const auto colored2 = color_pattern(10, 10, entries);
    CHECK(colored2.groups.size() <= 3);
}

TEST_CASE("sparse finite differences match analytic derivatives") {
    // f(x) = (x0^2 + x1, x1 x2, sin x2) with block sparsity.
    std::vector<std::pair<int, int>> entries = {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}};
    const auto pattern = color_pattern(3, 3, entries);
    const VectorFn f = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd out(3);
        out << x(0) * x(0) + x(1), x(1) * x(2), std::sin(x(2));
        return out;
    };
    const Eigen::VectorXd x = (Eigen::VectorXd(3) << 1.2, -0.7, 0.4).finished();
    std::vector<double> vals;
    fd_jacobian(pattern, f, x, f(x), /*central=*/true, vals);

    const double expected[] = {2.0 * 1.2, 1.0, 0.4, -0.7, std::cos(0.4)};
    for (int i = 0; i < 5; ++i) CHECK(vals[i] == doctest::Approx(expected[i]).epsilon(1e-8));

    SUBCASE("serial and parallel backends agree bitwise") {
        std::vector<double> serial_vals, parallel_vals;
        set_exec_backend(ExecBackend::Serial);
        fd_jacobian(pattern, f, x, f(x), false, serial_vals);
        set_exec_backend(ExecBackend::Parallel);
        fd_jacobian(pattern, f, x, f(x), false, parallel_vals);
        set_exec_backend(ExecBackend::Parallel);
        REQUIRE(serial_vals.size() == parallel_vals.size());
        for (size_t i = 0; i < serial_vals.size(); ++i)
            CHECK(std::memcmp(&serial_vals[i], &parallel_vals[i], sizeof(double)) == 0);
    }
}

TEST_CASE("interior-point quadratic program") {
    // min 0.5|z|^2 - z0 + z1/2  s.t.  z0 + z1 = 1, z >= 0  ->  z = (1, 0)
    // with a strictly positive multiplier on the active bound.
    QPProblem qp;
    qp.n = 2;
    qp.hessian_diag = Eigen::VectorXd::Ones(2);
    qp.linear_cost = (Eigen::VectorXd(2) << -1.0, 0.5).finished();
    qp.a_eq.resize(1, 2);
    qp.a_eq.insert(0, 0) = 1.0;
    qp.a_eq.insert(0, 1) = 1.0;
    qp.b_eq = Eigen::VectorXd::Ones(1);
    qp.g_in.resize(2, 2);
    qp.g_in.insert(0, 0) = -1.0;
    qp.g_in.insert(1, 1) = -1.0;
    qp.h_in = Eigen::VectorXd::Zero(2);

    const QPResult r = solve_qp(qp);
    CHECK(r.success);
    CHECK(r.z(0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.z(1) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("unconstrained minimum") {
    const auto sol = solve(unconstrained_parabola(), Eigen::VectorXd::Zero(1));
    CHECK(sol.status == SolveStatus::Converged);
    CHECK(sol.x(0) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("equality-constrained linear objective on the unit circle") {
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.8;
    const auto sol = solve(circle_problem(), x0);
    CHECK(sol.status == SolveStatus::Converged);
    const double s = std::sqrt(2.0) / 2.0;
    CHECK(sol.objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-6));
    CHECK(sol.x(0) == doctest::Approx(-s).epsilon(1e-5));
    CHECK(sol.x(1) == doctest::Approx(-s).epsilon(1e-5));
    CHECK(sol.max_violation <= 1e-6);
}

TEST_CASE("four-variable benchmark with box, equality, and inequality") {
    Eigen::VectorXd x0(4);
    x0 << 1.0, 5.0, 5.0, 1.0;
    const auto sol = solve(hs71(), x0);
    CHECK(sol.status == SolveStatus::Converged);
    CHECK(sol.objective == doctest::Approx(17.0140173).epsilon(1e-6));
    CHECK(sol.max_violation <= 1e-6);
    // Re-evaluate the constraints at the reported solution.
    Eigen::VectorXd ce(1), ci(1);
    hs71().constraints(sol.x, ce, ci);
    CHECK(std::abs(ce(0)) <= 1e-5);
    CHECK(ci(0) <= 1e-5);
}

TEST_CASE("solver honors variable bounds") {
    NLPProblem p;
    p.n = 2;
    p.lb = Eigen::VectorXd::Zero(2);
    p.ub = Eigen::VectorXd::Ones(2);
    p.objective = [](const Eigen::VectorXd& x) {
        return (x(0) + 1.0) * (x(0) + 1.0) + (x(1) - 2.0) * (x(1) - 2.0);
    };
    p.constraints = [](const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::VectorXd&) {};
    const auto sol = solve(p, Eigen::VectorXd::Constant(2, 0.5));
    CHECK(sol.status == SolveStatus::Converged);
    CHECK(sol.x(0) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("identical inputs give bitwise-identical solutions") {
    Eigen::VectorXd x0(4);
    x0 << 1.0, 5.0, 5.0, 1.0;
    const auto a = solve(hs71(), x0);
    const auto b = solve(hs71(), x0);
    REQUIRE(a.x.size() == b.x.size());
    CHECK(std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()) == 0);
    CHECK(a.iterations == b.iterations);
    CHECK(a.objective == b.objective);
}

TEST_CASE("merit function does not increase across accepted steps") {
    std::ostringstream log;
    SolverOptions opt;
    opt.initial_penalty = 100.0; // high enough that the penalty never moves
    opt.iteration_log = &log;
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.8;
    const auto sol = solve(circle_problem(), x0, opt);
    CHECK(sol.status == SolveStatus::Converged);

    std::istringstream in(log.str());
    std::string line;
    double last_merit = 0.0, last_penalty = -1.0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        int iter;
        double f, merit, viol, alpha, penalty;
        fields >> iter >> f >> merit >> viol >> alpha >> penalty;
        if (last_penalty == penalty) CHECK(merit <= last_merit + 1e-10);
        last_merit = merit;
        last_penalty = penalty;
    }
}

TEST_CASE("scaled constraint rows report the same violation") {
    // Same geometry with the equality row multiplied by 1000 and the matching
    // row scaling: the solver sees identical scaled values.
    NLPProblem scaled = circle_problem();
    scaled.constraints = [](const Eigen::VectorXd& x, Eigen::VectorXd& ce, Eigen::VectorXd&) {
        ce(0) = 1000.0 * (x(0) * x(0) + x(1) * x(1) - 1.0);
    };
    SolverOptions opt;
    opt.constraint_scale = Eigen::VectorXd::Constant(1, 1000.0);

    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.8;
    const auto plain = solve(circle_problem(), x0);
    const auto rescaled = solve(scaled, x0, opt);
    CHECK(rescaled.status == SolveStatus::Converged);
    CHECK(rescaled.x(0) == doctest::Approx(plain.x(0)).epsilon(1e-6));
    CHECK(rescaled.x(1) == doctest::Approx(plain.x(1)).epsilon(1e-6));
    CHECK(rescaled.max_violation <= 1e-6);
}

TEST_CASE("infeasible constraints are detected") {
    NLPProblem p;
    p.n = 1;
    p.n_eq = 2;
    p.objective = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
    p.constraints = [](const Eigen::VectorXd& x, Eigen::VectorXd& ce, Eigen::VectorXd&) {
        ce(0) = x(0) - 1.0;
        ce(1) = x(0) + 1.0; // cannot both vanish
    };
    p.jacobian_pattern = {{0, 0}, {1, 0}};
    SolverOptions opt;
    opt.max_iterations = 100;
    const auto sol = solve(p, Eigen::VectorXd::Zero(1), opt);
    CHECK(sol.status != SolveStatus::Converged);
    CHECK(sol.max_violation > 0.5);
}

TEST_CASE("derivative checker") {
    SUBCASE("exact gradient on a quadratic passes") {
        NLPProblem p = unconstrained_parabola();
        p.gradient = [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, 2.0 * (x(0) - 3.0));
        };
        SolverOptions opt;
        opt.derivative_mode = DerivativeMode::Provided;
        const auto rep = check_derivatives(p, Eigen::VectorXd::Constant(1, 1.5), opt);
        CHECK(rep.max_error < 1e-7);
    }
    SUBCASE("corrupted gradient entry is flagged") {
        NLPProblem p = unconstrained_parabola();
        p.gradient = [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, 2.0 * (x(0) - 3.0) + 0.5);
        };
        SolverOptions opt;
        opt.derivative_mode = DerivativeMode::Provided;
        const auto rep = check_derivatives(p, Eigen::VectorXd::Constant(1, 1.5), opt);
        CHECK(rep.max_error > 1e-2);
        CHECK(rep.worst_row == -1); // the gradient row
    }
    SUBCASE("corrupted jacobian row is flagged by index") {
        NLPProblem p = circle_problem();
        p.jacobian = [](const Eigen::VectorXd& x, std::vector<double>& v) {
            v[0] = 2.0 * x(0) + 1.0; // wrong on purpose
            v[1] = 2.0 * x(1);
        };
        p.gradient = [](const Eigen::VectorXd&) {
            return (Eigen::VectorXd(2) << 1.0, 1.0).finished();
        };
        SolverOptions opt;
        opt.derivative_mode = DerivativeMode::Provided;
        Eigen::VectorXd x(2);
        x << 0.3, -0.4;
        const auto rep = check_derivatives(p, x, opt);
        CHECK(rep.max_error > 1e-2);
        CHECK(rep.worst_row == 0);
    }
    SUBCASE("finite-difference path agrees with the dense reference") {
        const auto rep =
            check_derivatives(hs71(), (Eigen::VectorXd(4) << 1.0, 5.0, 5.0, 1.0).finished());
        CHECK(rep.max_error < 1e-5);
    }
}
