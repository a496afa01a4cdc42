#include "rfam/propagate.hpp"

#include <cmath>
#include <stdexcept>

namespace rfam {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;

Vec7 pack(const State& s) {
    Vec7 y;
    y << s.r, s.v, s.m;
    return y;
}

State unpack(const Vec7& y, double t) {
    State s;
    s.r = y.segment<3>(0);
    s.v = y.segment<3>(3);
    s.m = y(6);
    s.t = t;
    return s;
}

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,     0.0,         500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,     0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200., 187.0 / 2100, 1.0 / 40};

} // namespace

std::vector<State> propagate(const State& state, const ControlLaw& law, const StageSpec& stage,
                             const DragModel& drag, bool burning, double duration,
                             const PropagateOptions& options) {
    if (!(duration > 0.0)) throw std::domain_error("propagation duration must be positive");

    auto f = [&](double t, const Vec7& y) -> Vec7 {
        State s = unpack(y, t);
        if (!(s.m > 0.0))
            throw std::runtime_error("propagation ran the vehicle out of mass");
        const Control c = law(s);
        const StateDerivative d = eom(s, c, stage, drag, burning);
        Vec7 dy;
        dy << d.r_dot, d.v_dot, d.m_dot;
        return dy;
    };

    std::vector<State> out;
    out.push_back(state);

    const double t_end = state.t + duration;
    double t = state.t;
    Vec7 y = pack(state);
    double h = std::min(options.initial_step, duration);
    Vec7 k[7];
    k[0] = f(t, y);

    for (int step = 0; step < options.max_steps; ++step) {
        if (t >= t_end) break;
        h = std::min({h, options.max_step, t_end - t});

        for (int i = 1; i < 7; ++i) {
            Vec7 yi = y;
            for (int j = 0; j < i; ++j) yi += h * kA[i][j] * k[j];
            k[i] = f(t + kC[i] * h, yi);
        }
        Vec7 y5 = y, err = Vec7::Zero();
        for (int i = 0; i < 7; ++i) {
            y5 += h * kB5[i] * k[i];
            err += h * (kB5[i] - kB4[i]) * k[i];
        }

        double err_norm = 0.0;
        for (int i = 0; i < 7; ++i) {
            const double scale =
                options.abs_tol + options.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
            const double e = err(i) / scale;
            err_norm += e * e;
        }
        err_norm = std::sqrt(err_norm / 7.0);

        if (err_norm <= 1.0) {
            t += h;
            y = y5;
            k[0] = k[6]; // first-same-as-last property of the pair
            if (options.dense_output || t >= t_end) out.push_back(unpack(y, t));
        }
        const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (!(h > 0.0) || t + h == t)
            throw std::runtime_error("propagation step size underflow");
    }
    if (t < t_end) throw std::runtime_error("propagation exceeded the step budget");
    return out;
}

} // namespace rfam
