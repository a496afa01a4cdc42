#pragma once

#include <functional>
#include <vector>

#include "rfam/dynamics.hpp"

namespace rfam {

/** Control program queried by the propagator at every derivative evaluation. */
using ControlLaw = std::function<Control(const State&)>;

struct PropagateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-9;
    double initial_step = 1.0;   // s
    double max_step = 60.0;      // s
    int max_steps = 2000000;
    bool dense_output = true;    // record every accepted step, else endpoints only
};

// Integrates the point-mass equations of motion over [state.t, state.t +
// duration] with an adaptive 5(4) embedded Runge-Kutta pair, returning the
// accepted-step states (first entry is the initial state, last is exactly at
// the end time).  Throws if the mass hits zero mid-burn or the step count
// limit is exceeded.
std::vector<State> propagate(const State& state, const ControlLaw& law, const StageSpec& stage,
                             const DragModel& drag, bool burning, double duration,
                             const PropagateOptions& options = {});

} // namespace rfam
