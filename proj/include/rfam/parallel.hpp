#pragma once

#include <functional>

namespace rfam {

/** Execution backend for the data-parallel kernels (finite-difference
 *  Jacobian columns, per-segment defect evaluation, paired subproblem
 *  solves).  Serial is the reference path; Parallel uses OpenMP when
 *  compiled in and degrades to serial otherwise.  Kernels only make
 *  disjoint writes, so the two backends produce bitwise-identical
 *  results. */
enum class ExecBackend { Serial, Parallel };

// Process-wide backend selection (default Parallel; RFAM_SERIAL=1 in the
// environment forces Serial).
ExecBackend exec_backend();
void set_exec_backend(ExecBackend backend);

// Runs body(i) for i in [0, n) on the selected backend.
void parallel_for(int n, const std::function<void(int)>& body);

// Runs the two closures, concurrently under the Parallel backend.
void parallel_invoke(const std::function<void()>& a, const std::function<void()>& b);

// Number of worker threads the Parallel backend would use (1 without OpenMP).
int parallel_width();

} // namespace rfam
