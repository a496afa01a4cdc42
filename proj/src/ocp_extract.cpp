#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfam/constants.hpp"
#include "rfam/dynamics.hpp"
#include "rfam/frames.hpp"
#include "rfam/ocp/rocket.hpp"

namespace rfam::ocp {

namespace {

const SegmentLayout* find_kind(const Transcription& tr, SegmentKind kind) {
    for (const SegmentLayout& s : tr.segments)
        if (s.kind == kind) return &s;
    return nullptr;
}

double node_mass(const Eigen::VectorXd& x, const SegmentLayout& lay, int k) {
    return x[lay.first_var + k * lay.block + 6];
}

// Shared reader: fills mission-level fields from a solver iterate without
// judging convergence.
SizingSolution read_solution(const MultiPhaseOCP& ocp, const Transcription& tr,
                             const nlp::NLPSolution& sol) {
    SizingSolution out;
    out.raw = sol;
    const Eigen::VectorXd& x = sol.x;
    const VehicleSpec& veh = ocp.vehicle;
    const int np = static_cast<int>(ocp.phases.size());

    const SegmentLayout* upper = find_kind(tr, SegmentKind::UpperAscent);
    if (upper == nullptr) throw std::runtime_error("transcription lacks the orbit-insertion leg");

    // Mass bookkeeping.  Propellant follows each stage's structure identity;
    // a partially fuelled shared second stage instead loads what it burns.
    MassConfiguration cfg;
    cfg.m_s1 = x[tr.ms1_var];
    cfg.m_s2 = x[tr.ms2_var];
    cfg.m_L = x[tr.ml_var];
    cfg.m_p1 = propellant_from_structure(cfg.m_s1, veh.stages[0].structure_ratio);
    const bool partial_tank2 =
        ocp.variant == ProblemVariant::FamilySub && ocp.compatible_stage == 2;
    cfg.m_p2 = partial_tank2
                   ? node_mass(x, *upper, 0) - node_mass(x, *upper, upper->nodes - 1)
                   : propellant_from_structure(cfg.m_s2, veh.stages[1].structure_ratio);
    out.masses = cfg;
    out.glow = glow(cfg, veh.fairing_mass);
    out.payload = cfg.m_L;

    switch (ocp.variant) {
        case ProblemVariant::Baseline:
            out.m_c = 0.0;
            break;
        case ProblemVariant::CommonalityProbe:
            out.m_c = tr.probe_var >= 0 ? x[tr.probe_var] : 0.0;
            break;
        case ProblemVariant::FamilySub:
            out.m_c = ocp.m_c;
            break;
    }
    if (ocp.variant == ProblemVariant::CommonalityProbe) {
        out.objective = out.m_c;
    } else if (ocp.cost_evaluator && cfg.m_L > 0.0) {
        try {
            out.objective = ocp.cost_evaluator(cfg, out.glow) / cfg.m_L;
        } catch (const std::exception&) {
            out.objective = sol.objective;
        }
    } else {
        out.objective = sol.objective;
    }

    // Orbit reached at the end of the insertion burn.
    {
        const int last = upper->first_var + (upper->nodes - 1) * upper->block;
        try {
            out.achieved = orbital_elements(x.segment<3>(last), x.segment<3>(last + 3));
        } catch (const std::exception&) {
            out.achieved = OrbitalElements{};
        }
    }

    // Phase durations and wall-clock phase starts.  A booster branch starts
    // at separation, so its clock runs parallel to the upper stage's.
    std::vector<double> seg_T(tr.segments.size(), 0.0);
    std::vector<double> dur(np + 1, 0.0);
    for (size_t i = 0; i < tr.segments.size(); ++i) {
        const SegmentLayout& lay = tr.segments[i];
        seg_T[i] = lay.duration_var >= 0 ? x[lay.duration_var] : lay.fixed_duration;
        dur[lay.phase_index] += seg_T[i];
    }
    std::vector<double> start(np + 1, 0.0);
    for (int pass = 0; pass < np; ++pass)
        for (const Linkage& l : ocp.linkages)
            start[l.to_phase] = start[l.from_phase] + dur[l.from_phase];
    out.phase_durations.assign(dur.begin() + 1, dur.end());

    // Trajectory export.  Within a phase the segment-boundary node is shared,
    // so it is written once; constant-flow burn masses are pinned to their
    // exact linear profiles (collocation leaves only rounding there).
    int cur_phase = -1;
    double t_cursor = 0.0;
    double m_cursor = 0.0;
    for (size_t i = 0; i < tr.segments.size(); ++i) {
        const SegmentLayout& lay = tr.segments[i];
        const StageSpec& stage = veh.stages[lay.stage];
        const bool first_in_phase = lay.phase_index != cur_phase;
        if (first_in_phase) {
            cur_phase = lay.phase_index;
            t_cursor = start[cur_phase];
            m_cursor = node_mass(x, lay, 0);
        }
        const double h = seg_T[i] / (lay.nodes - 1);
        const bool throttled = lay.control == ControlMode::DirectionThrottle;
        for (int k = 0; k < lay.nodes; ++k) {
            const double tk = k * h;
            double m;
            if (!lay.burning)
                m = m_cursor;
            else if (throttled)
                m = node_mass(x, lay, k);
            else
                m = m_cursor - stage.mass_flow() * tk;
            if (k == 0 && !first_in_phase) continue;

            const int base = lay.first_var + k * lay.block;
            TrajectoryNode nd;
            nd.t = t_cursor + tk;
            nd.phase = lay.phase_index;
            nd.r = x.segment<3>(base);
            nd.v = x.segment<3>(base + 3);
            nd.m = m;

            const Eigen::Vector3d rhat = nd.r.normalized();
            switch (lay.attitude) {
                case AttitudeRule::FromControl: {
                    const Eigen::Vector3d u = x.segment<3>(base + 7);
                    nd.u = u.norm() > 1e-9 ? Eigen::Vector3d(u.normalized()) : rhat;
                    break;
                }
                case AttitudeRule::Radial:
                    nd.u = rhat;
                    break;
                case AttitudeRule::Retrograde: {
                    State s;
                    s.r = nd.r;
                    s.v = nd.v;
                    s.m = std::max(nd.m, 1.0);
                    s.t = nd.t;
                    const Eigen::Vector3d vrel = relative_velocity(s);
                    nd.u = vrel.norm() > 0.5 ? Eigen::Vector3d(-vrel.normalized()) : rhat;
                    break;
                }
            }
            if (!lay.burning)
                nd.thrust = 0.0;
            else if (throttled)
                nd.thrust = x[base + 10] * stage.thrust_sea_level;
            else
                nd.thrust = thrust_at_altitude(stage, nd.r.norm() - kEarthRadius);
            out.trajectory.nodes.push_back(nd);
        }
        // Advance the phase clock and the polished mass to the segment end.
        t_cursor += seg_T[i];
        if (!lay.burning)
            ;  // coasting leaves the mass where it was
        else if (throttled)
            m_cursor = node_mass(x, lay, lay.nodes - 1);
        else
            m_cursor -= stage.mass_flow() * seg_T[i];
    }
    return out;
}

} // namespace

SizingSolution extract_solution(const MultiPhaseOCP& ocp, const Transcription& tr,
                                const nlp::NLPSolution& sol) {
    if (sol.status != nlp::SolveStatus::Converged)
        throw std::runtime_error(std::string("sizing solve did not converge: ") +
                                 nlp::to_string(sol.status) +
                                 (sol.diagnostic.empty() ? "" : " (" + sol.diagnostic + ")"));
    return read_solution(ocp, tr, sol);
}

SizingSolution solve_sizing(const MultiPhaseOCP& ocp, const SizingOptions& options) {
    const Transcription tr = transcribe(ocp, options.mesh);

    Eigen::VectorXd x0;
    std::string seed_note;
    if (options.warm_start != nullptr && options.warm_start->size() == tr.problem.n) {
        x0 = *options.warm_start;
        for (int i = 0; i < tr.problem.n; ++i)
            x0[i] = std::min(std::max(x0[i], tr.problem.lb[i]), tr.problem.ub[i]);
        seed_note = "warm start";
    } else {
        const InitialGuess g = initial_guess(ocp, tr);
        x0 = g.x;
        seed_note = g.note;
    }

    nlp::SolverOptions sopt = options.solver;
    sopt.x_scale = tr.x_scale;
    sopt.constraint_scale = tr.constraint_scale;
    nlp::NLPSolution sol = nlp::solve(tr.problem, x0, sopt);
    if (!seed_note.empty())
        sol.diagnostic += (sol.diagnostic.empty() ? "seed: " : "; seed: ") + seed_note;
    return read_solution(ocp, tr, sol);
}

} // namespace rfam::ocp
