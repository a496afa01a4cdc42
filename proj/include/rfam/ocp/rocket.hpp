#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rfam/frames.hpp"
#include "rfam/nlp/problem.hpp"
#include "rfam/nlp/sqp.hpp"
#include "rfam/vehicle.hpp"

namespace rfam::ocp {

// What the thrust-direction decision looks like over one stretch of flight.
enum class ControlMode { None, Direction, DirectionThrottle };

// How the exported attitude is produced when there is no direction variable.
enum class AttitudeRule { FromControl, Radial, Retrograde };

enum class SegmentKind {
    VerticalRise,       // straight off the pad, thrust radial, fixed length
    GuidedAscent,       // booster gravity turn under directed thrust
    UpperAscent,        // upper-stage burn to orbit insertion
    Coast,              // unpowered flight, fixed length
    BoostBack,          // booster burn reversing the downrange velocity
    Freefall,           // unpowered fall ending at the braking-burn altitude
    ReentryBurn,        // braking burn ending at the atmospheric-entry speed
    DescentGravityTurn, // unpowered fall through the atmosphere
    LandingBurn         // throttled burn to touchdown at the pad
};

/** One uniform-mesh stretch of flight with a single control mode. */
struct SegmentDef {
    SegmentKind kind = SegmentKind::Coast;
    int stage = 0;               // which stage's propulsion and drag apply
    bool burning = false;
    ControlMode control = ControlMode::None;
    AttitudeRule attitude = AttitudeRule::FromControl;
    int nodes = 5;
    bool free_duration = false;
    double duration = 0.0;       // fixed length, or the guess when free
    double duration_lb = 0.0;
    double duration_ub = 0.0;
};

/** Path-constraint selections applied to a phase's nodes. */
struct PathConstraints {
    std::optional<double> aoa_max_deg;   // thrust-to-airspeed cone, powered flight
    bool liftoff_twr_box = false;        // 1 <= thrust/weight at ignition <= limit
    bool axial_load_cap = false;         // burnout acceleration floor on mass
    bool landing_throttle_box = false;   // throttle within its configured band
};

/** One phase of the mission: a contiguous group of segments flown by one
 *  stage with one propulsion status. */
struct PhaseDefinition {
    int index = 1;               // 1-based, as written to trajectory tables
    int stage = 0;
    bool burning = false;
    ControlMode control = ControlMode::None;
    PathConstraints path;
    double duration_lb = 0.0;    // over the whole phase
    double duration_ub = 0.0;
    int nodes = 0;               // total across the phase's segments
    std::vector<SegmentDef> segments;
};

// How two phases join at their shared boundary.
enum class LinkKind {
    Continuous,       // position, velocity, and mass all carry over
    StageSeparation,  // position and velocity carry; the departing stage's
                      // structure (and for a returning booster, its reserves)
                      // leaves the stack
    BoosterBranch     // the booster's return flight forks off the separation
                      // state with the mass the upper stack left behind
};

struct Linkage {
    int from_phase = 0;  // 1-based phase indices
    int to_phase = 0;
    LinkKind kind = LinkKind::Continuous;
};

enum class ProblemVariant {
    Baseline,          // size one launcher for minimum specific cost
    CommonalityProbe,  // push one stage's structure mass to an extreme
    FamilySub          // resize around a fixed compatible-stage mass
};

enum class ProbeSense { Minimize, Maximize };

/** Complete description of one launcher-sizing optimal control problem. */
struct MultiPhaseOCP {
    VehicleSpec vehicle;
    MissionSpec mission;
    ConstraintParams params;
    std::vector<PhaseDefinition> phases;
    std::vector<Linkage> linkages;

    ProblemVariant variant = ProblemVariant::Baseline;
    int probe_stage = 0;                  // 1-based, CommonalityProbe only
    ProbeSense probe_sense = ProbeSense::Minimize;
    double m_c = 0.0;                     // fixed shared-stage mass, FamilySub only
    int compatible_stage = 0;             // 1-based, FamilySub only

    // Life-cycle cost in million USD for a candidate mass split; the flight
    // objective is cost per payload mass. Unused by commonality probes.
    std::function<double(const MassConfiguration&, double glow)> cost_evaluator;

    // Scale anchor and guess knobs, filled by the builders.
    double glow_estimate = 0.0;
    double dv_loss_guess = 1700.0;        // m/s over the ideal ascent speed gain
    double stage1_reserve_dv = 0.0;       // m/s flown by a returning booster
};

// Throws std::invalid_argument when a structural invariant fails: wrong
// phase count for the vehicle kind, a phase with fewer than 5 nodes or a
// non-positive duration, or a phase boundary not covered by exactly one
// linkage.
void validate(const MultiPhaseOCP& ocp);

// Builders for the three problem variants over the standard phase plans
// (two phases expendable, six phases with a returning booster).
MultiPhaseOCP build_p0(const VehicleSpec& vehicle, const MissionSpec& mission,
                       const ConstraintParams& params,
                       std::function<double(const MassConfiguration&, double)> cost_evaluator);
MultiPhaseOCP build_commonality_problem(const VehicleSpec& vehicle, const MissionSpec& mission,
                                        const ConstraintParams& params,
                                        int probe_stage, ProbeSense sense);
MultiPhaseOCP build_sub_problem(const VehicleSpec& vehicle, const MissionSpec& mission,
                                const ConstraintParams& params, int compatible_stage, double m_c,
                                std::function<double(const MassConfiguration&, double)>
                                    family_cost_evaluator);

/** Node counts for the transcription: ascent phases use the first figure,
 *  booster-return phases the second. */
struct Mesh {
    int ascent_nodes = 30;
    int descent_nodes = 15;
};

/** Where one segment's variables and rows live inside the NLP. */
struct SegmentLayout {
    SegmentKind kind;
    int phase_index = 0;
    int stage = 0;
    bool burning = false;
    ControlMode control = ControlMode::None;
    AttitudeRule attitude = AttitudeRule::FromControl;
    int nodes = 0;
    int first_var = 0;       // node 0's state block
    int block = 0;           // variables per node (7 + direction + throttle)
    int duration_var = -1;   // -1 when the duration is fixed
    double fixed_duration = 0.0;
    std::optional<double> aoa_max_deg;
};

/** Transcribed problem plus the layout needed to read a solution back. */
struct Transcription {
    nlp::NLPProblem problem;
    std::vector<SegmentLayout> segments;
    int ms1_var = -1;
    int ms2_var = -1;
    int ml_var = -1;
    Eigen::VectorXd x_scale;
    Eigen::VectorXd constraint_scale;
    std::vector<std::string> row_names;   // one per constraint row, eq then in
    // Convenience indices resolved once: node-0 state block of the first
    // segment and the variant-dependent probe variable.
    int probe_var = -1;
};

// Hermite-Simpson transcription of the whole mission onto the mesh.  The
// returned problem owns copies of everything it needs; the source ocp can go
// away.  Throws std::invalid_argument on validation failure or a mesh too
// coarse for the segment plan.
Transcription transcribe(const MultiPhaseOCP& ocp, const Mesh& mesh);

/** Initial iterate plus how it was produced. */
struct InitialGuess {
    Eigen::VectorXd x;
    bool fallback = false;    // true when simulation failed and straight-line
                              // interpolation was used instead
    std::string note;
};

// Flies the classical mass budget through a gravity-turn ascent (and, for a
// returning booster, an event-driven descent with a boost-back shooting
// correction) and samples the result at the mesh nodes.
InitialGuess initial_guess(const MultiPhaseOCP& ocp, const Transcription& tr);

struct TrajectoryNode {
    double t = 0.0;          // s since lift-off
    int phase = 1;
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    double m = 0.0;
    Eigen::Vector3d u = Eigen::Vector3d::Zero();  // attitude unit vector
    double thrust = 0.0;     // N delivered
};

struct DiscretizedTrajectory {
    std::vector<TrajectoryNode> nodes;   // ordered by (phase, t)
};

/** Converged sizing result with the flown trajectory and mass bookkeeping. */
struct SizingSolution {
    MassConfiguration masses;
    double glow = 0.0;
    double payload = 0.0;
    double objective = 0.0;       // cost_evaluator value over payload, or the
                                  // probed mass for commonality probes
    double m_c = 0.0;             // probed or fixed shared-stage mass
    OrbitalElements achieved{};
    std::vector<double> phase_durations;  // s, by phase index
    DiscretizedTrajectory trajectory;
    nlp::NLPSolution raw;
};

// Reads a solver result back into mission terms, pinning the node masses of
// constant-flow burns to their exact linear profiles. Throws
// std::runtime_error when the solver did not converge.
SizingSolution extract_solution(const MultiPhaseOCP& ocp, const Transcription& tr,
                                const nlp::NLPSolution& sol);

struct SizingOptions {
    Mesh mesh;
    nlp::SolverOptions solver;    // x/constraint scales are filled internally
    const Eigen::VectorXd* warm_start = nullptr;  // overrides initial_guess
    SizingOptions() {
        solver.max_iterations = 600;
        solver.opt_tol = 2e-4;
        solver.feas_tol = 1e-6;
    }
};

// transcribe + initial_guess + solve, without the converged-only restriction:
// the returned SizingSolution carries the raw solver status for the caller
// to interpret (extraction fields are filled whenever the iterate is usable).
SizingSolution solve_sizing(const MultiPhaseOCP& ocp, const SizingOptions& options = {});

} // namespace rfam::ocp
