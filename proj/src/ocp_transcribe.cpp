#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfam/constants.hpp"
#include "rfam/dynamics.hpp"
#include "rfam/frames.hpp"
#include "rfam/ocp/rocket.hpp"

namespace rfam::ocp {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;

const char* kStateTag[7] = {"rx", "ry", "rz", "vx", "vy", "vz", "m"};

const char* seg_tag(SegmentKind k) {
    switch (k) {
        case SegmentKind::VerticalRise: return "rise";
        case SegmentKind::GuidedAscent: return "ascent1";
        case SegmentKind::UpperAscent: return "ascent2";
        case SegmentKind::Coast: return "coast";
        case SegmentKind::BoostBack: return "boostback";
        case SegmentKind::Freefall: return "freefall";
        case SegmentKind::ReentryBurn: return "reentry";
        case SegmentKind::DescentGravityTurn: return "descent";
        case SegmentKind::LandingBurn: return "landing";
    }
    return "?";
}

// Runtime segment bookkeeping: the public layout plus row locations.
struct SegRT {
    SegmentLayout lay;
    int defect_row = -1; // first defect row
    int unit_row = -1;   // first direction-normalization row, -1 when none
};

struct JunctionRow {
    int row;
    int a_col; // value = x[b] - x[a]
    int b_col;
};

// Everything the NLP callbacks need, owned by shared_ptr so the problem
// outlives the OCP object it was transcribed from.
struct TData {
    MultiPhaseOCP ocp;
    std::vector<SegRT> segs;
    int n = 0, me = 0, mi = 0;

    int ms1 = -1, ms2 = -1, ml = -1;
    int m01 = -1, mf1 = -1, m02 = -1, mf2 = -1, m03 = -1, mf6 = -1;
    int ua_seg = -1, ga_seg = -1, lb_seg = -1, ff_seg = -1, rb_seg = -1;

    std::vector<JunctionRow> junctions;
    int row_sep = -1;     // expendable separation mass bookkeeping
    int row_branch = -1;  // booster branch mass bookkeeping
    int row_dry = -1;     // booster lands at its structure mass
    int row_eps1 = -1, row_eps2 = -1, row_payload = -1;
    int row_ff_alt = -1, row_rb_speed = -1;
    int row_orbit = -1;     // 4 rows
    int row_rtls_pos = -1;  // 3 rows
    int row_rtls_vel = -1;  // 3 rows
    int in_aoa = -1;        // inequality block, local index
    int n_aoa = 0;
    int in_pitch = -1;
    int in_tank = -1;

    std::vector<int> land_tvars; // free durations adding up to the landing time
    double land_tfixed = 0.0;

    double eps1 = 0.0, eps2 = 0.0;
    double a_target = 0.0, e_target = 0.0, cos_inc = 0.0;
    double cos_aoa = 1.0;
    double cos_pitch = 1.0;
    double tank_capacity2 = 0.0;
    Eigen::Vector3d r_site = Eigen::Vector3d::Zero();
    Eigen::Vector3d v_site = Eigen::Vector3d::Zero();
    Eigen::Vector3d pad_ecef = Eigen::Vector3d::Zero();
    Eigen::Vector3d up_ecef = Eigen::Vector3d::Zero();
};

double smoothstep(double s, double lo, double hi) {
    if (s <= lo) return 0.0;
    if (s >= hi) return 1.0;
    const double t = (s - lo) / (hi - lo);
    return t * t * (3.0 - 2.0 * t);
}

// Right-hand side for one segment sample.  Direction variables enter raw at
// the nodes (their normalization rows keep them unit length); midpoints pass
// normalize = true to correct the chord shortening of averaged directions.
Vec7 seg_rhs(const TData& td, const SegRT& sg, const Eigen::Vector3d& r,
             const Eigen::Vector3d& v, double m, const Eigen::Vector3d& u, double phi,
             bool normalize) {
    const StageSpec& stage = td.ocp.vehicle.stages[sg.lay.stage];
    State st;
    st.r = r;
    st.v = v;
    st.m = std::max(m, 1.0);
    st.t = 0.0;

    Control c;
    c.throttle_thrust = -1.0;
    if (sg.lay.control == ControlMode::None) {
        c.u = sg.lay.attitude == AttitudeRule::Radial && r.norm() > 0.0
                  ? Eigen::Vector3d(r.normalized())
                  : Eigen::Vector3d::Zero();
    } else {
        c.u = u;
        if (normalize && u.norm() > 1e-12) c.u = u.normalized();
        if (sg.lay.control == ControlMode::DirectionThrottle)
            c.throttle_thrust = phi * stage.thrust_sea_level;
    }

    const StateDerivative d = eom(st, c, stage, td.ocp.vehicle.drag_model, sg.lay.burning);
    Vec7 f;
    f.segment<3>(0) = d.r_dot;
    f.segment<3>(3) = d.v_dot;
    f(6) = d.m_dot;
    return f;
}

struct NodeView {
    Eigen::Vector3d r, v;
    double m = 0.0;
    Eigen::Vector3d u = Eigen::Vector3d::Zero();
    double phi = 0.0;
};

NodeView node_at(const SegRT& sg, const Eigen::VectorXd& x, int i) {
    const int base = sg.lay.first_var + i * sg.lay.block;
    NodeView nv;
    nv.r = x.segment<3>(base);
    nv.v = x.segment<3>(base + 3);
    nv.m = x(base + 6);
    if (sg.lay.control != ControlMode::None) nv.u = x.segment<3>(base + 7);
    if (sg.lay.control == ControlMode::DirectionThrottle) nv.phi = x(base + 10);
    return nv;
}

double seg_duration(const SegRT& sg, const Eigen::VectorXd& x) {
    return sg.lay.duration_var >= 0 ? x(sg.lay.duration_var) : sg.lay.fixed_duration;
}

double landing_time(const TData& td, const Eigen::VectorXd& x) {
    double t = td.land_tfixed;
    for (int v : td.land_tvars) t += x(v);
    return t;
}

// Shared evaluation of every constraint row, equalities then inequalities.
void eval_rows(const TData& td, const Eigen::VectorXd& x, Eigen::VectorXd& ce,
               Eigen::VectorXd& ci) {
    for (const SegRT& sg : td.segs) {
        const int n = sg.lay.nodes;
        const double h = seg_duration(sg, x) / (n - 1);
        std::vector<NodeView> nd(n);
        std::vector<Vec7> f(n);
        for (int i = 0; i < n; ++i) {
            nd[i] = node_at(sg, x, i);
            f[i] = seg_rhs(td, sg, nd[i].r, nd[i].v, nd[i].m, nd[i].u, nd[i].phi, false);
        }
        for (int k = 0; k + 1 < n; ++k) {
            Vec7 xa, xb;
            xa.segment<3>(0) = nd[k].r;
            xa.segment<3>(3) = nd[k].v;
            xa(6) = nd[k].m;
            xb.segment<3>(0) = nd[k + 1].r;
            xb.segment<3>(3) = nd[k + 1].v;
            xb(6) = nd[k + 1].m;
            const Vec7 xc = 0.5 * (xa + xb) + (h / 8.0) * (f[k] - f[k + 1]);
            const Eigen::Vector3d uc = 0.5 * (nd[k].u + nd[k + 1].u);
            const double phic = 0.5 * (nd[k].phi + nd[k + 1].phi);
            const Vec7 fc = seg_rhs(td, sg, xc.segment<3>(0), xc.segment<3>(3), xc(6), uc,
                                    phic, true);
            const Vec7 defect = xb - xa - (h / 6.0) * (f[k] + 4.0 * fc + f[k + 1]);
            ce.segment<7>(sg.defect_row + 7 * k) = defect;
        }
        if (sg.unit_row >= 0)
            for (int i = 0; i < n; ++i)
                ce(sg.unit_row + i) = nd[i].u.squaredNorm() - 1.0;
    }

    for (const JunctionRow& j : td.junctions) ce(j.row) = x(j.b_col) - x(j.a_col);

    if (td.row_sep >= 0) ce(td.row_sep) = x(td.mf1) - x(td.m02) - x(td.ms1);
    if (td.row_branch >= 0) ce(td.row_branch) = x(td.m03) - (x(td.mf1) - x(td.m02));
    if (td.row_dry >= 0) ce(td.row_dry) = x(td.mf6) - x(td.ms1);
    if (td.row_eps1 >= 0) {
        if (td.m03 >= 0)
            ce(td.row_eps1) =
                x(td.ms1) - td.eps1 * (x(td.m01) - x(td.mf1) + x(td.m03));
        else
            ce(td.row_eps1) =
                x(td.ms1) * (1.0 - td.eps1) - td.eps1 * (x(td.m01) - x(td.mf1));
    }
    if (td.row_eps2 >= 0)
        ce(td.row_eps2) = x(td.ms2) * (1.0 - td.eps2) - td.eps2 * (x(td.m02) - x(td.mf2));
    if (td.row_payload >= 0)
        ce(td.row_payload) =
            x(td.ml) - x(td.mf2) + x(td.ms2) + td.ocp.vehicle.fairing_mass;

    if (td.row_ff_alt >= 0) {
        const SegRT& sg = td.segs[td.ff_seg];
        const NodeView nv = node_at(sg, x, sg.lay.nodes - 1);
        ce(td.row_ff_alt) = nv.r.norm() - (kEarthRadius + td.ocp.params.h_reentry_burn);
    }
    if (td.row_rb_speed >= 0) {
        const SegRT& sg = td.segs[td.rb_seg];
        const NodeView nv = node_at(sg, x, sg.lay.nodes - 1);
        State st;
        st.r = nv.r;
        st.v = nv.v;
        st.m = 1.0;
        const double s2 = relative_velocity(st).squaredNorm();
        const double vt = td.ocp.params.v_rel_after_reentry;
        ce(td.row_rb_speed) = (s2 - vt * vt) / (2.0 * vt);
    }

    if (td.row_orbit >= 0) {
        const SegRT& sg = td.segs[td.ua_seg];
        const NodeView nv = node_at(sg, x, sg.lay.nodes - 1);
        const double rn = nv.r.norm();
        const double v2 = nv.v.squaredNorm();
        ce(td.row_orbit) = 0.5 * v2 - kMu / rn + kMu / (2.0 * td.a_target);
        ce(td.row_orbit + 1) = rn - td.a_target * (1.0 - td.e_target);
        ce(td.row_orbit + 2) = nv.r.dot(nv.v);
        const Eigen::Vector3d hvec = nv.r.cross(nv.v);
        ce(td.row_orbit + 3) = hvec(2) / hvec.norm() - td.cos_inc;
    }

    if (td.row_rtls_pos >= 0) {
        const SegRT& sg = td.segs[td.lb_seg];
        const NodeView nv = node_at(sg, x, sg.lay.nodes - 1);
        const double tl = landing_time(td, x);
        const FrameState fs = eci_to_ecef(nv.r, nv.v, tl);
        ce.segment<3>(td.row_rtls_pos) = fs.r - td.pad_ecef;
        ce.segment<3>(td.row_rtls_vel) = fs.v;
    }

    if (td.in_aoa >= 0) {
        const SegRT& sg = td.segs[td.ga_seg];
        for (int i = 0; i < sg.lay.nodes; ++i) {
            const NodeView nv = node_at(sg, x, i);
            State st;
            st.r = nv.r;
            st.v = nv.v;
            st.m = 1.0;
            const Eigen::Vector3d vr = relative_velocity(st);
            const double s = vr.norm();
            const double gate = smoothstep(s, 10.0, 20.0);
            ci(td.in_aoa + i) = td.cos_aoa * s - nv.u.dot(vr) - 45.0 * (1.0 - gate);
        }
    }
    if (td.in_pitch >= 0) {
        const SegRT& sg = td.segs[td.lb_seg];
        const NodeView nv = node_at(sg, x, sg.lay.nodes - 1);
        const double tl = landing_time(td, x);
        const Eigen::Vector3d up = ecef_to_eci(td.up_ecef, Eigen::Vector3d::Zero(), tl).r;
        ci(td.in_pitch) = td.cos_pitch - nv.u.dot(up);
    }
    if (td.in_tank >= 0)
        ci(td.in_tank) = (x(td.m02) - x(td.mf2)) - td.tank_capacity2;
}

// Mass configuration implied by the sizing variables (and, when a shared
// second stage flies a partial tank, by its node masses).
MassConfiguration masses_from(const TData& td, const Eigen::VectorXd& x) {
    MassConfiguration c;
    c.m_s1 = x(td.ms1);
    c.m_s2 = x(td.ms2);
    c.m_L = x(td.ml);
    c.m_p1 = c.m_s1 * (1.0 - td.eps1) / td.eps1;
    c.m_p2 = td.row_eps2 >= 0 ? c.m_s2 * (1.0 - td.eps2) / td.eps2
                              : x(td.m02) - x(td.mf2);
    return c;
}

// Node counts for each segment kind under the requested mesh.
int mesh_nodes(SegmentKind k, const Mesh& mesh) {
    switch (k) {
        case SegmentKind::VerticalRise: return 5;
        case SegmentKind::GuidedAscent: return std::max(5, mesh.ascent_nodes - 5);
        case SegmentKind::UpperAscent: return mesh.ascent_nodes;
        case SegmentKind::Coast: return 5;
        case SegmentKind::BoostBack: return std::max(5, mesh.descent_nodes - 5);
        case SegmentKind::Freefall: return std::max(3, (2 * mesh.descent_nodes) / 5);
        case SegmentKind::ReentryBurn:
            return std::max(3, mesh.descent_nodes - std::max(3, (2 * mesh.descent_nodes) / 5));
        case SegmentKind::DescentGravityTurn: return mesh.descent_nodes;
        case SegmentKind::LandingBurn: return mesh.descent_nodes;
    }
    return 5;
}

} // namespace

Transcription transcribe(const MultiPhaseOCP& source, const Mesh& mesh) {
    validate(source);
    if (mesh.ascent_nodes < 10 || mesh.descent_nodes < 8)
        throw std::invalid_argument("mesh too coarse: need at least 10 ascent and "
                                    "8 descent nodes per phase");

    auto tdp = std::make_shared<TData>();
    TData& td = *tdp;
    td.ocp = source;
    MultiPhaseOCP& ocp = td.ocp;
    for (PhaseDefinition& p : ocp.phases) {
        p.nodes = 0;
        for (SegmentDef& s : p.segments) {
            s.nodes = mesh_nodes(s.kind, mesh);
            p.nodes += s.nodes;
        }
    }

    const VehicleSpec& veh = ocp.vehicle;
    const MissionSpec& mis = ocp.mission;
    const ConstraintParams& par = ocp.params;
    const double glow_est = ocp.glow_estimate > 0.0
                                ? ocp.glow_estimate
                                : veh.stages[0].thrust_sea_level / (1.25 * kG0);
    td.eps1 = veh.stages[0].structure_ratio;
    td.eps2 = veh.stages[1].structure_ratio;
    td.a_target = kEarthRadius + mis.target_altitude;
    td.e_target = mis.target_eccentricity;
    td.cos_inc = std::cos(mis.target_inclination_deg * kDeg);
    td.cos_aoa = std::cos(par.alpha_ascent_max_deg * kDeg);
    td.cos_pitch = std::cos(0.5 * kDeg);
    const FrameState site = site_state_eci(mis.launch_site, 0.0);
    td.r_site = site.r;
    td.v_site = site.v;
    td.pad_ecef = site_position_ecef(mis.launch_site);
    td.up_ecef = td.pad_ecef.normalized();

    const bool rlv = veh.kind == VehicleKind::RLV;
    const bool sub = ocp.variant == ProblemVariant::FamilySub;
    const bool partial_tank2 = sub && ocp.compatible_stage == 2;
    if (partial_tank2)
        td.tank_capacity2 = ocp.m_c * (1.0 - td.eps2) / td.eps2;

    // ---- Variable layout ---------------------------------------------------
    int var = 0;
    for (const PhaseDefinition& p : ocp.phases)
        for (const SegmentDef& s : p.segments) {
            SegRT sg;
            sg.lay.kind = s.kind;
            sg.lay.phase_index = p.index;
            sg.lay.stage = s.stage;
            sg.lay.burning = s.burning;
            sg.lay.control = s.control;
            sg.lay.attitude = s.attitude;
            sg.lay.nodes = s.nodes;
            sg.lay.block = 7 + (s.control != ControlMode::None ? 3 : 0) +
                           (s.control == ControlMode::DirectionThrottle ? 1 : 0);
            sg.lay.first_var = var;
            sg.lay.fixed_duration = s.free_duration ? 0.0 : s.duration;
            sg.lay.aoa_max_deg = p.path.aoa_max_deg;
            var += s.nodes * sg.lay.block;
            td.segs.push_back(sg);
        }
    {
        size_t i = 0;
        for (const PhaseDefinition& p : ocp.phases)
            for (const SegmentDef& s : p.segments) {
                if (s.free_duration) td.segs[i].lay.duration_var = var++;
                switch (s.kind) {
                    case SegmentKind::GuidedAscent: td.ga_seg = static_cast<int>(i); break;
                    case SegmentKind::UpperAscent: td.ua_seg = static_cast<int>(i); break;
                    case SegmentKind::Freefall: td.ff_seg = static_cast<int>(i); break;
                    case SegmentKind::ReentryBurn: td.rb_seg = static_cast<int>(i); break;
                    case SegmentKind::LandingBurn: td.lb_seg = static_cast<int>(i); break;
                    default: break;
                }
                ++i;
            }
    }
    td.ms1 = var++;
    td.ms2 = var++;
    td.ml = var++;
    td.n = var;

    auto mass_col = [&](int seg, int node) {
        return td.segs[seg].lay.first_var + node * td.segs[seg].lay.block + 6;
    };
    const int first_seg = 0;
    const int last_ph1_seg = td.ga_seg;
    td.m01 = mass_col(first_seg, 0);
    td.mf1 = mass_col(last_ph1_seg, td.segs[last_ph1_seg].lay.nodes - 1);
    td.m02 = mass_col(td.ua_seg, 0);
    td.mf2 = mass_col(td.ua_seg, td.segs[td.ua_seg].lay.nodes - 1);
    if (rlv) {
        int coast_seg = -1;
        for (size_t i = 0; i < td.segs.size(); ++i)
            if (td.segs[i].lay.kind == SegmentKind::Coast) coast_seg = static_cast<int>(i);
        td.m03 = mass_col(coast_seg, 0);
        td.mf6 = mass_col(td.lb_seg, td.segs[td.lb_seg].lay.nodes - 1);
    }

    // Landing-clock contributions: everything the booster flies through.
    if (rlv) {
        for (const SegRT& sg : td.segs) {
            if (sg.lay.phase_index == 2) continue;
            if (sg.lay.duration_var >= 0)
                td.land_tvars.push_back(sg.lay.duration_var);
            else
                td.land_tfixed += sg.lay.fixed_duration;
        }
    }

    // ---- Row layout ---------------------------------------------------------
    std::vector<std::string> eq_names, in_names;
    std::vector<double> eq_scale, in_scale;
    std::vector<std::pair<int, int>> eq_pat, in_pat;

    const double sc_state[7] = {kEarthRadius / 10.0, kEarthRadius / 10.0, kEarthRadius / 10.0,
                                780.0, 780.0, 780.0, glow_est / 10.0};
    const double sc_mass = glow_est / 10.0;

    auto add_eq = [&](const std::string& name, double scale,
                      std::initializer_list<int> cols) {
        const int row = static_cast<int>(eq_names.size());
        eq_names.push_back(name);
        eq_scale.push_back(scale);
        for (int c : cols) eq_pat.emplace_back(row, c);
        return row;
    };
    auto add_in = [&](const std::string& name, double scale,
                      const std::vector<int>& cols) {
        const int row = static_cast<int>(in_names.size());
        in_names.push_back(name);
        in_scale.push_back(scale);
        for (int c : cols) in_pat.emplace_back(row, c);
        return row;
    };

    for (SegRT& sg : td.segs) {
        const std::string tag = seg_tag(sg.lay.kind);
        sg.defect_row = static_cast<int>(eq_names.size());
        for (int k = 0; k + 1 < sg.lay.nodes; ++k)
            for (int j = 0; j < 7; ++j) {
                const int row = static_cast<int>(eq_names.size());
                eq_names.push_back(tag + ":defect" + std::to_string(k) + ":" + kStateTag[j]);
                eq_scale.push_back(sc_state[j]);
                for (int b = 0; b < sg.lay.block; ++b) {
                    eq_pat.emplace_back(row, sg.lay.first_var + k * sg.lay.block + b);
                    eq_pat.emplace_back(row, sg.lay.first_var + (k + 1) * sg.lay.block + b);
                }
                if (sg.lay.duration_var >= 0) eq_pat.emplace_back(row, sg.lay.duration_var);
            }
        if (sg.lay.control != ControlMode::None) {
            sg.unit_row = static_cast<int>(eq_names.size());
            for (int i = 0; i < sg.lay.nodes; ++i) {
                const int base = sg.lay.first_var + i * sg.lay.block + 7;
                add_eq(tag + ":unit" + std::to_string(i), 1.0, {base, base + 1, base + 2});
            }
        }
    }

    // Junction rows: adjacent segments within a phase share the full state;
    // linkage boundaries share whatever the linkage kind carries over.
    auto junction = [&](int seg_a, int seg_b, int states, const char* label) {
        const SegRT& a = td.segs[seg_a];
        const SegRT& b = td.segs[seg_b];
        const int abase = a.lay.first_var + (a.lay.nodes - 1) * a.lay.block;
        const int bbase = b.lay.first_var;
        for (int j = 0; j < states; ++j) {
            const int row = add_eq(std::string(label) + ":" + kStateTag[j], sc_state[j],
                                   {abase + j, bbase + j});
            td.junctions.push_back({row, abase + j, bbase + j});
        }
    };

    std::vector<int> phase_first(ocp.phases.size() + 1, -1), phase_last(ocp.phases.size() + 1, -1);
    for (size_t i = 0; i < td.segs.size(); ++i) {
        const int p = td.segs[i].lay.phase_index;
        if (phase_first[p] < 0) phase_first[p] = static_cast<int>(i);
        phase_last[p] = static_cast<int>(i);
    }
    for (size_t p = 1; p <= ocp.phases.size(); ++p)
        for (int i = phase_first[p]; i < phase_last[p]; ++i)
            junction(i, i + 1, 7, ("phase" + std::to_string(p) + ":join").c_str());
    for (const Linkage& l : ocp.linkages) {
        const std::string label =
            "link" + std::to_string(l.from_phase) + std::to_string(l.to_phase);
        junction(phase_last[l.from_phase], phase_first[l.to_phase],
                 l.kind == LinkKind::Continuous ? 7 : 6, label.c_str());
    }

    if (!rlv)
        td.row_sep = add_eq("separation:mass", sc_mass, {td.mf1, td.m02, td.ms1});
    else {
        td.row_branch = add_eq("branch:mass", sc_mass, {td.m03, td.mf1, td.m02});
        td.row_dry = add_eq("landing:dry-mass", sc_mass, {td.mf6, td.ms1});
    }
    const bool drop_eps1 = sub && ocp.compatible_stage == 1;
    if (!drop_eps1) {
        if (rlv)
            td.row_eps1 =
                add_eq("stage1:structure-ratio", sc_mass, {td.ms1, td.m01, td.mf1, td.m03});
        else
            td.row_eps1 = add_eq("stage1:structure-ratio", sc_mass, {td.ms1, td.m01, td.mf1});
    }
    if (!partial_tank2)
        td.row_eps2 = add_eq("stage2:structure-ratio", sc_mass, {td.ms2, td.m02, td.mf2});
    td.row_payload = add_eq("payload:definition", sc_mass, {td.ml, td.mf2, td.ms2});

    if (rlv) {
        const SegRT& ff = td.segs[td.ff_seg];
        const int fb = ff.lay.first_var + (ff.lay.nodes - 1) * ff.lay.block;
        td.row_ff_alt = add_eq("reentry:ignition-altitude", 1e4, {fb, fb + 1, fb + 2});
        const SegRT& rb = td.segs[td.rb_seg];
        const int rbb = rb.lay.first_var + (rb.lay.nodes - 1) * rb.lay.block;
        td.row_rb_speed = add_eq("reentry:final-speed", 100.0,
                                 {rbb, rbb + 1, rbb + 2, rbb + 3, rbb + 4, rbb + 5});
    }

    {
        const SegRT& ua = td.segs[td.ua_seg];
        const int ub = ua.lay.first_var + (ua.lay.nodes - 1) * ua.lay.block;
        const std::initializer_list<int> cols = {ub, ub + 1, ub + 2, ub + 3, ub + 4, ub + 5};
        // Insertion at the periapsis of the target orbit.  Energy, radius and
        // zero radial speed pin the semi-major axis and the eccentricity with
        // gradients that stay well conditioned for near-circular targets,
        // where a direct eccentricity-magnitude row would degenerate.
        td.row_orbit = add_eq("orbit:energy", kMu / (2.0 * td.a_target), cols);
        add_eq("orbit:radius", td.a_target, {ub, ub + 1, ub + 2});
        add_eq("orbit:radial-speed", std::sqrt(kMu * td.a_target), cols);
        add_eq("orbit:inclination", 1.0, cols);
    }

    if (rlv) {
        const SegRT& lb = td.segs[td.lb_seg];
        const int fb = lb.lay.first_var + (lb.lay.nodes - 1) * lb.lay.block;
        std::vector<int> pos_cols = {fb, fb + 1, fb + 2};
        std::vector<int> vel_cols = {fb, fb + 1, fb + 2, fb + 3, fb + 4, fb + 5};
        for (int v : td.land_tvars) {
            pos_cols.push_back(v);
            vel_cols.push_back(v);
        }
        td.row_rtls_pos = static_cast<int>(eq_names.size());
        for (int j = 0; j < 3; ++j) {
            const int row = static_cast<int>(eq_names.size());
            eq_names.push_back(std::string("landing:position:") + kStateTag[j]);
            eq_scale.push_back(1e4);
            for (int c : pos_cols) eq_pat.emplace_back(row, c);
        }
        td.row_rtls_vel = static_cast<int>(eq_names.size());
        for (int j = 0; j < 3; ++j) {
            const int row = static_cast<int>(eq_names.size());
            eq_names.push_back(std::string("landing:velocity:") + kStateTag[3 + j]);
            eq_scale.push_back(100.0);
            for (int c : vel_cols) eq_pat.emplace_back(row, c);
        }
    }

    // Inequalities: thrust-to-airspeed cone over the guided ascent, vertical
    // attitude at touchdown, and the shared-tank capacity when a fixed second
    // stage may fly partially fuelled.
    {
        const SegRT& ga = td.segs[td.ga_seg];
        td.in_aoa = static_cast<int>(in_names.size());
        td.n_aoa = ga.lay.nodes;
        for (int i = 0; i < ga.lay.nodes; ++i) {
            const int base = ga.lay.first_var + i * ga.lay.block;
            add_in("ascent1:aoa" + std::to_string(i), 1e3,
                   {base, base + 1, base + 2, base + 3, base + 4, base + 5, base + 7,
                    base + 8, base + 9});
        }
    }
    if (rlv) {
        const SegRT& lb = td.segs[td.lb_seg];
        const int ub = lb.lay.first_var + (lb.lay.nodes - 1) * lb.lay.block + 7;
        std::vector<int> cols = {ub, ub + 1, ub + 2};
        for (int v : td.land_tvars) cols.push_back(v);
        td.in_pitch = add_in("landing:vertical-attitude", 1.0, cols);
    }
    if (partial_tank2)
        td.in_tank = add_in("stage2:tank-capacity", sc_mass, {td.m02, td.mf2});

    td.me = static_cast<int>(eq_names.size());
    td.mi = static_cast<int>(in_names.size());

    // ---- Bounds and scaling -------------------------------------------------
    Eigen::VectorXd lbv = Eigen::VectorXd::Constant(td.n, -1e30);
    Eigen::VectorXd ubv = Eigen::VectorXd::Constant(td.n, 1e30);
    Eigen::VectorXd xscale = Eigen::VectorXd::Ones(td.n);

    const double glow_cap = veh.stages[0].thrust_sea_level / kG0;
    for (const SegRT& sg : td.segs) {
        for (int i = 0; i < sg.lay.nodes; ++i) {
            const int base = sg.lay.first_var + i * sg.lay.block;
            for (int j = 0; j < 3; ++j) {
                lbv(base + j) = -(kEarthRadius + 8e5);
                ubv(base + j) = kEarthRadius + 8e5;
                xscale(base + j) = kEarthRadius;
                lbv(base + 3 + j) = -8500.0;
                ubv(base + 3 + j) = 8500.0;
                xscale(base + 3 + j) = 7800.0;
            }
            lbv(base + 6) = 50.0;
            ubv(base + 6) = 1.05 * glow_cap;
            xscale(base + 6) = glow_est;
            if (sg.lay.control != ControlMode::None)
                for (int j = 0; j < 3; ++j) {
                    lbv(base + 7 + j) = -1.05;
                    ubv(base + 7 + j) = 1.05;
                }
            if (sg.lay.control == ControlMode::DirectionThrottle) {
                lbv(base + 10) = par.landing_throttle_min;
                ubv(base + 10) = par.landing_throttle_max;
                xscale(base + 10) = 0.1;
            }
        }
    }
    {
        size_t i = 0;
        for (const PhaseDefinition& p : ocp.phases)
            for (const SegmentDef& s : p.segments) {
                if (td.segs[i].lay.duration_var >= 0) {
                    lbv(td.segs[i].lay.duration_var) = s.duration_lb;
                    ubv(td.segs[i].lay.duration_var) = s.duration_ub;
                    xscale(td.segs[i].lay.duration_var) = std::max(s.duration, 10.0);
                }
                ++i;
            }
    }
    lbv(td.ms1) = 50.0;
    ubv(td.ms1) = 0.25 * glow_cap;
    lbv(td.ms2) = 20.0;
    ubv(td.ms2) = 0.15 * glow_cap;
    lbv(td.ml) = mis.min_payload;
    ubv(td.ml) = 0.4 * glow_cap;
    xscale(td.ms1) = xscale(td.ms2) = xscale(td.ml) = glow_est / 20.0;

    // Launch pad boundary: position and velocity pinned, lift-off mass held
    // inside the thrust-to-weight window.
    for (int j = 0; j < 3; ++j) {
        lbv(j) = ubv(j) = td.r_site(j);
        lbv(3 + j) = ubv(3 + j) = td.v_site(j);
    }
    lbv(td.m01) = veh.stages[0].thrust_sea_level / (par.twr_max * kG0);
    ubv(td.m01) = glow_cap;
    // Burn-out axial load cap as a mass floor at the stage-1 burn end.
    lbv(td.mf1) = std::max(lbv(td.mf1),
                           veh.stages[0].thrust_vacuum / (par.axial_load_max * kG0));

    if (sub) {
        const int pin = ocp.compatible_stage == 1 ? td.ms1 : td.ms2;
        lbv(pin) = ubv(pin) = ocp.m_c;
    }

    // ---- Objective ----------------------------------------------------------
    std::function<double(const Eigen::VectorXd&)> objective;
    std::vector<int> obj_pattern;
    if (ocp.variant == ProblemVariant::CommonalityProbe) {
        const int col = ocp.probe_stage == 1 ? td.ms1 : td.ms2;
        const double sign = ocp.probe_sense == ProbeSense::Minimize ? 1.0 : -1.0;
        objective = [tdp, col, sign](const Eigen::VectorXd& x) {
            return sign * x(col) / 1000.0;
        };
        obj_pattern = {col};
    } else {
        objective = [tdp](const Eigen::VectorXd& x) {
            const TData& t = *tdp;
            const MassConfiguration cfg = masses_from(t, x);
            const double g = glow(cfg, t.ocp.vehicle.fairing_mass);
            return t.ocp.cost_evaluator(cfg, g) / cfg.m_L;
        };
        obj_pattern = {td.ms1, td.ms2, td.ml};
        if (partial_tank2) {
            obj_pattern.push_back(td.m02);
            obj_pattern.push_back(td.mf2);
        }
    }

    // ---- Assemble -----------------------------------------------------------
    Transcription tr;
    tr.segments.reserve(td.segs.size());
    for (const SegRT& sg : td.segs) tr.segments.push_back(sg.lay);
    tr.ms1_var = td.ms1;
    tr.ms2_var = td.ms2;
    tr.ml_var = td.ml;
    tr.probe_var = ocp.variant == ProblemVariant::CommonalityProbe
                       ? (ocp.probe_stage == 1 ? td.ms1 : td.ms2)
                       : -1;
    tr.x_scale = xscale;
    tr.constraint_scale.resize(td.me + td.mi);
    for (int i = 0; i < td.me; ++i) tr.constraint_scale(i) = eq_scale[i];
    for (int i = 0; i < td.mi; ++i) tr.constraint_scale(td.me + i) = in_scale[i];
    tr.row_names = eq_names;
    tr.row_names.insert(tr.row_names.end(), in_names.begin(), in_names.end());

    nlp::NLPProblem& pr = tr.problem;
    pr.n = td.n;
    pr.n_eq = td.me;
    pr.n_in = td.mi;
    pr.lb = lbv;
    pr.ub = ubv;
    pr.objective = objective;
    pr.constraints = [tdp](const Eigen::VectorXd& x, Eigen::VectorXd& ce,
                           Eigen::VectorXd& ci) {
        ce.setZero(tdp->me);
        ci.setZero(tdp->mi);
        eval_rows(*tdp, x, ce, ci);
    };
    pr.jacobian_pattern = eq_pat;
    for (const auto& [r, c] : in_pat) pr.jacobian_pattern.emplace_back(td.me + r, c);
    pr.objective_pattern = obj_pattern;
    return tr;
}

} // namespace rfam::ocp
