#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rfam/constants.hpp"
#include "rfam/dynamics.hpp"
#include "rfam/frames.hpp"
#include "rfam/ocp/rocket.hpp"
#include "rfam/propagate.hpp"
#include "rfam/staging.hpp"

namespace rfam::ocp {

namespace {

using Eigen::Vector3d;

struct NodeSample {
    State s;
    Control c;
};

PropagateOptions sim_options() {
    PropagateOptions opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-8;
    opt.dense_output = false;
    return opt;
}

State fly(const State& s, const ControlLaw& law, const StageSpec& stage, const DragModel& drag,
          bool burning, double duration) {
    if (!(duration > 0.0)) return s;
    return propagate(s, law, stage, drag, burning, duration, sim_options()).back();
}

// Uniform-in-time samples of one leg, endpoints included.
std::vector<NodeSample> sample_leg(const State& start, const ControlLaw& law,
                                   const StageSpec& stage, const DragModel& drag, bool burning,
                                   double duration, int nodes) {
    std::vector<NodeSample> out;
    out.reserve(nodes);
    State s = start;
    out.push_back({s, law(s)});
    const double dt = duration / (nodes - 1);
    for (int k = 1; k < nodes; ++k) {
        s = fly(s, law, stage, drag, burning, dt);
        out.push_back({s, law(s)});
    }
    return out;
}

double altitude_of(const State& s) { return s.r.norm() - kEarthRadius; }

// Airspeed climb angle in degrees; straight up when there is no airspeed.
double rel_path_angle_deg(const State& s) {
    const Vector3d vrel = relative_velocity(s);
    if (vrel.norm() < 1.0) return 90.0;
    const double sg = std::clamp(s.r.normalized().dot(vrel.normalized()), -1.0, 1.0);
    return std::asin(sg) / kDeg;
}

// Horizontal direction of flight at lift-off for the target inclination;
// falls back to due east when the plane is unreachable from the site.
Vector3d downrange_direction(const LaunchSite& site, double inclination_deg) {
    const double lat = site.latitude_deg * kDeg;
    const double lon = site.longitude_deg * kDeg;
    const Vector3d east(-std::sin(lon), std::cos(lon), 0.0);
    const Vector3d north(-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon),
                         std::cos(lat));
    double az = kPi / 2.0;
    try {
        az = launch_azimuth(inclination_deg, site.latitude_deg);
    } catch (const std::domain_error&) {
    }
    return (std::sin(az) * east + std::cos(az) * north).normalized();
}

const SegmentLayout* find_segment(const Transcription& tr, SegmentKind kind) {
    for (const SegmentLayout& s : tr.segments)
        if (s.kind == kind) return &s;
    return nullptr;
}

double boxed_duration(const Transcription& tr, const SegmentLayout& lay, double want) {
    if (lay.duration_var < 0) return lay.fixed_duration;
    return std::clamp(want, tr.problem.lb[lay.duration_var], tr.problem.ub[lay.duration_var]);
}

// Steps a leg forward in chunks until the predicate fires, then bisects the
// final chunk down to the crossing.  Returns the end state and elapsed time;
// hitting the cap just returns the capped flight.
template <typename Pred>
std::pair<State, double> advance_until(const State& start, const ControlLaw& law,
                                       const StageSpec& stage, const DragModel& drag,
                                       bool burning, Pred pred, double chunk, double cap) {
    State s = start;
    if (pred(s)) return {s, 0.0};
    double elapsed = 0.0;
    while (elapsed < cap) {
        State next;
        try {
            next = fly(s, law, stage, drag, burning, chunk);
        } catch (const std::exception&) {
            return {s, elapsed};  // ran the tanks dry; stop at the last good state
        }
        if (pred(next)) {
            double lo = 0.0, hi = chunk;
            for (int i = 0; i < 25; ++i) {
                const double mid = 0.5 * (lo + hi);
                (pred(fly(s, law, stage, drag, burning, mid)) ? hi : lo) = mid;
            }
            return {fly(s, law, stage, drag, burning, hi), elapsed + hi};
        }
        s = next;
        elapsed += chunk;
    }
    return {s, elapsed};
}

// Booster return-leg lengths and the touchdown state for one boost-back size.
struct ReturnFlight {
    double t_bb = 0.0;
    double t_ff = 0.0;
    double t_rb = 0.0;
    double t_gt = 0.0;
    double t_lb = 0.0;
    State touchdown;
};

// Straight-line seed used when the forward simulation fails: a linear climb
// to an insertion point a little downrange, and for a returning booster a
// linear retreat to the pad.
void fill_fallback(const MultiPhaseOCP& ocp, const Transcription& tr, Eigen::VectorXd& x) {
    const VehicleSpec& veh = ocp.vehicle;
    const MissionSpec& mis = ocp.mission;
    const ConstraintParams& cp = ocp.params;

    MassConfiguration cfg;
    try {
        cfg = classical_baseline_size(veh, mis, ocp.dv_loss_guess, ocp.stage1_reserve_dv).masses;
    } catch (const std::exception&) {
        const double g0 = ocp.glow_estimate;
        cfg.m_L = mis.min_payload;
        cfg.m_s1 = 0.06 * g0;
        cfg.m_p1 = 0.55 * g0;
        cfg.m_s2 = 0.02 * g0;
        cfg.m_p2 = std::max(0.05 * g0, g0 - cfg.m_s1 - cfg.m_p1 - cfg.m_s2 - cfg.m_L);
    }
    const double m0 = glow(cfg, veh.fairing_mass);
    const double mf1 = m0 - cfg.m_p1;
    const double m02 = cfg.m_s2 + cfg.m_p2 + cfg.m_L + veh.fairing_mass;
    const double mf2 = m02 - cfg.m_p2;
    const double m03 = mf1 - m02;

    const FrameState pad0 = site_state_eci(mis.launch_site, 0.0);
    const Vector3d rhat0 = pad0.r.normalized();
    const Vector3d dhat0 = downrange_direction(mis.launch_site, mis.target_inclination_deg);
    const double a_t = kEarthRadius + mis.target_altitude;
    const double r_ins = a_t * (1.0 - mis.target_eccentricity);  // periapsis insertion
    const double v_ins = std::sqrt(kMu * (2.0 / r_ins - 1.0 / a_t));
    const double theta = 12.0 * kDeg;
    const Vector3d r_orb =
        r_ins * (std::cos(theta) * rhat0 + std::sin(theta) * dhat0).normalized();
    const Vector3d v_orb =
        v_ins * (std::cos(theta) * dhat0 - std::sin(theta) * rhat0).normalized();

    // Ascent progress fractions over the three powered legs.
    const auto lerp3 = [](const Vector3d& a, const Vector3d& b, double w) {
        return Vector3d(a + w * (b - a));
    };
    Vector3d r_sep = lerp3(pad0.r, r_orb, 0.45);
    Vector3d v_sep = lerp3(pad0.v, v_orb, 0.45);

    std::vector<const SegmentDef*> defs;
    for (const PhaseDefinition& p : ocp.phases)
        for (const SegmentDef& s : p.segments) defs.push_back(&s);

    double t_clock = 0.0;
    for (size_t i = 0; i < tr.segments.size(); ++i) {
        const SegmentLayout& lay = tr.segments[i];
        const double T = boxed_duration(tr, lay, defs[i]->duration);
        double w0 = 0.0, w1 = 0.0;
        Vector3d ra = pad0.r, rb = r_orb, va = pad0.v, vb = v_orb;
        double ma = m0, mb = mf1;
        Vector3d u = rhat0;
        switch (lay.kind) {
            case SegmentKind::VerticalRise:
                w0 = 0.0;
                w1 = 0.02;
                break;
            case SegmentKind::GuidedAscent:
                w0 = 0.02;
                w1 = 0.45;
                u = (0.5 * rhat0 + 0.9 * dhat0).normalized();
                break;
            case SegmentKind::UpperAscent:
                w0 = 0.45;
                w1 = 1.0;
                ma = m02;
                mb = mf2;
                u = v_orb.normalized();
                t_clock = 0.0;  // the booster branch restarts from separation
                break;
            default: {
                // Return legs: retreat from the separation point to the pad.
                ra = r_sep;
                rb = pad0.r + 2.0 * rhat0;
                va = v_sep;
                vb = pad0.v;
                ma = m03;
                mb = cfg.m_s1;
                const double span = std::max(1.0, 5.0 * T);
                w0 = std::clamp(t_clock / span, 0.0, 0.9);
                w1 = std::clamp(w0 + T / span, 0.0, 1.0);
                u = lay.kind == SegmentKind::BoostBack ? Vector3d(-dhat0) : rhat0;
                break;
            }
        }
        for (int k = 0; k < lay.nodes; ++k) {
            const double w = w0 + (w1 - w0) * (lay.nodes > 1 ? double(k) / (lay.nodes - 1) : 0.0);
            const int base = lay.first_var + k * lay.block;
            x.segment<3>(base) = lerp3(ra, rb, w);
            x.segment<3>(base + 3) = lerp3(va, vb, w);
            x[base + 6] = ma + w * (mb - ma);
            if (lay.control != ControlMode::None) x.segment<3>(base + 7) = u;
            if (lay.control == ControlMode::DirectionThrottle)
                x[base + 10] = 0.5 * (cp.landing_throttle_min + cp.landing_throttle_max);
        }
        if (lay.duration_var >= 0) x[lay.duration_var] = T;
        if (lay.kind != SegmentKind::UpperAscent) t_clock += T;
    }
    x[tr.ms1_var] = cfg.m_s1;
    x[tr.ms2_var] = cfg.m_s2;
    x[tr.ml_var] = cfg.m_L;
}

} // namespace

InitialGuess initial_guess(const MultiPhaseOCP& ocp, const Transcription& tr) {
    InitialGuess out;
    out.x = Eigen::VectorXd::Zero(tr.problem.n);
    std::ostringstream note;
    note << std::fixed << std::setprecision(1);

    const VehicleSpec& veh = ocp.vehicle;
    const MissionSpec& mis = ocp.mission;
    const ConstraintParams& cp = ocp.params;
    const StageSpec& st1 = veh.stages[0];
    const StageSpec& st2 = veh.stages[1];
    const DragModel& drag = veh.drag_model;
    const bool rlv = veh.kind == VehicleKind::RLV;

    try {
        // --- mass budget: classical split, loss allowance tuned so the
        // lift-off weight sits inside the thrust-to-weight window ---
        const double wlo = st1.thrust_sea_level / (cp.twr_max * kG0);
        const double whi = st1.thrust_sea_level / kG0;
        const double target_glow = rlv ? 1.02 * wlo : 0.5 * (wlo + whi);

        const auto try_size = [&](double loss, StagingResult& r) {
            try {
                r = classical_baseline_size(veh, mis, loss, ocp.stage1_reserve_dv);
                return true;
            } catch (const std::domain_error&) {
                return false;
            }
        };

        MassConfiguration cfg;
        double burn1 = 0.0, burn2 = 0.0;

        if (rlv) {
            // The classical split would hand a booster-sized reserve's worth
            // of extra propellant to the upper stage, leaving it too weak to
            // fly at all.  Pin the stack above the booster by an upper-stage
            // thrust-to-weight instead and give the booster the rest.
            const double twr2 = 0.58;
            const double m02_pin =
                std::min(st2.thrust_vacuum / (twr2 * kG0), 0.62 * target_glow);
            cfg.m_L = mis.min_payload;
            const double tank2 = m02_pin - cfg.m_L - veh.fairing_mass;
            if (tank2 < 1.0)
                throw std::runtime_error("upper stack pinned below the payload mass");
            cfg.m_p2 = tank2 * (1.0 - st2.structure_ratio);
            cfg.m_s2 = tank2 - cfg.m_p2;
            const double stage1 = target_glow - m02_pin;
            cfg.m_s1 = st1.structure_ratio * stage1;
            cfg.m_p1 = stage1 - cfg.m_s1;
            const double reserve_prop =
                cfg.m_s1 *
                (std::exp(ocp.stage1_reserve_dv / (st1.specific_impulse * kG0)) - 1.0);
            const double ascent_prop = cfg.m_p1 - reserve_prop;
            if (ascent_prop < 0.3 * cfg.m_p1)
                throw std::runtime_error("booster return reserve eats the ascent propellant");
            burn1 = ascent_prop / st1.mass_flow();
            burn2 = cfg.m_p2 / st2.mass_flow();
            note << "budget: glow " << target_glow << " kg, booster reserve "
                 << ocp.stage1_reserve_dv << " m/s";
        } else {
            StagingResult budget;
            double loss_used = ocp.dv_loss_guess;
            if (!try_size(loss_used, budget))
                throw std::runtime_error("classical split infeasible at the default loss allowance");
            if (budget.glow < wlo || budget.glow > whi) {
                double lo = 50.0, hi = 9000.0;
                StagingResult r_hi;
                while (hi > 200.0 && !try_size(hi, r_hi)) hi *= 0.7;
                if (r_hi.glow <= target_glow) {
                    // Even the largest feasible allowance is too light: scale the
                    // whole budget up, which keeps the structure ratios exact.
                    budget = r_hi;
                    loss_used = hi;
                    const double f = target_glow / budget.glow;
                    budget.masses.m_s1 *= f;
                    budget.masses.m_p1 *= f;
                    budget.masses.m_s2 *= f;
                    budget.masses.m_p2 *= f;
                    budget.masses.m_L *= f;
                    budget.burn_time1 *= f;
                    budget.burn_time2 *= f;
                    budget.glow = glow(budget.masses, veh.fairing_mass);
                } else {
                    StagingResult mid_r;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (!try_size(mid, mid_r)) {
                            hi = mid;
                            continue;
                        }
                        if (std::abs(mid_r.glow - target_glow) < 5.0) {
                            budget = mid_r;
                            loss_used = mid;
                            break;
                        }
                        (mid_r.glow < target_glow ? lo : hi) = mid;
                        budget = mid_r;
                        loss_used = mid;
                    }
                }
            }

            cfg = budget.masses;
            burn1 = budget.burn_time1;
            burn2 = budget.burn_time2;
            note << "budget: glow " << glow(cfg, veh.fairing_mass) << " kg, loss allowance "
                 << loss_used << " m/s";
        }

        if (ocp.variant == ProblemVariant::FamilySub) {
            if (ocp.compatible_stage == 1) {
                cfg.m_s1 = ocp.m_c;
                cfg.m_p1 = propellant_from_structure(ocp.m_c, st1.structure_ratio);
                burn1 = cfg.m_p1 / st1.mass_flow();
            } else {
                const double capacity = propellant_from_structure(ocp.m_c, st2.structure_ratio);
                cfg.m_s2 = ocp.m_c;
                cfg.m_p2 = std::min(cfg.m_p2, capacity);
                burn2 = cfg.m_p2 / st2.mass_flow();
            }
        }
        const double m0 = glow(cfg, veh.fairing_mass);
        const double mf1 = m0 - st1.mass_flow() * burn1;
        const double m02 = cfg.m_s2 + cfg.m_p2 + cfg.m_L + veh.fairing_mass;
        const double m03 = mf1 - m02;

        // --- durations the sampled legs will fly ---
        const SegmentLayout* ga = find_segment(tr, SegmentKind::GuidedAscent);
        const SegmentLayout* ua = find_segment(tr, SegmentKind::UpperAscent);
        if (ga == nullptr || ua == nullptr)
            throw std::runtime_error("transcription lacks the powered ascent legs");
        const double rise = cp.vertical_rise_duration;
        const double t_ga = boxed_duration(tr, *ga, burn1 - rise);
        if (!(t_ga > 1.0)) throw std::runtime_error("stage-1 burn shorter than the rise");

        // --- pitch-kick gravity turn, kick angle tuned by bisection on the
        // climb angle at stage-1 burnout ---
        const FrameState pad0 = site_state_eci(mis.launch_site, 0.0);
        State lift;
        lift.r = pad0.r;
        lift.v = pad0.v;
        lift.m = m0;
        lift.t = 0.0;
        const Vector3d dhat0 = downrange_direction(mis.launch_site, mis.target_inclination_deg);

        const ControlLaw radial = [](const State& s) {
            Control c;
            c.u = s.r.normalized();
            return c;
        };
        // The kick waits for enough airspeed; a turn started at lift-off
        // speeds over-rotates for any kick worth the name.
        const State after_rise = fly(lift, radial, st1, drag, true, rise);
        const auto gained_speed = [](const State& q) {
            return relative_velocity(q).norm() >= 50.0;
        };
        const double t_kick = rise + advance_until(after_rise, radial, st1, drag, true,
                                                   gained_speed, 2.0, std::max(5.0, 0.3 * t_ga))
                                         .second;

        // Target orbit-plane normal through the pad, picked for the
        // north-east ascending passage; falls back to an eastward plane when
        // the inclination is unreachable from the site.
        const Vector3d n_target = [&] {
            const double lat = mis.launch_site.latitude_deg * kDeg;
            const double lon = mis.launch_site.longitude_deg * kDeg;
            const Vector3d east(-std::sin(lon), std::cos(lon), 0.0);
            const Vector3d north(-std::sin(lat) * std::cos(lon),
                                 -std::sin(lat) * std::sin(lon), std::cos(lat));
            const double beta =
                std::cos(mis.target_inclination_deg * kDeg) / std::cos(lat);
            if (!(beta >= -1.0 && beta <= 1.0))
                return Vector3d(pad0.r.normalized().cross(east).normalized());
            return Vector3d(
                (-std::sqrt(1.0 - beta * beta) * east + beta * north).normalized());
        }();

        // Prograde flight with bounded trim: the nose may deviate from the
        // relative wind by most of the angle-of-attack allowance, steering
        // toward a reference climb profile that ends at the target angle.
        // The reference lives in the target orbit plane and is carry
        // compensated, so it drives the inertial velocity into that plane —
        // an unguided turn topples in whatever direction noise picks.
        // A returning booster stages early and slow, leaving a low
        // thrust-to-weight upper stage that needs a lofted hand-over, so it
        // aims much steeper than an expendable first stage.
        const double angle_target = rlv ? 55.0 : 28.0;
        const double alpha_auth = 0.85 * cp.alpha_ascent_max_deg * kDeg;
        const double t_end_ga = rise + t_ga;
        const Vector3d omega_e(0.0, 0.0, kEarthOmega);
        const auto turn_law = [&, dhat0, n_target, t_kick, t_end_ga](double kick_deg) {
            const double t0 = t_kick, t1 = t_kick + 8.0;
            const double gamma_tgt = angle_target * kDeg;
            const double auth = alpha_auth;
            return ControlLaw([=](const State& s) {
                Control c;
                const Vector3d rhat = s.r.normalized();
                const Vector3d vrel = relative_velocity(s);
                if (s.t < t0 || vrel.norm() < 5.0) {
                    c.u = rhat;
                    return c;
                }
                const Vector3d vhat = vrel.normalized();
                Vector3d dplane = n_target.cross(rhat);
                dplane = dplane.norm() > 1e-9
                             ? Vector3d(dplane.normalized())
                             : Vector3d((dhat0 - dhat0.dot(rhat) * rhat).normalized());
                const Vector3d carry = omega_e.cross(s.r);
                // Relative-frame direction whose sum with the carry points
                // along the given inertial direction.
                const auto rel_dir = [&](const Vector3d& t_in, double speed) {
                    const Vector3d d = t_in * speed - carry;
                    return d.norm() > 1e-9 ? Vector3d(d.normalized()) : t_in;
                };
                const double vin = (vrel + carry).norm();
                if (s.t < t1) {
                    Vector3d hk = rel_dir(dplane, std::max(vin, 1500.0));
                    hk -= hk.dot(rhat) * rhat;
                    hk = hk.norm() > 1e-9 ? Vector3d(hk.normalized()) : vhat;
                    c.u = (std::cos(kick_deg * kDeg) * vhat + std::sin(kick_deg * kDeg) * hk)
                              .normalized();
                    return c;
                }
                const double tau =
                    std::clamp((s.t - t1) / std::max(t_end_ga - t1, 1.0), 0.0, 1.0);
                const double gref =
                    0.5 * kPi + (gamma_tgt - 0.5 * kPi) * std::pow(tau, 1.7);
                // Heading reference is carry compensated in the horizontal
                // plane only; the climb angle stays a relative-frame target.
                const Vector3d vin_h =
                    (vrel + carry) - (vrel + carry).dot(rhat) * rhat;
                Vector3d h_ref = dplane * std::max(vin_h.norm(), 800.0) - carry;
                h_ref -= h_ref.dot(rhat) * rhat;
                h_ref = h_ref.norm() > 1e-9 ? Vector3d(h_ref.normalized()) : dplane;
                const Vector3d that = std::sin(gref) * rhat + std::cos(gref) * h_ref;
                const Vector3d e = that - that.dot(vhat) * vhat;
                const double en = e.norm();
                if (en < 1e-12) {
                    c.u = vhat;
                    return c;
                }
                c.u = (vhat + std::min(std::tan(auth), en) * e.normalized()).normalized();
                return c;
            });
        };

        const auto burnout_angle = [&](double kick) {
            try {
                return rel_path_angle_deg(fly(after_rise, turn_law(kick), st1, drag, true, t_ga));
            } catch (const std::exception&) {
                return -90.0;  // a diverging dive counts as far too much kick
            }
        };
        // Even with trim the burnout angle drops steeply over a narrow kick
        // window, so bisect hard and keep the steep side if the target band
        // is never hit.
        double klo = 1e-4, khi = 25.0;
        double kick = khi;
        double angle = burnout_angle(khi);
        if (angle < angle_target) {
            const double a_lo = burnout_angle(klo);
            if (a_lo <= angle_target) {
                kick = klo;
                angle = a_lo;
            } else {
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (klo + khi);
                    const double a = burnout_angle(mid);
                    if (std::abs(a - angle_target) < 3.0) {
                        kick = mid;
                        angle = a;
                        break;
                    }
                    (a > angle_target ? klo : khi) = mid;
                    kick = klo;  // steep but safe side
                    angle = a;
                }
                if (std::abs(angle - angle_target) > 8.0) kick = klo;
            }
        }
        const ControlLaw ascent = turn_law(kick);
        const State sep = fly(after_rise, ascent, st1, drag, true, t_ga);
        note << "; pitch kick " << std::setprecision(4) << kick << std::setprecision(1)
             << " deg at t=" << t_kick << " s, staging path angle " << rel_path_angle_deg(sep)
             << " deg";

        // --- upper-stage steering shot onto the insertion point: damped
        // Newton on (initial pitch, tangent time constant, burn duration)
        // against (radius, radial speed, energy) at periapsis ---
        const double a_t = kEarthRadius + mis.target_altitude;
        const double r_ins = a_t * (1.0 - mis.target_eccentricity);
        const double t_sep = sep.t;
        const auto upper_law = [&, t_sep](double th0, double tbar) {
            return ControlLaw([=](const State& s) {
                Control c;
                const double frac =
                    std::clamp((s.t - t_sep) / std::max(tbar, 20.0), 0.0, 2.0);
                const double pitch = std::atan(std::tan(th0) * (1.0 - frac));
                const Vector3d rhat = s.r.normalized();
                Vector3d hh = n_target.cross(rhat);
                if (hh.norm() > 1e-9) {
                    hh.normalize();
                } else {
                    const Vector3d vh = s.v - s.v.dot(rhat) * rhat;
                    hh = vh.norm() > 1.0
                             ? Vector3d(vh.normalized())
                             : Vector3d((dhat0 - dhat0.dot(rhat) * rhat).normalized());
                }
                c.u = (std::cos(pitch) * hh + std::sin(pitch) * rhat).normalized();
                return c;
            });
        };

        State ua_start = sep;
        ua_start.m = m02;
        double t_cap = 0.90 * m02 / st2.mass_flow();
        if (ocp.variant == ProblemVariant::FamilySub && ocp.compatible_stage == 2)
            t_cap = std::min(t_cap, cfg.m_p2 / st2.mass_flow());
        const auto ua_duration = [&](double T) {
            return std::clamp(boxed_duration(tr, *ua, T), 1.0, t_cap);
        };
        const auto insertion_residual = [&](const Vector3d& p, State* end) {
            const double T = ua_duration(p[2]);
            Vector3d R(50.0, 50.0, 50.0);  // a failed flight counts as far off
            try {
                const State f =
                    fly(ua_start, upper_law(std::clamp(p[0], -0.25, 1.2), p[1]), st2, drag,
                        true, T);
                const double rn = f.r.norm();
                R[0] = (rn - r_ins) / 1e4;
                R[1] = f.r.normalized().dot(f.v) / 50.0;
                R[2] = (0.5 * f.v.squaredNorm() - kMu / rn + kMu / (2.0 * a_t)) / 5e5;
                if (end != nullptr) *end = f;
            } catch (const std::exception&) {
            }
            return R;
        };

        const double gamma_sep =
            std::asin(std::clamp(sep.r.normalized().dot(sep.v.normalized()), -1.0, 1.0));
        Vector3d p_ua(std::clamp(gamma_sep, 0.02, 1.0), ua_duration(burn2), burn2);
        Vector3d R_ua = insertion_residual(p_ua, nullptr);
        Vector3d p_best = p_ua;
        double best_norm = R_ua.norm();
        for (int it = 0; it < 8 && best_norm > 0.05; ++it) {
            Eigen::Matrix3d J;
            const Vector3d dp(0.01, std::max(2.0, 0.02 * p_ua[1]),
                              std::max(2.0, 0.02 * p_ua[2]));
            for (int j = 0; j < 3; ++j) {
                Vector3d q = p_ua;
                q[j] += dp[j];
                J.col(j) = (insertion_residual(q, nullptr) - R_ua) / dp[j];
            }
            Vector3d step = J.colPivHouseholderQr().solve(-R_ua);
            if (!step.allFinite()) break;
            step[0] = std::clamp(step[0], -0.25, 0.25);
            step[1] = std::clamp(step[1], -0.4 * p_ua[1], 0.6 * p_ua[1]);
            step[2] = std::clamp(step[2], -0.3 * p_ua[2], 0.5 * p_ua[2]);
            double alpha = 1.0;
            Vector3d p_try, R_try;
            for (int ls = 0; ls < 4; ++ls, alpha *= 0.5) {
                p_try = p_ua + alpha * step;
                p_try[0] = std::clamp(p_try[0], -0.25, 1.2);
                p_try[1] = std::max(p_try[1], 25.0);
                p_try[2] = ua_duration(p_try[2]);
                R_try = insertion_residual(p_try, nullptr);
                if (R_try.norm() < R_ua.norm()) break;
            }
            p_ua = p_try;
            R_ua = R_try;
            if (R_ua.norm() < best_norm) {
                best_norm = R_ua.norm();
                p_best = p_ua;
            }
        }
        const double t_ua_final = ua_duration(p_best[2]);
        State ins_end = ua_start;
        const Vector3d R_fin = insertion_residual(p_best, &ins_end);
        const ControlLaw upper_final = upper_law(std::clamp(p_best[0], -0.25, 1.2), p_best[1]);
        note << "; insertion shot: radius err " << (ins_end.r.norm() - r_ins) / 1e3
             << " km, radial speed " << ins_end.r.normalized().dot(ins_end.v)
             << " m/s, burn " << t_ua_final << " s";
        (void)R_fin;

        // The upper-stage burn the shot settled on re-splits the stack above
        // the booster: the structure follows its tank, the payload takes the
        // rest, and the lift-off mass is untouched.
        {
            const double mp2_flown = st2.mass_flow() * t_ua_final;
            const double eps2 = st2.structure_ratio;
            if (ocp.variant == ProblemVariant::FamilySub && ocp.compatible_stage == 2) {
                cfg.m_p2 = mp2_flown;
                cfg.m_L = std::max(m02 - veh.fairing_mass - cfg.m_s2 - mp2_flown, 1.0);
            } else {
                cfg.m_p2 = mp2_flown;
                cfg.m_s2 = eps2 / (1.0 - eps2) * mp2_flown;
                cfg.m_L = std::max(m02 - veh.fairing_mass - cfg.m_s2 - mp2_flown, 1.0);
            }
        }

        // --- booster return: boost-back sized by a secant shooting
        // correction on the downrange touchdown miss ---
        const ControlLaw retro = [](const State& s) {
            Control c;
            const Vector3d vrel = relative_velocity(s);
            // Hold radial below 40 m/s: -v_rel flips direction as speed crosses
            // zero, which collapses integrator steps during a braking burn.
            c.u = vrel.norm() > 40.0 ? Vector3d(-vrel.normalized()) : Vector3d(s.r.normalized());
            return c;
        };
        const ControlLaw landing = [&](const State& s) {
            Control c;
            const Vector3d vrel = relative_velocity(s);
            const double v = vrel.norm();
            // Blend retrograde into radial through 5..25 m/s so the thrust
            // direction stays continuous as the descent rate approaches zero.
            const double w = std::clamp((v - 5.0) / 20.0, 0.0, 1.0);
            const Vector3d rhat = s.r.normalized();
            const Vector3d dir = v > 1e-6 ? Vector3d(-w * vrel.normalized() + (1.0 - w) * rhat)
                                          : rhat;
            c.u = dir.norm() > 1e-9 ? Vector3d(dir.normalized()) : rhat;
            const double h =
                std::max(altitude_of(s) - mis.launch_site.altitude, 2.0);
            const double g = kMu / s.r.squaredNorm();
            const double want = s.m * (v * v / (2.0 * h) + g);
            c.throttle_thrust = std::clamp(want, cp.landing_throttle_min * st1.thrust_sea_level,
                                           cp.landing_throttle_max * st1.thrust_sea_level);
            return c;
        };

        State after_coast;
        ControlLaw boost_back;
        ReturnFlight ret;
        double dv_used = 0.0, miss_used = 0.0;
        if (rlv) {
            State branch0 = sep;
            branch0.m = m03;
            after_coast = fly(branch0, retro, st1, drag, false, cp.t_coast);

            const Vector3d pad_ecef = site_position_ecef(mis.launch_site);
            const Vector3d up_pad = pad_ecef.normalized();
            const FrameState sep_e = eci_to_ecef(sep.r, sep.v, sep.t);
            const Vector3d dr_e = sep_e.r - pad_ecef;
            const Vector3d dhat_e = (dr_e - dr_e.dot(up_pad) * up_pad).normalized();

            const Vector3d rhat_c = after_coast.r.normalized();
            const Vector3d vrel_c = relative_velocity(after_coast);
            const Vector3d vh_c = vrel_c - vrel_c.dot(rhat_c) * rhat_c;
            const Vector3d u_bb = vh_c.norm() > 0.5 ? Vector3d(-vh_c.normalized())
                                                    : Vector3d(-dhat0);
            boost_back = [u_bb](const State&) {
                Control c;
                c.u = u_bb;
                return c;
            };

            const auto fly_return = [&](double dv_bb) {
                ReturnFlight f;
                const double mf =
                    after_coast.m * std::exp(-dv_bb / (st1.specific_impulse * kG0));
                f.t_bb = std::clamp((after_coast.m - mf) / st1.mass_flow(), 2.0, 300.0);
                State s = fly(after_coast, boost_back, st1, drag, true, f.t_bb);

                const auto below_ignition = [&](const State& q) {
                    return altitude_of(q) <= cp.h_reentry_burn && q.v.dot(q.r) < 0.0;
                };
                std::tie(s, f.t_ff) =
                    advance_until(s, retro, st1, drag, false, below_ignition, 5.0, 700.0);

                const auto slowed = [&](const State& q) {
                    return relative_velocity(q).norm() <= cp.v_rel_after_reentry;
                };
                std::tie(s, f.t_rb) =
                    advance_until(s, retro, st1, drag, true, slowed, 0.25, 120.0);

                // Ignite near the top of the throttle band: starting earlier
                // makes the commanded thrust fall below the band minimum, the
                // clamp then overbrakes and the burn stalls out at altitude.
                const auto near_stopping_distance = [&](const State& q) {
                    const double v = relative_velocity(q).norm();
                    const double h = std::max(altitude_of(q) - mis.launch_site.altitude, 1.0);
                    const double g = kMu / q.r.squaredNorm();
                    const double avail = cp.landing_throttle_max * st1.thrust_sea_level / q.m;
                    return v * v / (2.0 * h) + g >= 0.95 * avail;
                };
                std::tie(s, f.t_gt) = advance_until(s, retro, st1, drag, false,
                                                    near_stopping_distance, 1.0, 700.0);

                const auto stopped = [&](const State& q) {
                    return relative_velocity(q).norm() < 1.2 ||
                           altitude_of(q) - mis.launch_site.altitude < 1.0;
                };
                std::tie(s, f.t_lb) =
                    advance_until(s, landing, st1, drag, true, stopped, 0.5, 200.0);
                f.touchdown = s;
                return f;
            };
            const auto miss_of = [&](const ReturnFlight& f) {
                const FrameState e = eci_to_ecef(f.touchdown.r, f.touchdown.v, f.touchdown.t);
                return (e.r - pad_ecef).dot(dhat_e);
            };

            const double dv_avail = st1.specific_impulse * kG0 *
                                    std::log(after_coast.m / std::max(cfg.m_s1, 1.0));
            const double dv_cap = std::max(0.62 * dv_avail, 250.0);
            double dv_a = std::min(vh_c.norm() + 150.0, dv_cap - 60.0);
            double dv_b = std::min(dv_a + 300.0, dv_cap);
            ReturnFlight f_a = fly_return(dv_a);
            ReturnFlight f_b = fly_return(dv_b);
            double miss_a = miss_of(f_a), miss_b = miss_of(f_b);
            ret = f_b;
            dv_used = dv_b;
            miss_used = miss_b;
            if (std::abs(miss_a) < std::abs(miss_b)) {
                ret = f_a;
                dv_used = dv_a;
                miss_used = miss_a;
            }
            for (int it = 0; it < 6 && std::abs(miss_used) > 400.0; ++it) {
                if (std::abs(miss_b - miss_a) < 1e-6) break;
                double dv_n = dv_b - miss_b * (dv_b - dv_a) / (miss_b - miss_a);
                dv_n = std::clamp(dv_n, 150.0, dv_cap);
                const ReturnFlight f_n = fly_return(dv_n);
                const double miss_n = miss_of(f_n);
                dv_a = dv_b;
                miss_a = miss_b;
                dv_b = dv_n;
                miss_b = miss_n;
                if (std::abs(miss_n) < std::abs(miss_used)) {
                    ret = f_n;
                    dv_used = dv_n;
                    miss_used = miss_n;
                }
            }
            note << "; boost-back dv " << dv_used << " m/s, touchdown miss " << miss_used
                 << " m";
        }

        // --- sample every leg at its mesh nodes and fill the iterate ---
        Eigen::VectorXd& x = out.x;
        State cursor = lift;
        State sep_saved = sep;
        for (const SegmentLayout& lay : tr.segments) {
            std::vector<NodeSample> nodes;
            double T = lay.fixed_duration;
            switch (lay.kind) {
                case SegmentKind::VerticalRise:
                    T = boxed_duration(tr, lay, rise);
                    nodes = sample_leg(cursor, radial, st1, drag, true, T, lay.nodes);
                    break;
                case SegmentKind::GuidedAscent:
                    T = t_ga;
                    nodes = sample_leg(cursor, ascent, st1, drag, true, T, lay.nodes);
                    sep_saved = nodes.back().s;
                    break;
                case SegmentKind::UpperAscent: {
                    T = t_ua_final;
                    State s0 = cursor;
                    s0.m = m02;
                    nodes = sample_leg(s0, upper_final, st2, drag, true, T, lay.nodes);
                    break;
                }
                case SegmentKind::Coast: {
                    State s0 = sep_saved;
                    s0.m = m03;
                    T = boxed_duration(tr, lay, cp.t_coast);
                    nodes = sample_leg(s0, retro, st1, drag, false, T, lay.nodes);
                    break;
                }
                case SegmentKind::BoostBack:
                    T = boxed_duration(tr, lay, ret.t_bb);
                    nodes = sample_leg(cursor, boost_back, st1, drag, true, T, lay.nodes);
                    break;
                case SegmentKind::Freefall:
                    T = boxed_duration(tr, lay, ret.t_ff);
                    nodes = sample_leg(cursor, retro, st1, drag, false, T, lay.nodes);
                    break;
                case SegmentKind::ReentryBurn:
                    T = boxed_duration(tr, lay, ret.t_rb);
                    nodes = sample_leg(cursor, retro, st1, drag, true, T, lay.nodes);
                    break;
                case SegmentKind::DescentGravityTurn:
                    T = boxed_duration(tr, lay, ret.t_gt);
                    nodes = sample_leg(cursor, retro, st1, drag, false, T, lay.nodes);
                    break;
                case SegmentKind::LandingBurn:
                    T = boxed_duration(tr, lay, ret.t_lb);
                    nodes = sample_leg(cursor, landing, st1, drag, true, T, lay.nodes);
                    break;
            }
            cursor = nodes.back().s;

            const StageSpec& seg_stage = veh.stages[lay.stage];
            for (int k = 0; k < lay.nodes; ++k) {
                const NodeSample& ns = nodes[k];
                const int base = lay.first_var + k * lay.block;
                x.segment<3>(base) = ns.s.r;
                x.segment<3>(base + 3) = ns.s.v;
                x[base + 6] = ns.s.m;
                if (lay.control != ControlMode::None) {
                    const Vector3d u = ns.c.u.norm() > 1e-9
                                           ? Vector3d(ns.c.u.normalized())
                                           : Vector3d(ns.s.r.normalized());
                    x.segment<3>(base + 7) = u;
                }
                if (lay.control == ControlMode::DirectionThrottle) {
                    const double phi = ns.c.throttle_thrust > 0.0
                                           ? ns.c.throttle_thrust / seg_stage.thrust_sea_level
                                           : 0.5 * (cp.landing_throttle_min +
                                                    cp.landing_throttle_max);
                    x[base + 10] =
                        std::clamp(phi, cp.landing_throttle_min, cp.landing_throttle_max);
                }
            }
            if (lay.duration_var >= 0) x[lay.duration_var] = T;
        }
        x[tr.ms1_var] = cfg.m_s1;
        x[tr.ms2_var] = cfg.m_s2;
        x[tr.ml_var] = cfg.m_L;
        out.note = note.str();
    } catch (const std::exception& e) {
        out.x.setZero();
        fill_fallback(ocp, tr, out.x);
        out.fallback = true;
        out.note = std::string("straight-line seed (simulation failed: ") + e.what() +
                   "; progress: " + note.str() + ")";
    }

    // Keep the seed inside the variable boxes; the launch-state pins become
    // exact here.
    for (int i = 0; i < tr.problem.n; ++i) {
        double v = out.x[i];
        if (!std::isfinite(v)) v = 0.0;
        out.x[i] = std::min(std::max(v, tr.problem.lb[i]), tr.problem.ub[i]);
    }
    return out;
}

} // namespace rfam::ocp
