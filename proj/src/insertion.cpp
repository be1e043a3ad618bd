#include "finray/insertion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "finray/error.hpp"

namespace finray {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Vec2 {
    double y = 0.0, z = 0.0;
};

Vec2 rotate(const Vec2& v, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.y - s * v.z, s * v.y + c * v.z};
}

Vec2 plug_point(const PlugPose& q, const Vec2& local) {
    const Vec2 r = rotate(local, q.theta);
    return {q.y + r.y, q.z + r.z};
}

/// Socket geometry derived from the scenario; the true socket is at y = 0.
/// The opening lips carry a small lead-in radius, so contact stays smooth
/// while a plug corner crosses an edge.
struct Socket {
    double half_opening;
    double depth;
    double pin_top;     // z of the pin plane inside the opening
    double lip_radius;  // rounded edge at each opening lip
};

Socket make_socket(const InsertionScenario& sc) {
    Socket s;
    s.half_opening = (sc.plug_width + sc.clearance) / 2.0;
    s.depth = sc.socket_depth;
    s.pin_top = std::min(sc.traits.pin_height, 0.0);
    s.lip_radius = sc.lip_radius;
    return s;
}

/// One resolved penalty contact.
struct ActiveContact {
    int id = -1;
    Vec2 point;    // world
    Vec2 normal;   // unit, direction of the normal force on the plug
    double fn = 0.0;
    double ft = 0.0;  // along perp(normal)
};

Vec2 perp(const Vec2& n) {
    return {-n.z, n.y};
}

constexpr int kCandidates = 14;

/// Per-candidate stick anchors for the return-mapping friction. The anchor is
/// a world point; the friction force is an elastic pull toward it, saturated
/// at the Coulomb limit. Anchors are updated once per accepted command step.
struct StickAnchors {
    std::array<bool, kCandidates> active{};
    std::array<Vec2, kCandidates> point{};
};

/// Candidate contact evaluation at a pose. Candidate ids are fixed so the
/// stick anchors stay associated across steps. Fresh contacts anchor at the
/// material point of the previous accepted pose.
std::vector<ActiveContact> resolve_contacts(const InsertionScenario& sc, const Socket& sock,
                                            const PlugPose& q, const PlugPose& q_prev,
                                            const StickAnchors& anchors) {
    std::vector<ActiveContact> out;
    const double w2 = sc.plug_width / 2.0;
    const double k = sc.contact_stiffness;
    const double mu = sc.friction_mu;

    const Vec2 corners_local[2] = {{-w2, 0.0}, {w2, 0.0}};

    auto tangential = [&](int id, const Vec2& local, const Vec2& p, const Vec2& n, double fn) {
        const Vec2 t = perp(n);
        const Vec2 anchor = anchors.active[static_cast<std::size_t>(id)]
                                ? anchors.point[static_cast<std::size_t>(id)]
                                : plug_point(q_prev, local);
        const double stretch = (p.y - anchor.y) * t.y + (p.z - anchor.z) * t.z;
        const double limit = mu * fn;
        if (limit <= 1e-12)
            return 0.0;
        // Elastic stick capped at the Coulomb limit.
        return std::clamp(-k * stretch, -limit, limit);
    };
    // Smoothed unilateral penalty (softplus with an exponential tail) keeps
    // the residual smooth through contact onset while separated bodies carry
    // no force.
    constexpr double pen_width = 8e-3;  // mm
    auto push = [&](int id, const Vec2& local, const Vec2& point, const Vec2& n, double pen) {
        if (pen <= -0.5)
            return;
        const double x = pen / pen_width;
        const double smooth =
            x > 0.0 ? pen + pen_width * std::log1p(std::exp(-x))
                    : pen_width * std::log1p(std::exp(x));
        if (smooth <= 1e-12)
            return;
        ActiveContact c;
        c.id = id;
        c.point = point;
        c.normal = n;
        c.fn = k * smooth;
        c.ft = tangential(id, local, point, n, c.fn);
        out.push_back(c);
    };

    const double a = sock.half_opening;
    const double r = sock.lip_radius;
    for (int ci = 0; ci < 2; ++ci) {
        const Vec2& local = corners_local[ci];
        const Vec2 p = plug_point(q, local);
        // Top surface outboard of the lip rounds (the rounds themselves are
        // covered by the circle candidates below).
        if (p.y < -a - r || p.y > a + r)
            push(ci * 6 + 0, local, p, {0.0, 1.0}, -p.z);
        // Socket floor.
        if (std::abs(p.y) < a)
            push(ci * 6 + 1, local, p, {0.0, 1.0}, -sock.depth - p.z);
        // Side walls of the opening, below the lip rounds. The penetration is
        // capped so a corner outside the socket body never maps to the walls.
        if (p.z <= -r && p.z > -sock.depth) {
            const double pen_l = -a - p.y;
            if (pen_l < 1.0)
                push(ci * 6 + 2, local, p, {1.0, 0.0}, pen_l);
            const double pen_r = p.y - a;
            if (pen_r < 1.0)
                push(ci * 6 + 3, local, p, {-1.0, 0.0}, pen_r);
        }
    }

    // Rounded lips against the plug rectangle: circle-vs-rectangle contact,
    // restricted to the lip quadrant so the flat-face candidates hand over
    // with matching force.
    const double c = std::cos(q.theta), s = std::sin(q.theta);
    const Vec2 centers[2] = {{-a - r, -r}, {a + r, -r}};
    for (int li = 0; li < 2; ++li) {
        const Vec2& C = centers[li];
        // Circle center in plug frame.
        const double dy = C.y - q.y, dz = C.z - q.z;
        const double ly = c * dy + s * dz;
        const double lz = -s * dy + c * dz;
        const double qy = std::clamp(ly, -w2, w2);
        const double qz = std::clamp(lz, 0.0, sc.plug_height);
        double ny_l, nz_l, dist;
        if (qy != ly || qz != lz) {
            // Center outside the rectangle: push it away from the closest
            // boundary point.
            dist = std::hypot(ly - qy, lz - qz);
            ny_l = (ly - qy) / dist;
            nz_l = (lz - qz) / dist;
        } else {
            // Center inside: exit through the nearest face.
            const double exits[4] = {ly + w2, w2 - ly, lz, sc.plug_height - lz};
            int best = 0;
            for (int k2 = 1; k2 < 4; ++k2)
                if (exits[k2] < exits[best])
                    best = k2;
            dist = -exits[best];
            ny_l = best == 0 ? -1.0 : (best == 1 ? 1.0 : 0.0);
            nz_l = best == 2 ? -1.0 : (best == 3 ? 1.0 : 0.0);
        }
        const double pen = r - dist;
        const Vec2 closest = plug_point(q, {qy, qz});
        // Force on the plug points from the circle toward the rectangle.
        const Vec2 n_world = rotate({-ny_l, -nz_l}, q.theta);
        push(12 + li, {qy, qz}, closest, n_world, pen);
    }
    return out;
}

struct GripWrench {
    double fy = 0.0, fz = 0.0, tau = 0.0;
};

double smooth_excess(double x, double eps) {
    return 0.5 * (x + std::sqrt(x * x + eps * eps));
}

GripWrench grip_wrench(const InsertionScenario& sc, const PlugPose& q, const PlugPose& cmd) {
    // Translational spring between the commanded and actual grip point.
    const Vec2 attach_local{0.0, sc.plug_height};
    const Vec2 at = plug_point(q, attach_local);
    const Vec2 at_cmd = plug_point(cmd, attach_local);
    const double dy = at.y - at_cmd.y;
    const double dz = at.z - at_cmd.z;
    GripWrench w;
    w.fy = -(sc.grip.kyy * dy + sc.grip.kzy * dz);
    w.fz = -(sc.grip.kzy * dy + sc.grip.kzz * dz);
    // Torque about the plug reference from the offset grip force.
    const Vec2 r{at.y - q.y, at.z - q.z};
    w.tau = r.y * w.fz - r.z * w.fy;

    // Rotational grip: free play, then a stiffer band. The excess is an odd
    // smooth ramp so the torque stays C1 through zero.
    const GripRotation& gr = sc.grip_rotation;
    const double dtheta_deg = (q.theta - cmd.theta) / kDegToRad;
    const double play = gr.play_deg;
    const double excess =
        smooth_excess(dtheta_deg - play, 0.2) - smooth_excess(-dtheta_deg - play, 0.2);
    w.tau += -(gr.k_play * dtheta_deg + (gr.k_hard - gr.k_play) * excess);
    return w;
}

struct Residual {
    double fy = 0.0, fz = 0.0, tau = 0.0;
};

Residual equilibrium_residual(const InsertionScenario& sc, const Socket& sock,
                              const PlugPose& q, const PlugPose& q_prev, const PlugPose& cmd,
                              const StickAnchors& anchors) {
    const GripWrench g = grip_wrench(sc, q, cmd);
    Residual r{g.fy, g.fz, g.tau};
    for (const ActiveContact& c : resolve_contacts(sc, sock, q, q_prev, anchors)) {
        const Vec2 t = perp(c.normal);
        const double fy = c.fn * c.normal.y + c.ft * t.y;
        const double fz = c.fn * c.normal.z + c.ft * t.z;
        r.fy += fy;
        r.fz += fz;
        r.tau += (c.point.y - q.y) * fz - (c.point.z - q.z) * fy;
    }
    return r;
}

/// Newton solve of the 3-dof quasi-static equilibrium with a numeric Jacobian
/// and residual backtracking through contact-set changes. When `converged` is
/// non-null the best state found is returned with the flag cleared instead of
/// throwing on a residual above the bound.
PlugPose solve_equilibrium(const InsertionScenario& sc, const Socket& sock, PlugPose q,
                           const PlugPose& q_prev, const PlugPose& cmd,
                           const StickAnchors& anchors, int step_index,
                           bool* converged = nullptr) {
    const double torque_scale = std::max(sc.plug_height, 1.0);
    const double tol = 1e-5;

    auto norm_of = [&](const Residual& r) {
        return std::max({std::abs(r.fy), std::abs(r.fz), std::abs(r.tau) / torque_scale});
    };

    Residual r = equilibrium_residual(sc, sock, q, q_prev, cmd, anchors);
    double norm = norm_of(r);

    // Overdamped flow toward the nearest stable equilibrium. Newton cannot
    // continue through fold points (the plug snapping off a lip); the viscous
    // crawl follows the physical drop instead. The flow is non-monotone but
    // keeps the best visited point, and the step adapts to stay stable.
    auto relax = [&]() {
        const double k_scale = sc.contact_stiffness + sc.grip.kzz + sc.grip.kyy;
        const double lever_sq = 25.0;  // contact lever scale squared (mm^2)
        double eta = 0.25;
        PlugPose p = q;
        Residual rp = r;
        double np = norm;
        PlugPose best_p = q;
        Residual best_r = r;
        double best_n = norm;
        for (int it = 0; it < 120000 && best_n > tol && eta > 1e-7; ++it) {
            PlugPose pn = p;
            pn.y += eta * rp.fy / k_scale;
            pn.z += eta * rp.fz / k_scale;
            pn.theta += eta * rp.tau / (k_scale * lever_sq);
            const Residual rn = equilibrium_residual(sc, sock, pn, q_prev, cmd, anchors);
            const double nn = norm_of(rn);
            if (!std::isfinite(nn) || nn > 10.0 * np + 1.0) {
                eta *= 0.5;  // reject and retry smaller from p
                continue;
            }
            p = pn;
            rp = rn;
            np = nn;
            if (nn < best_n) {
                best_n = nn;
                best_p = pn;
                best_r = rn;
                eta = std::min(eta * 1.02, 1.0);
            }
        }
        if (best_n < norm) {
            q = best_p;
            r = best_r;
            norm = best_n;
        }
    };

    auto newton_pass = [&](int max_iters, double trust) {
    for (int it = 0; it < max_iters && norm > tol; ++it) {
        Eigen::Matrix3d J;
        Eigen::Vector3d rv(r.fy, r.fz, r.tau);
        const double hy = 1e-7 * std::max(1.0, std::abs(q.y));
        const double hz = 1e-7 * std::max(1.0, std::abs(q.z));
        const double ht = 1e-8;
        auto column = [&](int col, const PlugPose& qp, double h) {
            const Residual rp = equilibrium_residual(sc, sock, qp, q_prev, cmd, anchors);
            J(0, col) = (rp.fy - r.fy) / h;
            J(1, col) = (rp.fz - r.fz) / h;
            J(2, col) = (rp.tau - r.tau) / h;
        };
        PlugPose qy = q;
        qy.y += hy;
        column(0, qy, hy);
        PlugPose qz = q;
        qz.z += hz;
        column(1, qz, hz);
        PlugPose qt = q;
        qt.theta += ht;
        column(2, qt, ht);

        Eigen::Vector3d dq = J.fullPivLu().solve(-rv);
        if (!dq.allFinite())
            throw Error::numeric("contact resolution failed at step " +
                                 std::to_string(step_index) + ": singular contact Jacobian");
        // Cap the raw step, then backtrack until the residual improves.
        const double max_trans = std::max(std::abs(dq[0]), std::abs(dq[1]));
        const double max_rot = std::abs(dq[2]) * torque_scale;
        const double cap = std::max({max_trans / trust, max_rot / trust, 1.0});
        dq /= cap;

        double alpha = 1.0;
        PlugPose q_best = q;
        Residual r_best = r;
        double norm_best = norm;
        for (int ls = 0; ls < 30; ++ls) {
            PlugPose q_try = q;
            q_try.y += alpha * dq[0];
            q_try.z += alpha * dq[1];
            q_try.theta += alpha * dq[2];
            const Residual rt = equilibrium_residual(sc, sock, q_try, q_prev, cmd, anchors);
            const double nt = norm_of(rt);
            if (nt < norm_best) {
                q_best = q_try;
                r_best = rt;
                norm_best = nt;
            }
            if (nt <= (1.0 - 1e-4 * alpha) * norm)
                break;
            alpha *= 0.5;
        }
        if (norm_best >= norm * (1.0 - 1e-12)) {
            // No descent direction: nudge along the raw step to hop over a
            // contact-set boundary, keeping determinism.
            q.y += 1e-6 * dq[0];
            q.z += 1e-6 * dq[1];
            q.theta += 1e-6 * dq[2];
            r = equilibrium_residual(sc, sock, q, q_prev, cmd, anchors);
            norm = norm_of(r);
            continue;
        }
        q = q_best;
        r = r_best;
        norm = norm_best;
    }
    };

    PlugPose q_opt = q;
    double norm_opt = norm;
    auto keep_best = [&]() {
        if (norm < norm_opt) {
            norm_opt = norm;
            q_opt = q;
        }
    };

    // Derivative-free finisher: coordinate pattern search is immune to the
    // few remaining kinks in the contact residual.
    auto pattern_search = [&]() {
        double h = 0.02;
        int budget = 4000;
        while (h > 1e-10 && norm > tol && budget > 0) {
            bool improved = false;
            for (int dof = 0; dof < 3 && budget > 0; ++dof) {
                for (double sign : {1.0, -1.0}) {
                    PlugPose t = q;
                    if (dof == 0)
                        t.y += sign * h;
                    else if (dof == 1)
                        t.z += sign * h;
                    else
                        t.theta += sign * h / torque_scale;
                    const Residual rt = equilibrium_residual(sc, sock, t, q_prev, cmd, anchors);
                    --budget;
                    const double nt = norm_of(rt);
                    if (nt < norm) {
                        q = t;
                        r = rt;
                        norm = nt;
                        improved = true;
                    }
                }
            }
            if (!improved)
                h *= 0.5;
        }
    };

    newton_pass(150, 0.5);
    keep_best();
    for (int round = 0; round < 3 && norm > tol; ++round) {
        relax();
        keep_best();
        newton_pass(60, 0.02);
        keep_best();
        q = q_opt;
        norm = norm_opt;
    }
    if (norm > tol) {
        pattern_search();
        keep_best();
        q = q_opt;
        norm = norm_opt;
    }
    if (converged)
        *converged = norm <= 1e-4;
    else if (norm > 1e-4)
        throw Error::numeric("contact resolution did not converge at step " +
                             std::to_string(step_index) + " (residual " + std::to_string(norm) +
                             " N)");
    return q;
}

double insertion_depth(const InsertionScenario& sc, const PlugPose& q) {
    const double w2 = sc.plug_width / 2.0;
    const Vec2 bl = plug_point(q, {-w2, 0.0});
    const Vec2 br = plug_point(q, {w2, 0.0});
    return std::max(0.0, -std::max(bl.z, br.z));
}

double lowest_point(const InsertionScenario& sc, const PlugPose& q) {
    const double w2 = sc.plug_width / 2.0;
    const Vec2 bl = plug_point(q, {-w2, 0.0});
    const Vec2 br = plug_point(q, {w2, 0.0});
    return std::min(bl.z, br.z);
}

struct Waypoint {
    Phase phase;
    PlugPose cmd;
};

/// Open-loop three-phase command trajectory (approach, slide_x placeholder,
/// slide_y, insert_z), offset by the believed socket position. The plug is
/// tilted toward the travel direction so its leading corner drops into the
/// opening during the slide and hooks the far wall; the insert untilts the
/// plug about that self-located corner.
std::vector<Waypoint> build_trajectory(const InsertionScenario& sc, const Socket& sock,
                                       const StrategyParams& st) {
    const double tilt = -sc.tilt * kDegToRad;  // leading (travel-side) corner low
    const double w2 = sc.plug_width / 2.0;
    const double my = sc.misalignment.y;
    const double mz = sc.misalignment.z;
    const double a = sock.half_opening;

    // Commands are derived from the leading corner (the +y corner).
    auto pose_for_corner = [&](double corner_y, double corner_z, double theta) {
        PlugPose p;
        p.theta = theta;
        p.y = corner_y - w2 * std::cos(theta);
        p.z = corner_z - w2 * std::sin(theta);
        return p;
    };

    const double corner_start_y = my - a - st.first_contact_offset;
    const double corner_slide_y = my + a + st.slide_overshoot;
    const double z_touch = mz;
    const double z_pressed = z_touch - st.preload;

    std::vector<Waypoint> wp;
    wp.push_back({Phase::approach, pose_for_corner(corner_start_y, z_touch + st.approach_height, tilt)});
    wp.push_back({Phase::approach, pose_for_corner(corner_start_y, z_pressed, tilt)});
    // The x move of the physical strategy is out of plane; kept as a phase
    // marker with no in-plane motion.
    wp.push_back({Phase::slide_x, pose_for_corner(corner_start_y, z_pressed, tilt)});
    // Sweep across the believed opening; the corner drops in and catches the
    // far wall wherever the true opening is.
    wp.push_back({Phase::slide_y, pose_for_corner(corner_slide_y, z_pressed, tilt)});

    // Insert: untilt about the hooked corner while centering on the believed
    // socket, staying shallow so the grip can slide the plug sideways, then
    // push to seat.
    PlugPose seat_upright;
    seat_upright.theta = 0.0;
    seat_upright.y = my;
    seat_upright.z = mz - st.untilt_depth;
    wp.push_back({Phase::insert_z, seat_upright});
    PlugPose seated = seat_upright;
    seated.z = mz - sock.depth - st.seat_overtravel;
    wp.push_back({Phase::insert_z, seated});
    return wp;
}

double pose_distance(const PlugPose& a, const PlugPose& b, double rot_scale) {
    return std::max({std::abs(a.y - b.y), std::abs(a.z - b.z),
                     std::abs(a.theta - b.theta) * rot_scale});
}

} // namespace

ConnectorFit fit_from_string(const std::string& s) {
    if (s == "press") return ConnectorFit::press;
    if (s == "running") return ConnectorFit::running;
    if (s == "transition") return ConnectorFit::transition;
    throw Error::unknown("unknown connector fit '" + s + "'");
}

std::string to_string(ConnectorFit f) {
    switch (f) {
    case ConnectorFit::press: return "press";
    case ConnectorFit::running: return "running";
    case ConnectorFit::transition: return "transition";
    }
    return "?";
}

GlandOrientation gland_from_string(const std::string& s) {
    if (s == "straight") return GlandOrientation::straight;
    if (s == "right_angle") return GlandOrientation::right_angle;
    throw Error::unknown("unknown gland orientation '" + s + "'");
}

std::string to_string(GlandOrientation g) {
    return g == GlandOrientation::straight ? "straight" : "right_angle";
}

LockingFeature locking_from_string(const std::string& s) {
    if (s == "none") return LockingFeature::none;
    if (s == "clip") return LockingFeature::clip;
    if (s == "lever") return LockingFeature::lever;
    throw Error::unknown("unknown locking feature '" + s + "'");
}

std::string to_string(LockingFeature l) {
    switch (l) {
    case LockingFeature::none: return "none";
    case LockingFeature::clip: return "clip";
    case LockingFeature::lever: return "lever";
    }
    return "?";
}

void ConnectorTraits::validate() const {
    if (exposed_after_insert < 0.0)
        throw Error::config("exposed_after_insert must be non-negative");
}

double default_clearance(ConnectorFit fit) {
    switch (fit) {
    case ConnectorFit::press: return 0.05;
    case ConnectorFit::running: return 0.2;
    case ConnectorFit::transition: return 0.1;
    }
    return 0.2;
}

void InsertionScenario::validate() const {
    if (plug_width <= 0.0 || plug_height <= 0.0 || socket_depth <= 0.0)
        throw Error::config("plug and socket dimensions must be positive");
    if (clearance < 0.0)
        throw Error::config("clearance must be non-negative");
    if (friction_mu < 0.0)
        throw Error::config("friction must be non-negative");
    if (contact_stiffness <= 0.0)
        throw Error::config("contact stiffness must be positive");
    if (lip_radius <= 0.0 || lip_radius >= socket_depth)
        throw Error::config("lip radius must be positive and below the socket depth");
    if (force_limit <= 0.0)
        throw Error::config("force limit must be positive");
    grip.validate();
    traits.validate();
}

void StrategyParams::validate() const {
    if (step <= 0.0)
        throw Error::config("strategy step must be positive");
    if (!(std::isfinite(first_contact_offset) && std::isfinite(slide_overshoot) &&
          std::isfinite(preload) && std::isfinite(seat_overtravel)))
        throw Error::config("strategy waypoint offsets must be finite");
    if (stall_steps < 1)
        throw Error::config("stall_steps must be >= 1");
}

std::string to_string(InsertOutcome o) {
    switch (o) {
    case InsertOutcome::success: return "success";
    case InsertOutcome::jammed: return "jammed";
    case InsertOutcome::missed: return "missed";
    case InsertOutcome::overforce: return "overforce";
    }
    return "?";
}

std::string to_string(Phase p) {
    switch (p) {
    case Phase::approach: return "approach";
    case Phase::slide_x: return "slide_x";
    case Phase::slide_y: return "slide_y";
    case Phase::insert_z: return "insert_z";
    }
    return "?";
}

std::string to_string(Axis a) {
    return a == Axis::x ? "x" : "y";
}

void SearchTrace::validate() const {
    const std::vector<Phase> expected{Phase::approach, Phase::slide_x, Phase::slide_y,
                                      Phase::insert_z};
    if (phases != expected)
        throw Error::numeric("trace phases out of order");
}

SearchTrace simulate_insert(const InsertionScenario& scenario, const StrategyParams& strategy) {
    scenario.validate();
    strategy.validate();
    const Socket sock = make_socket(scenario);
    const auto waypoints = build_trajectory(scenario, sock, strategy);

    SearchTrace trace;
    trace.phases = {Phase::approach, Phase::slide_x, Phase::slide_y, Phase::insert_z};

    PlugPose cmd = waypoints.front().cmd;
    PlugPose plug = cmd;       // starts in free space, follows the grip
    PlugPose plug_prev = cmd;
    StickAnchors anchors;
    const double seat_tol = 0.25;
    const double entry_tol = 1.0;

    int step_index = 0;
    int stall = 0;
    int transit_run = 0;
    double depth_best = 0.0;
    bool done = false;

    // Return mapping: re-anchor each contact so the solved friction force is
    // reproduced exactly (inverting the smooth saturation), which drags the
    // anchor along once a contact slides.
    auto update_anchors = [&]() {
        StickAnchors next;
        const double k = scenario.contact_stiffness;
        for (const ActiveContact& c :
             resolve_contacts(scenario, sock, plug, plug_prev, anchors)) {
            const Vec2 t = perp(c.normal);
            const std::size_t id = static_cast<std::size_t>(c.id);
            double stretch = -c.ft / k;
            next.active[id] = true;
            next.point[id] = {c.point.y - t.y * stretch, c.point.z - t.z * stretch};
        }
        anchors = next;
    };

    auto record = [&](Phase phase) {
        TraceSample s;
        s.step = step_index;
        s.phase = phase;
        s.command = cmd;
        s.plug = plug;
        for (const ActiveContact& c : resolve_contacts(scenario, sock, plug, plug_prev, anchors)) {
            const Vec2 t = perp(c.normal);
            s.contacts.push_back({{c.point.y, c.point.z}, {c.normal.y, c.normal.z}, c.fn, c.ft});
            s.contact_fy += c.fn * c.normal.y + c.ft * t.y;
            s.contact_fz += c.fn * c.normal.z + c.ft * t.z;
        }
        s.depth = insertion_depth(scenario, plug);
        trace.samples.push_back(s);
    };

    for (std::size_t leg = 1; leg < waypoints.size() && !done; ++leg) {
        const Phase phase = waypoints[leg].phase;
        const PlugPose from = waypoints[leg - 1].cmd;
        const PlugPose to = waypoints[leg].cmd;
        const double rot_scale = scenario.plug_height;
        const double length = pose_distance(from, to, rot_scale);
        const int increments = std::max(1, static_cast<int>(std::ceil(length / strategy.step)));

        if (length < 1e-12) {
            // Zero-length leg: keep the phase visible in the trace.
            record(phase);
            continue;
        }

        for (int inc = 1; inc <= increments && !done; ++inc) {
            ++step_index;
            const PlugPose cmd_prev = cmd;
            const double t = static_cast<double>(inc) / increments;
            cmd.y = from.y + t * (to.y - from.y);
            cmd.z = from.z + t * (to.z - from.z);
            cmd.theta = from.theta + t * (to.theta - from.theta);

            // Newton may lose the equilibrium branch across stick-slip and
            // contact transitions; halving the command increment recovers it.
            // A step that stays unbalanced at the deepest subdivision is a
            // dynamic snap: the best state is carried but not sampled.
            bool in_transit = false;
            const std::function<void(const PlugPose&, const PlugPose&, int)> advance =
                [&](const PlugPose& c_from, const PlugPose& c_to, int depth) {
                    try {
                        const PlugPose before = plug;
                        if (depth >= 8) {
                            bool ok = false;
                            plug = solve_equilibrium(scenario, sock, plug, before, c_to, anchors,
                                                     step_index, &ok);
                            if (!ok)
                                in_transit = true;
                        } else {
                            plug = solve_equilibrium(scenario, sock, plug, before, c_to, anchors,
                                                     step_index);
                        }
                        plug_prev = before;
                        update_anchors();
                    } catch (const Error&) {
                        PlugPose mid;
                        mid.y = 0.5 * (c_from.y + c_to.y);
                        mid.z = 0.5 * (c_from.z + c_to.z);
                        mid.theta = 0.5 * (c_from.theta + c_to.theta);
                        advance(c_from, mid, depth + 1);
                        advance(mid, c_to, depth + 1);
                    }
                };
            advance(cmd_prev, cmd, 0);
            if (in_transit) {
                ++transit_run;
                if (transit_run > 40)
                    throw Error::numeric("contact resolution failed around step " +
                                         std::to_string(step_index) +
                                         ": no equilibrium after a dynamic snap");
                continue;  // mid-jump: no sample, no outcome checks
            }
            transit_run = 0;

            // Per-contact force limit.
            double fmax = 0.0;
            auto contacts = resolve_contacts(scenario, sock, plug, plug_prev, anchors);
            for (const ActiveContact& c : contacts)
                fmax = std::max(fmax, std::hypot(c.fn, c.ft));
            trace.max_contact_force = std::max(trace.max_contact_force, fmax);
            if (fmax > scenario.force_limit) {
                trace.outcome = InsertOutcome::overforce;
                trace.outcome_step = step_index;
                done = true;
            }

            // Pin strike: lateral search dipping into the opening onto pins.
            if (!done && phase != Phase::insert_z && !contacts.empty()) {
                const double low = lowest_point(scenario, plug);
                const double mid_y = plug.y;
                if (std::abs(mid_y) < sock.half_opening + scenario.plug_width &&
                    low < sock.pin_top - 1e-9) {
                    trace.outcome = InsertOutcome::overforce;
                    trace.outcome_step = step_index;
                    done = true;
                }
            }

            // Progress and jamming bookkeeping during insertion.
            const double depth = insertion_depth(scenario, plug);
            if (!done && phase == Phase::insert_z) {
                if (depth > depth_best + 1e-4) {
                    depth_best = depth;
                    stall = 0;
                } else {
                    ++stall;
                }
                if (stall >= strategy.stall_steps) {
                    // Two-point wedging test against the grip push, with all
                    // wrenches taken about the socket origin.
                    std::vector<Contact> pts;
                    for (const ActiveContact& c : contacts)
                        pts.push_back({{c.point.y, c.point.z}, {c.normal.y, c.normal.z}});
                    const GripWrench g = grip_wrench(scenario, plug, cmd);
                    const Wrench applied{g.fy, g.fz, g.tau + plug.y * g.fz - plug.z * g.fy};
                    if (pts.size() >= 2 && jamming_check(pts, scenario.friction_mu, applied)) {
                        trace.outcome = InsertOutcome::jammed;
                        trace.outcome_step = step_index;
                        done = true;
                    }
                    stall = 0;
                }
            }
            record(phase);
        }
    }

    trace.insert_depth = insertion_depth(scenario, plug);
    if (!done) {
        const bool seated = trace.insert_depth >= sock.depth - seat_tol &&
                            std::abs(plug.theta) < 2.0 * kDegToRad;
        if (seated) {
            trace.outcome = InsertOutcome::success;
        } else if (depth_best < entry_tol) {
            trace.outcome = InsertOutcome::missed;
        } else {
            trace.outcome = InsertOutcome::jammed;
        }
        trace.outcome_step = step_index;
    }
    trace.validate();
    return trace;
}

ToleranceWindow tolerance_window(const InsertionScenario& scenario, Axis axis, double step,
                                 const StrategyParams& strategy) {
    if (step <= 0.0)
        throw Error::config("tolerance window scan step must be positive");
    scenario.validate();

    ToleranceWindow win;
    win.axis = axis;
    if (axis == Axis::x) {
        // Out-of-plane tolerance is carried by the free rotation of the cable
        // head inside the grip; modeled as a lumped window.
        win.min_offset = -scenario.x_rotation_tolerance / 2.0;
        win.max_offset = scenario.x_rotation_tolerance / 2.0;
        win.window = scenario.x_rotation_tolerance;
        win.limit_low = InsertOutcome::missed;
        win.limit_high = InsertOutcome::missed;
        return win;
    }

    auto attempt = [&](double offset, InsertOutcome* outcome) {
        InsertionScenario sc = scenario;
        sc.misalignment.y = scenario.misalignment.y + offset;
        const SearchTrace first = simulate_insert(sc, strategy);
        // The pipeline is deterministic; one repeat stands in for the paper's
        // five physical repeats and guards exactly that.
        const SearchTrace repeat = simulate_insert(sc, strategy);
        if (first.outcome != repeat.outcome)
            throw Error::numeric("nondeterministic insertion outcome at offset " +
                                 std::to_string(offset));
        *outcome = first.outcome;
        return first.outcome == InsertOutcome::success;
    };

    InsertOutcome at_zero;
    if (!attempt(0.0, &at_zero)) {
        win.limit_low = at_zero;
        win.limit_high = at_zero;
        return win;  // empty window
    }

    const int max_steps = 60;
    double lo = 0.0, hi = 0.0;
    for (int i = 1; i <= max_steps; ++i) {
        InsertOutcome oc;
        if (attempt(i * step, &oc)) {
            hi = i * step;
        } else {
            win.limit_high = oc;
            break;
        }
    }
    for (int i = 1; i <= max_steps; ++i) {
        InsertOutcome oc;
        if (attempt(-i * step, &oc)) {
            lo = -i * step;
        } else {
            win.limit_low = oc;
            break;
        }
    }
    win.min_offset = lo;
    win.max_offset = hi;
    win.window = hi - lo;
    return win;
}

Wrench grip_reaction(const InsertionScenario& scenario, const PlugPose& pose,
                     const PlugPose& command) {
    const GripWrench g = grip_wrench(scenario, pose, command);
    return {g.fy, g.fz, g.tau};
}

double viscous_force_estimate(const ViscoelasticFit& fit, double speed) {
    if (speed < 0.0)
        throw Error::config("speed must be non-negative");
    return fit.b * speed;
}

bool jamming_check(std::span<const Contact> contacts, double mu, const Wrench& applied) {
    if (contacts.empty())
        throw Error::config("jamming check needs at least one contact");
    if (contacts.size() < 2 || mu <= 0.0)
        return false;

    // Friction cone edge wrenches of the two strongest-opposed contacts; the
    // applied wrench is balanced iff -applied lies in their positive span.
    std::vector<Eigen::Vector3d> edges;
    for (const Contact& c : contacts) {
        const Vec2 n{c.normal.y, c.normal.z};
        const Vec2 t = perp(n);
        for (double s : {1.0, -1.0}) {
            Vec2 d{n.y + s * mu * t.y, n.z + s * mu * t.z};
            const double len = std::hypot(d.y, d.z);
            d.y /= len;
            d.z /= len;
            edges.emplace_back(d.y, d.z, c.point.y * d.z - c.point.z * d.y);
        }
    }
    const Eigen::Vector3d target(-applied.fy, -applied.fz, -applied.tau);
    const double scale = std::max(1.0, target.norm());

    // Enumerate 3-edge subsets; accept a non-negative exact combination.
    const std::size_t n = edges.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                Eigen::Matrix3d m;
                m.col(0) = edges[i];
                m.col(1) = edges[j];
                m.col(2) = edges[k];
                Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
                if (lu.rank() < 3)
                    continue;
                const Eigen::Vector3d lambda = lu.solve(target);
                if ((m * lambda - target).norm() > 1e-9 * scale)
                    continue;
                if (lambda.minCoeff() >= -1e-9 * scale)
                    return true;
            }
        }
    }
    return false;
}

} // namespace finray
