#include "finray/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finray/error.hpp"

namespace finray {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double dist(const Point2& a, const Point2& b) {
    return std::hypot(b.y - a.y, b.z - a.z);
}

struct Segment {
    Point2 a, b;
};

/// Intersection parameter t of segment a+t(b-a) with the line {p : n.p = c},
/// or nullopt when (nearly) parallel.
std::optional<double> line_segment_param(const Segment& s, double ny, double nz, double c) {
    const double denom = ny * (s.b.y - s.a.y) + nz * (s.b.z - s.a.z);
    if (std::abs(denom) < 1e-12)
        return std::nullopt;
    const double c0 = ny * s.a.y + nz * s.a.z;
    return (c - c0) / denom;
}

Point2 lerp(const Segment& s, double t) {
    return {s.a.y + t * (s.b.y - s.a.y), s.a.z + t * (s.b.z - s.a.z)};
}

struct WallLayout {
    Segment front;  // grip side, +y
    Segment back;
    double z_lo = 0.0;  // rib attachment band
    double z_hi = 0.0;
};

WallLayout wall_layout(const FingerDesign& d) {
    const double hb = d.geometry.base_height;
    const double H = d.envelope.height;
    const double wb = d.envelope.base_width / 2.0;
    // Two parallel vertical walls; with the crossbeams this is the
    // parallelogram structure that translates the tip without rotating it.
    WallLayout w;
    w.front = {{wb, hb}, {wb, H}};
    w.back = {{-wb, hb}, {-wb, H}};
    w.z_lo = hb;
    w.z_hi = H - d.geometry.tip_cap_thickness;
    return w;
}

struct RibLine {
    Point2 back, front;
};

std::vector<RibLine> rib_lines(const FingerDesign& d, int* candidate_count = nullptr) {
    const WallLayout w = wall_layout(d);
    const double pitch = rib_spacing(d.infill_density, d.print);
    const double phi = d.infill_direction * kDegToRad;
    // Rib family: parallel lines inclined by phi from the mount-parallel axis,
    // rising toward the back wall. The pitch is kept along the finger axis so
    // the wall junction spacing stays density-true for every inclination.
    const double ny = std::sin(phi);
    const double nz = std::cos(phi);
    const double axis_pitch = pitch * std::cos(phi);

    const Point2 corners[4] = {
        {w.front.a.y, w.z_lo},
        {lerp(w.front, (w.z_hi - w.front.a.z) / (w.front.b.z - w.front.a.z)).y, w.z_hi},
        {w.back.a.y, w.z_lo},
        {lerp(w.back, (w.z_hi - w.back.a.z) / (w.back.b.z - w.back.a.z)).y, w.z_hi},
    };
    double c_min = 1e300, c_max = -1e300;
    for (const Point2& p : corners) {
        const double c = ny * p.y + nz * p.z;
        c_min = std::min(c_min, c);
        c_max = std::max(c_max, c);
    }

    const int n = static_cast<int>(std::floor((c_max - c_min) / axis_pitch + 1e-9));
    if (candidate_count)
        *candidate_count = std::max(n, 0);
    if (n < 1)
        throw Error::config("degenerate rib layout: rib pitch " + std::to_string(pitch) +
                            " mm exceeds the usable finger height");

    const double c_mid = 0.5 * (c_min + c_max);
    std::vector<RibLine> ribs;
    for (int j = 0; j < n; ++j) {
        const double c = c_mid + (j - (n - 1) / 2.0) * axis_pitch;
        const auto tf = line_segment_param(w.front, ny, nz, c);
        const auto tb = line_segment_param(w.back, ny, nz, c);
        if (!tf || !tb)
            continue;
        const Point2 pf = lerp(w.front, *tf);
        const Point2 pb = lerp(w.back, *tb);
        // Both endpoints must land inside the flexible band of their wall.
        if (pf.z < w.z_lo - 1e-9 || pf.z > w.z_hi + 1e-9)
            continue;
        if (pb.z < w.z_lo - 1e-9 || pb.z > w.z_hi + 1e-9)
            continue;
        if (dist(pb, pf) < d.geometry.min_element_length)
            continue;
        ribs.push_back({pb, pf});
    }
    return ribs;
}

Point2 rotated(const Point2& p, double angle_deg) {
    const double a = angle_deg * kDegToRad;
    const double c = std::cos(a), s = std::sin(a);
    // Positive mount angle leans the tip away from the contact side, the
    // orientation the stiffness rig probes against.
    return {p.y * c - p.z * s, p.y * s + p.z * c};
}

/// Junction bookkeeping along one wall, keyed by the segment parameter.
class WallNodes {
public:
    WallNodes(Segment seg, double merge_tol) : seg_(seg), merge_tol_(merge_tol) {
        const double len = dist(seg_.a, seg_.b);
        tol_t_ = merge_tol_ / len;
        add(0.0);
        add(1.0);
    }

    int add(double t) {
        for (std::size_t i = 0; i < ts_.size(); ++i) {
            if (std::abs(ts_[i] - t) < tol_t_)
                return static_cast<int>(i);
        }
        ts_.push_back(t);
        return static_cast<int>(ts_.size() - 1);
    }

    /// Sorted unique junction parameters.
    std::vector<double> sorted() const {
        std::vector<double> out = ts_;
        std::sort(out.begin(), out.end());
        return out;
    }

    Point2 point(double t) const { return lerp(seg_, t); }

private:
    Segment seg_;
    double merge_tol_;
    double tol_t_;
    std::vector<double> ts_;
};

} // namespace

FingertipStyle fingertip_from_string(const std::string& s) {
    if (s == "rounded") return FingertipStyle::rounded;
    if (s == "flat") return FingertipStyle::flat;
    if (s == "notched_rounded") return FingertipStyle::notched_rounded;
    if (s == "flat_angled") return FingertipStyle::flat_angled;
    if (s == "notched_contact_plane") return FingertipStyle::notched_contact_plane;
    throw Error::unknown("unknown fingertip style '" + s + "'");
}

std::string to_string(FingertipStyle s) {
    switch (s) {
    case FingertipStyle::rounded: return "rounded";
    case FingertipStyle::flat: return "flat";
    case FingertipStyle::notched_rounded: return "notched_rounded";
    case FingertipStyle::flat_angled: return "flat_angled";
    case FingertipStyle::notched_contact_plane: return "notched_contact_plane";
    }
    return "?";
}

static bool is_notched(FingertipStyle s) {
    return s == FingertipStyle::notched_rounded || s == FingertipStyle::notched_contact_plane;
}

void FingerDesign::validate() const {
    if (infill_direction < 0.0 || infill_direction > 40.0)
        throw Error::config("infill direction must be within 0..40 deg");
    if (infill_density <= 0.0 || infill_density > 1.0)
        throw Error::config("infill density must be in (0, 1]");
    if (envelope.height <= 0.0 || envelope.base_width <= 0.0 || envelope.depth <= 0.0)
        throw Error::config("envelope dimensions must be positive");
    if (is_notched(fingertip) && notch_width <= 0.0)
        throw Error::config("notch width must be positive for notched fingertips");
    if (is_notched(fingertip) && notch_width >= envelope.base_width)
        throw Error::config("notch wider than the finger tip");
    if (geometry.base_height <= 0.0 ||
        geometry.base_height + geometry.tip_cap_thickness >= envelope.height)
        throw Error::config("base height and tip cap leave no flexible span");
    material.validate();
    print.validate();
}

double PlanarFrame::element_length(int e) const {
    const BeamSpec& el = elements.at(static_cast<std::size_t>(e));
    return dist(nodes[static_cast<std::size_t>(el.node_i)], nodes[static_cast<std::size_t>(el.node_j)]);
}

void PlanarFrame::validate() const {
    const int n = static_cast<int>(nodes.size());
    if (supports.empty())
        throw Error::config("frame has no support nodes");
    for (int s : supports)
        if (s < 0 || s >= n)
            throw Error::config("support node index out of range");
    if (tip_node < 0 || tip_node >= n)
        throw Error::config("tip node index out of range");
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const BeamSpec& el = elements[e];
        if (el.node_i < 0 || el.node_i >= n || el.node_j < 0 || el.node_j >= n)
            throw Error::config("element node index out of range");
        if (element_length(static_cast<int>(e)) < 1e-12)
            throw Error::config("zero-length element in frame");
        adj[static_cast<std::size_t>(el.node_i)].push_back(el.node_j);
        adj[static_cast<std::size_t>(el.node_j)].push_back(el.node_i);
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack(supports.begin(), supports.end());
    for (int s : stack)
        seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
        }
    }
    for (int v = 0; v < n; ++v)
        if (!seen[static_cast<std::size_t>(v)])
            throw Error::config("frame is not connected to its supports");
}

void FingertipContact::validate() const {
    if (contact_half_width <= 0.0)
        throw Error::config("contact half width must be positive");
    if (friction_mu < 0.0)
        throw Error::config("contact friction must be non-negative");
}

int rib_candidate_count(const FingerDesign& design) {
    design.validate();
    int n = 0;
    rib_lines(design, &n);
    return n;
}

PlanarFrame build_frame(const FingerDesign& design, int elems_per_member) {
    design.validate();
    if (elems_per_member < 1)
        throw Error::config("elems_per_member must be >= 1");

    const WallLayout w = wall_layout(design);
    const double merge_tol = design.geometry.min_element_length;
    const std::vector<RibLine> ribs = rib_lines(design);

    WallNodes front(w.front, merge_tol);
    WallNodes back(w.back, merge_tol);
    for (const RibLine& r : ribs) {
        front.add((r.front.z - w.front.a.z) / (w.front.b.z - w.front.a.z));
        back.add((r.back.z - w.back.a.z) / (w.back.b.z - w.back.a.z));
    }

    PlanarFrame frame;
    const SectionProperties line_sec = beam_section(design.print);
    const SectionProperties cap_sec = solid_section(design.geometry.tip_cap_thickness, design.print);

    auto add_node = [&frame](const Point2& p) {
        frame.nodes.push_back(p);
        return static_cast<int>(frame.nodes.size()) - 1;
    };

    // Wall junction nodes, base to tip.
    std::vector<double> front_ts = front.sorted();
    std::vector<double> back_ts = back.sorted();
    std::vector<int> front_nodes, back_nodes;
    for (double t : front_ts)
        front_nodes.push_back(add_node(front.point(t)));
    for (double t : back_ts)
        back_nodes.push_back(add_node(back.point(t)));

    auto node_for = [&](const std::vector<double>& ts, const std::vector<int>& node_ids,
                        double t_query) {
        int best = 0;
        double best_d = 1e300;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double d = std::abs(ts[i] - t_query);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        return node_ids[static_cast<std::size_t>(best)];
    };

    // Members: wall spans between consecutive junctions, ribs, tip cap.
    struct Member {
        Point2 a, b;
        int node_a, node_b;
        SectionProperties sec;
        Material mat;
    };
    std::vector<Member> members;
    auto add_wall_members = [&](const WallNodes& wall, const std::vector<double>& ts,
                                const std::vector<int>& node_ids) {
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            members.push_back({wall.point(ts[i]), wall.point(ts[i + 1]), node_ids[i],
                               node_ids[i + 1], line_sec, design.material});
        }
    };
    add_wall_members(front, front_ts, front_nodes);
    add_wall_members(back, back_ts, back_nodes);

    for (std::size_t i = 0; i < ribs.size(); ++i) {
        const RibLine& r = ribs[i];
        const double tf = (r.front.z - w.front.a.z) / (w.front.b.z - w.front.a.z);
        const double tb = (r.back.z - w.back.a.z) / (w.back.b.z - w.back.a.z);
        const int nf = node_for(front_ts, front_nodes, tf);
        const int nb = node_for(back_ts, back_nodes, tb);
        members.push_back({frame.nodes[static_cast<std::size_t>(nb)],
                           frame.nodes[static_cast<std::size_t>(nf)], nb, nf, line_sec,
                           design.material});
    }

    // Tip cap joining the wall tops.
    const int front_top = front_nodes.back();
    const int back_top = back_nodes.back();
    members.push_back({frame.nodes[static_cast<std::size_t>(front_top)],
                       frame.nodes[static_cast<std::size_t>(back_top)], front_top, back_top,
                       cap_sec, design.material});

    // Subdivide members; intermediate nodes are appended per member in order.
    for (const Member& m : members) {
        const double len = dist(m.a, m.b);
        int div = elems_per_member;
        while (div > 1 && len / div < design.geometry.min_element_length)
            --div;
        int prev = m.node_a;
        for (int k = 1; k < div; ++k) {
            const double t = static_cast<double>(k) / div;
            const int mid =
                add_node({m.a.y + t * (m.b.y - m.a.y), m.a.z + t * (m.b.z - m.a.z)});
            frame.elements.push_back({prev, mid, m.sec, m.mat});
            prev = mid;
        }
        frame.elements.push_back({prev, m.node_b, m.sec, m.mat});
    }

    // Fingertip contact point. Notched and angled tips carry the contact point
    // on a short rigid offset in front of the grip-side wall.
    double standoff = 0.0, setback = 0.0;
    switch (design.fingertip) {
    case FingertipStyle::rounded:
    case FingertipStyle::flat:
        break;
    case FingertipStyle::flat_angled:
        standoff = design.geometry.contact_standoff;
        break;
    case FingertipStyle::notched_rounded:
    case FingertipStyle::notched_contact_plane:
        standoff = design.geometry.contact_standoff;
        setback = design.geometry.notch_setback;
        break;
    }
    if (standoff > 0.0 || setback > 0.0) {
        const Point2 top = frame.nodes[static_cast<std::size_t>(front_top)];
        const int contact = add_node({top.y + standoff, top.z - setback});
        // The offset connector is a rigid abstraction of the solid tip block;
        // it never participates in failure checks.
        Material rigid = design.material.scaled_modulus(design.geometry.rigid_offset_scale);
        rigid.yield_strength = 1e9;
        rigid.ultimate_strength = 1e9;
        frame.elements.push_back({front_top, contact, cap_sec, rigid});
        frame.tip_node = contact;
    } else {
        frame.tip_node = front_top;
    }

    frame.supports = {front_nodes.front(), back_nodes.front()};

    const double mount = design.mount_angle;
    if (mount != 0.0) {
        for (Point2& p : frame.nodes)
            p = rotated(p, mount);
    }
    if (design.mirrored) {
        for (Point2& p : frame.nodes)
            p.y = -p.y;
    }

    frame.validate();
    return frame;
}

FingertipContact fingertip_contact(const FingerDesign& design) {
    design.validate();
    FingertipContact c;
    switch (design.fingertip) {
    case FingertipStyle::rounded:
    case FingertipStyle::flat:
        c.contact_plane_angle = 0.0;
        c.contact_half_width = design.envelope.base_width / 2.0;
        break;
    case FingertipStyle::flat_angled:
        c.contact_plane_angle = design.mount_angle;
        c.contact_half_width = design.envelope.base_width / 2.0;
        break;
    case FingertipStyle::notched_rounded:
        c.contact_plane_angle = 0.0;
        c.contact_half_width = design.notch_width / 2.0;
        break;
    case FingertipStyle::notched_contact_plane:
        c.contact_plane_angle = design.mount_angle;
        c.contact_half_width = design.notch_width / 2.0;
        break;
    }
    c.validate();
    return c;
}

} // namespace finray
