#include "finray/exports.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <ostream>
#include <sstream>

#include "finray/error.hpp"

namespace finray {

namespace {

std::string fmt(double v) {
    char buf[32];
    if (std::abs(v) < 5e-5)
        v = 0.0;  // avoid "-0.0000"
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct Vec3f {
    float x, y, z;
};

void put_le32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    static_assert(sizeof(bits) == sizeof(f));
    std::memcpy(&bits, &f, sizeof(bits));
    put_le32(out, bits);
}

void put_vec(std::string& out, const Vec3f& v) {
    put_f32(out, v.x);
    put_f32(out, v.y);
    put_f32(out, v.z);
}

Vec3f tri_normal(const Vec3f& a, const Vec3f& b, const Vec3f& c) {
    const float ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
    const float vx = c.x - a.x, vy = c.y - a.y, vz = c.z - a.z;
    Vec3f n{uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx};
    const float len = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
    if (len > 0.0f) {
        n.x /= len;
        n.y /= len;
        n.z /= len;
    }
    return n;
}

/// 8 corners of a box; planar rectangle lives in (y, z), extruded along x.
std::array<Vec3f, 8> box_corners(const Box3& b) {
    const double c = std::cos(b.angle), s = std::sin(b.angle);
    auto pt = [&](double y, double z, double x) {
        const double ry = b.pivot_y + (y - b.pivot_y) * c - (z - b.pivot_z) * s;
        const double rz = b.pivot_z + (y - b.pivot_y) * s + (z - b.pivot_z) * c;
        return Vec3f{static_cast<float>(x), static_cast<float>(ry), static_cast<float>(rz)};
    };
    return {pt(b.y0, b.z0, 0), pt(b.y1, b.z0, 0), pt(b.y1, b.z1, 0), pt(b.y0, b.z1, 0),
            pt(b.y0, b.z0, b.depth), pt(b.y1, b.z0, b.depth), pt(b.y1, b.z1, b.depth),
            pt(b.y0, b.z1, b.depth)};
}

// Quads of a box with outward orientation (corner indexing as above).
constexpr int kBoxQuads[6][4] = {
    {0, 3, 2, 1},  // x = 0 face
    {4, 5, 6, 7},  // x = depth face
    {0, 1, 5, 4},  // z0 face
    {2, 3, 7, 6},  // z1 face
    {0, 4, 7, 3},  // y0 face
    {1, 2, 6, 5},  // y1 face
};

} // namespace

std::string export_svg(const PlanarFrame& frame, const std::vector<Point2>* deflection,
                       double deflection_scale) {
    frame.validate();
    if (deflection && deflection->size() != frame.nodes.size())
        throw Error::config("deflection field length does not match node count");

    double y_min = 1e300, y_max = -1e300, z_min = 1e300, z_max = -1e300;
    auto grow = [&](double y, double z) {
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
        z_min = std::min(z_min, z);
        z_max = std::max(z_max, z);
    };
    for (const Point2& p : frame.nodes)
        grow(p.y, p.z);
    if (deflection) {
        for (std::size_t i = 0; i < frame.nodes.size(); ++i)
            grow(frame.nodes[i].y + deflection_scale * (*deflection)[i].y,
                 frame.nodes[i].z + deflection_scale * (*deflection)[i].z);
    }
    const double margin = 5.0;
    y_min -= margin;
    z_min -= margin;
    y_max += margin;
    z_max += margin;

    // SVG x runs with +y, SVG y runs downward so flip z.
    auto sx = [&](double y) { return y - y_min; };
    auto sy = [&](double z) { return z_max - z; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(y_max - y_min)
       << " " << fmt(z_max - z_min) << "\">\n";
    os << "<g stroke=\"#222222\" stroke-width=\"0.4\" fill=\"none\" stroke-linecap=\"round\">\n";
    for (const BeamSpec& el : frame.elements) {
        const Point2& a = frame.nodes[static_cast<std::size_t>(el.node_i)];
        const Point2& b = frame.nodes[static_cast<std::size_t>(el.node_j)];
        os << "<polyline points=\"" << fmt(sx(a.y)) << "," << fmt(sy(a.z)) << " "
           << fmt(sx(b.y)) << "," << fmt(sy(b.z)) << "\"/>\n";
    }
    os << "</g>\n";
    if (deflection) {
        os << "<g stroke=\"#cc3311\" stroke-width=\"0.3\" fill=\"none\" stroke-linecap=\"round\">\n";
        for (const BeamSpec& el : frame.elements) {
            const std::size_t i = static_cast<std::size_t>(el.node_i);
            const std::size_t j = static_cast<std::size_t>(el.node_j);
            const double ay = frame.nodes[i].y + deflection_scale * (*deflection)[i].y;
            const double az = frame.nodes[i].z + deflection_scale * (*deflection)[i].z;
            const double by = frame.nodes[j].y + deflection_scale * (*deflection)[j].y;
            const double bz = frame.nodes[j].z + deflection_scale * (*deflection)[j].z;
            os << "<polyline points=\"" << fmt(sx(ay)) << "," << fmt(sy(az)) << " "
               << fmt(sx(by)) << "," << fmt(sy(bz)) << "\"/>\n";
        }
        os << "</g>\n";
    }
    // Support and tip markers.
    for (int s : frame.supports) {
        const Point2& p = frame.nodes[static_cast<std::size_t>(s)];
        os << "<circle cx=\"" << fmt(sx(p.y)) << "\" cy=\"" << fmt(sy(p.z))
           << "\" r=\"0.8\" fill=\"#4477aa\"/>\n";
    }
    {
        const Point2& p = frame.nodes[static_cast<std::size_t>(frame.tip_node)];
        os << "<circle cx=\"" << fmt(sx(p.y)) << "\" cy=\"" << fmt(sy(p.z))
           << "\" r=\"0.8\" fill=\"#cc3311\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<Box3> design_boxes(const FingerDesign& design) {
    design.validate();
    const double depth = design.envelope.depth;
    const double hb = design.geometry.base_height;
    const double H = design.envelope.height;
    const double wb = design.envelope.base_width / 2.0;
    const double t = design.print.line_width * design.print.wall_line_count;
    const double cap_t = design.geometry.tip_cap_thickness;

    std::vector<Box3> boxes;
    // Mount block, printed solid.
    boxes.push_back({-wb, 0.0, wb, hb, depth});

    // Parallel outer walls.
    boxes.push_back({wb - t / 2.0, hb, wb + t / 2.0, H, depth});
    boxes.push_back({-wb - t / 2.0, hb, -wb + t / 2.0, H, depth});

    // Tip cap.
    boxes.push_back({-wb, H - cap_t, wb, H, depth});

    // Ribs: reuse the frame's member layout at subdivision 1.
    FingerDesign flat = design;
    flat.mount_angle = 0.0;
    flat.mirrored = false;
    const PlanarFrame frame = build_frame(flat, 1);
    // Rib elements connect the two walls; identify them by their span.
    for (const BeamSpec& el : frame.elements) {
        const Point2& a = frame.nodes[static_cast<std::size_t>(el.node_i)];
        const Point2& b = frame.nodes[static_cast<std::size_t>(el.node_j)];
        const bool crosses = (a.y < -1e-6 && b.y > 1e-6) || (a.y > 1e-6 && b.y < -1e-6);
        if (!crosses)
            continue;
        const double len = std::hypot(b.y - a.y, b.z - a.z);
        const double ang = std::atan2(b.z - a.z, b.y - a.y) - std::numbers::pi / 2.0;
        Box3 box{a.y - t / 2.0, a.z, a.y + t / 2.0, a.z + len, depth};
        box.angle = ang;
        box.pivot_y = a.y;
        box.pivot_z = a.z;
        boxes.push_back(box);
    }

    if (design.mirrored) {
        for (Box3& b : boxes) {
            const double ny0 = -b.y1, ny1 = -b.y0;
            b.y0 = ny0;
            b.y1 = ny1;
            b.pivot_y = -b.pivot_y;
            b.angle = -b.angle;
        }
    }
    return boxes;
}

std::uint32_t stl_triangle_count(const std::vector<Box3>& boxes) {
    return static_cast<std::uint32_t>(boxes.size()) * 12u;
}

void write_stl(std::ostream& os, const std::vector<Box3>& boxes) {
    std::string out;
    std::string header = "finray finger solid export";
    header.resize(80, '\0');
    out += header;
    put_le32(out, stl_triangle_count(boxes));
    for (const Box3& b : boxes) {
        if (b.y1 - b.y0 <= 0.0 || b.z1 - b.z0 <= 0.0 || b.depth <= 0.0)
            throw Error::config("degenerate geometry: box with non-positive extent");
        const auto c = box_corners(b);
        for (const auto& quad : kBoxQuads) {
            const int tri[2][3] = {{quad[0], quad[1], quad[2]}, {quad[0], quad[2], quad[3]}};
            for (const auto& t : tri) {
                const Vec3f n = tri_normal(c[static_cast<std::size_t>(t[0])],
                                           c[static_cast<std::size_t>(t[1])],
                                           c[static_cast<std::size_t>(t[2])]);
                put_vec(out, n);
                put_vec(out, c[static_cast<std::size_t>(t[0])]);
                put_vec(out, c[static_cast<std::size_t>(t[1])]);
                put_vec(out, c[static_cast<std::size_t>(t[2])]);
                out.push_back('\0');
                out.push_back('\0');
            }
        }
    }
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::string export_stl(const FingerDesign& design) {
    std::ostringstream os(std::ios::binary);
    write_stl(os, design_boxes(design));
    return os.str();
}

} // namespace finray
