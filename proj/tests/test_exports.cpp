#include <doctest.h>

#include <cstdint>
#include <sstream>
#include <string>

#include "finray/error.hpp"
#include "finray/exports.hpp"

using namespace finray;

namespace {

FingerDesign default_design() {
    FingerDesign d;
    d.material = builtin_material("PLA+");
    return d;
}

std::size_t count_substr(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::uint32_t stl_count_field(const std::string& bytes) {
    REQUIRE(bytes.size() >= 84);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(bytes[static_cast<std::size_t>(80 + i)]);
    return v;
}

// Independent facet count oracle: enumerate the faces of an axis-aligned box
// and fan-triangulate each quad.
int brute_force_box_triangles() {
    int faces = 0;
    for (int axis = 0; axis < 3; ++axis)
        for (int side = 0; side < 2; ++side)
            ++faces;
    const int triangles_per_quad = 4 - 2;  // fan triangulation of a quad
    return faces * triangles_per_quad;
}

} // namespace

TEST_CASE("svg has one polyline per element") {
    const FingerDesign d = default_design();
    const PlanarFrame f = build_frame(d, 2);
    const std::string svg = export_svg(f);
    CHECK(count_substr(svg, "<polyline") == f.elements.size());
}

TEST_CASE("zero deflection overlay duplicates the undeformed wireframe") {
    const FingerDesign d = default_design();
    const PlanarFrame f = build_frame(d, 2);
    const std::vector<Point2> zeros(f.nodes.size(), Point2{});
    const std::string svg = export_svg(f, &zeros, 10.0);
    CHECK(count_substr(svg, "<polyline") == 2 * f.elements.size());
    // Both groups must trace identical coordinates.
    const std::size_t first_group = svg.find("<g");
    const std::size_t second_group = svg.find("<g", first_group + 1);
    const std::string base = svg.substr(first_group, second_group - first_group);
    std::istringstream lines(base);
    std::string line;
    while (std::getline(lines, line)) {
        const std::size_t at = line.find("points=\"");
        if (at == std::string::npos)
            continue;
        const std::string points = line.substr(at, line.find('"', at + 8) - at);
        CHECK(count_substr(svg, points) == 2);
    }
}

TEST_CASE("svg bytes are identical across runs") {
    const FingerDesign d = default_design();
    const PlanarFrame f = build_frame(d, 2);
    CHECK(export_svg(f) == export_svg(f));
}

TEST_CASE("mismatched deflection length is rejected") {
    const FingerDesign d = default_design();
    const PlanarFrame f = build_frame(d, 2);
    const std::vector<Point2> wrong(f.nodes.size() + 1, Point2{});
    CHECK_THROWS_AS(export_svg(f, &wrong), Error);
}

TEST_CASE("stl facet count matches the payload arithmetic") {
    const FingerDesign d = default_design();
    const std::string bytes = export_stl(d);
    const std::uint32_t facets = stl_count_field(bytes);
    CHECK(facets == (bytes.size() - 84) / 50);
    CHECK((bytes.size() - 84) % 50 == 0);
    CHECK(facets > 0);
}

TEST_CASE("a unit square outline extruded to depth 1 is 12 triangles") {
    std::vector<Box3> boxes{{0.0, 0.0, 1.0, 1.0, 1.0}};
    CHECK(stl_triangle_count(boxes) == brute_force_box_triangles());
    std::ostringstream os(std::ios::binary);
    write_stl(os, boxes);
    const std::string bytes = os.str();
    CHECK(stl_count_field(bytes) == 12);
    CHECK(bytes.size() == 84 + 12 * 50);
}

TEST_CASE("mirrored design has the same triangle count") {
    FingerDesign d = default_design();
    d.infill_direction = 25.0;
    FingerDesign m = d;
    m.mirrored = true;
    CHECK(export_stl(d).size() == export_stl(m).size());
    CHECK(stl_triangle_count(design_boxes(d)) == stl_triangle_count(design_boxes(m)));
}

TEST_CASE("stl bytes are identical across runs") {
    const FingerDesign d = default_design();
    CHECK(export_stl(d) == export_stl(d));
}

TEST_CASE("degenerate boxes are rejected") {
    std::vector<Box3> bad{{0.0, 0.0, 0.0, 1.0, 1.0}};  // zero width
    std::ostringstream os(std::ios::binary);
    CHECK_THROWS_AS(write_stl(os, bad), Error);
}
