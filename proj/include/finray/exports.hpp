#ifndef FINRAY_EXPORTS_HPP
#define FINRAY_EXPORTS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "finray/geometry.hpp"

namespace finray {

/// Wireframe SVG of a frame, optionally overlaying a deformed shape.
/// `deflection` holds one (dy, dz) pair per node; `deflection_scale` magnifies
/// the overlay. Output bytes are deterministic for identical inputs.
std::string export_svg(const PlanarFrame& frame,
                       const std::vector<Point2>* deflection = nullptr,
                       double deflection_scale = 1.0);

/// Axis-aligned box in print coordinates, one closed STL shell each.
struct Box3 {
    // Planar rectangle corners (min/max in the finger plane) extruded to depth.
    double y0, z0, y1, z1;
    double depth;
    double angle = 0.0;     // in-plane rotation of the rectangle, radians
    double pivot_y = 0.0;   // rotation pivot
    double pivot_z = 0.0;
};

/// Solid boxes of the printed finger: mount block, both walls, ribs, tip cap.
std::vector<Box3> design_boxes(const FingerDesign& design);

/// Binary little-endian STL: 80-byte header, triangle count, 50-byte facets.
void write_stl(std::ostream& os, const std::vector<Box3>& boxes);

/// Convenience: STL bytes for a design.
std::string export_stl(const FingerDesign& design);

/// Triangle count the boxes will serialize to.
std::uint32_t stl_triangle_count(const std::vector<Box3>& boxes);

} // namespace finray

#endif
