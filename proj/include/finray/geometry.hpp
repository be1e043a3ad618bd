#ifndef FINRAY_GEOMETRY_HPP
#define FINRAY_GEOMETRY_HPP

#include <optional>
#include <string>
#include <vector>

#include "finray/material.hpp"

namespace finray {

/// Planar point. y is the lateral (grip) direction, z runs along the finger
/// axis from the mount plane toward the tip.
struct Point2 {
    double y = 0.0;
    double z = 0.0;
};

enum class FingertipStyle {
    rounded,
    flat,
    notched_rounded,
    flat_angled,
    notched_contact_plane,
};

FingertipStyle fingertip_from_string(const std::string& s);
std::string to_string(FingertipStyle s);

/// Outer dimensions of the printed finger (mm).
struct Envelope {
    double height = 80.0;
    double base_width = 25.0;
    double depth = 15.0;
};

/// Shape details the published CAD does not pin down. Defaults are calibrated
/// against the measured stiffness table and overridable from the config file.
struct GeometryOptions {
    double base_height = 10.0;        // solid mount block, becomes the fixed supports
    double tip_cap_thickness = 1.4;   // solid tip block joining the walls
    double min_element_length = 0.2;
    double contact_standoff = 4.5;    // contact point offset in front of the grip-side wall
    double notch_setback = 4.0;       // contact plane below the tip for notched styles
    double rigid_offset_scale = 100.0; // modulus multiplier for the tip offset connector
};

struct FingerDesign {
    double infill_direction = 0.0;  // deg from the mount-parallel axis, 0..40
    double infill_density = 0.10;   // fraction of solid
    FingertipStyle fingertip = FingertipStyle::notched_contact_plane;
    double notch_width = 6.0;       // mm
    double mount_angle = 10.0;      // deg, finger tilt when mounted on the jaw
    bool mirrored = false;          // opposite jaw finger
    Material material;
    PrintParams print;
    Envelope envelope;
    GeometryOptions geometry;

    void validate() const;
};

struct BeamSpec {
    int node_i = -1;
    int node_j = -1;
    SectionProperties section;
    Material material;
};

/// Node/beam discretization of one finger, ready for the solver.
struct PlanarFrame {
    std::vector<Point2> nodes;
    std::vector<BeamSpec> elements;
    std::vector<int> supports;  // fully fixed node indices (mount block)
    int tip_node = -1;          // fingertip contact point

    double element_length(int e) const;
    void validate() const;
};

struct FingertipContact {
    double contact_plane_angle = 0.0; // deg
    double contact_half_width = 3.0;  // mm
    double friction_mu = 0.8;

    void validate() const;
};

/// Builds the rib-lattice beam frame for a design. Each wall span, rib and the
/// tip cap is subdivided into `elems_per_member` beam elements.
PlanarFrame build_frame(const FingerDesign& design, int elems_per_member);

FingertipContact fingertip_contact(const FingerDesign& design);

/// Number of ribs the layout rule yields for a design (before clipping).
int rib_candidate_count(const FingerDesign& design);

} // namespace finray

#endif
