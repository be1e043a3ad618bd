#ifndef FINRAY_MATERIAL_HPP
#define FINRAY_MATERIAL_HPP

#include <string>

namespace finray {

/// Filament material. Units: MPa for moduli/strengths, g/cm^3 for density.
struct Material {
    std::string name;
    double youngs_modulus = 0.0;   // MPa
    double yield_strength = 0.0;   // MPa
    double ultimate_strength = 0.0; // MPa
    double poisson_ratio = 0.0;
    double density = 0.0;          // g/cm^3

    void validate() const;

    /// Copy with the elastic modulus multiplied by `scale` (stiffness calibration).
    Material scaled_modulus(double scale) const;
};

/// Returns the tabulated profile for a supported filament ("PLA+" or "PETG").
Material builtin_material(const std::string& name);

/// Slicer-style print settings that determine beam cross sections.
struct PrintParams {
    double line_width = 0.4;    // mm, one extruded line
    int wall_line_count = 1;
    double layer_depth = 15.0;  // mm, out-of-plane extrusion depth of the planar model

    void validate() const;
};

/// Rectangular beam cross section of one extruded line.
struct SectionProperties {
    double area = 0.0;          // mm^2
    double second_moment = 0.0; // mm^4, in-plane bending
    double thickness = 0.0;     // mm, in-plane width (stress fiber at thickness/2)
};

/// Rib pitch for a lines-style infill: spacing = line_width / density.
double rib_spacing(double density, const PrintParams& params);

/// Section of a single printed line: area = w*d, I = d*w^3/12.
SectionProperties beam_section(const PrintParams& params);

/// Section of a solid printed block of in-plane thickness t and the print depth.
SectionProperties solid_section(double thickness, const PrintParams& params);

} // namespace finray

#endif
