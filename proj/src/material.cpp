#include "finray/material.hpp"

#include "finray/error.hpp"

namespace finray {

void Material::validate() const {
    if (youngs_modulus <= 0.0)
        throw Error::config("material '" + name + "': Young's modulus must be positive");
    if (yield_strength <= 0.0 || yield_strength > ultimate_strength)
        throw Error::config("material '" + name + "': need 0 < yield <= ultimate strength");
    if (poisson_ratio < 0.0 || poisson_ratio >= 0.5)
        throw Error::config("material '" + name + "': Poisson ratio must be in [0, 0.5)");
    if (density <= 0.0)
        throw Error::config("material '" + name + "': density must be positive");
}

Material Material::scaled_modulus(double scale) const {
    Material m = *this;
    m.youngs_modulus *= scale;
    return m;
}

Material builtin_material(const std::string& name) {
    if (name == "PLA+") {
        Material m;
        m.name = "PLA+";
        m.youngs_modulus = 1900.0;
        m.yield_strength = 20.04;
        m.ultimate_strength = 20.9;
        m.poisson_ratio = 0.36;
        m.density = 1.14;
        return m;
    }
    if (name == "PETG") {
        // Datasheet gives only E, ultimate strength and density; the missing
        // entries are filled with documented assumptions (yield = 0.9*ultimate).
        Material m;
        m.name = "PETG";
        m.youngs_modulus = 2050.0;
        m.ultimate_strength = 50.0;
        m.yield_strength = 0.9 * 50.0;
        m.poisson_ratio = 0.37;
        m.density = 1.27;
        return m;
    }
    throw Error::unknown("unknown material '" + name + "' (supported: PLA+, PETG)");
}

void PrintParams::validate() const {
    if (line_width <= 0.0)
        throw Error::config("print: line width must be positive");
    if (wall_line_count < 1)
        throw Error::config("print: wall line count must be >= 1");
    if (layer_depth <= 0.0)
        throw Error::config("print: layer depth must be positive");
}

double rib_spacing(double density, const PrintParams& params) {
    params.validate();
    if (density <= 0.0 || density > 1.0)
        throw Error::config("infill density must be in (0, 1]");
    return params.line_width / density;
}

SectionProperties beam_section(const PrintParams& params) {
    params.validate();
    const double w = params.line_width;
    const double d = params.layer_depth;
    return {w * d, d * w * w * w / 12.0, w};
}

SectionProperties solid_section(double thickness, const PrintParams& params) {
    params.validate();
    if (thickness <= 0.0)
        throw Error::config("solid section thickness must be positive");
    const double d = params.layer_depth;
    return {thickness * d, d * thickness * thickness * thickness / 12.0, thickness};
}

} // namespace finray
