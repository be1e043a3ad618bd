#ifndef FINRAY_CHARACTERIZE_HPP
#define FINRAY_CHARACTERIZE_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "finray/geometry.hpp"
#include "finray/solver.hpp"

namespace finray {

/// Fingertip translational stiffness in the mounted test frame (N/mm).
/// kyy/kzz are per-axis probe slopes with the orthogonal translation free;
/// kzy encodes the identified soft-axis direction so that the principal-axis
/// analysis of [[kyy, kzy], [kzy, kzz]] reproduces it.
struct StiffnessMatrix {
    double kxx = 2.9;  // out-of-plane, lumped; not resolvable by the planar model
    double kyy = 0.0;
    double kzz = 0.0;
    double kzy = 0.0;
    std::string frame_tag = "mounted-yz";

    void validate() const;  // positive diagonals, 2x2 block positive definite
};

struct PrincipalAxes {
    double angle_from_z_deg = 0.0;  // stiff principal axis, measured from z
    double stiff = 0.0;             // N/mm
    double soft = 0.0;              // N/mm
};

/// Eigen decomposition of the symmetric 2x2 (y,z) stiffness block.
PrincipalAxes principal_axis(const StiffnessMatrix& k);

struct IdentifySettings {
    // Rig probe amplitudes, reduced by amplitude_scale: the beam idealization
    // concentrates joint bending, so its elastic range is a few times smaller
    // than the printed finger's.
    std::vector<double> lateral_amplitudes = {2.0, 4.0, 6.0, 8.0, 10.0};  // mm
    std::vector<double> axial_amplitudes = {0.2, 0.4, 0.6, 0.8, 1.0};     // mm
    double amplitude_scale = 0.2;
    double kxx = 2.9;          // N/mm, lumped out-of-plane value
    int elems_per_member = 2;
};

/// Virtual replication of the stiffness rig: displacement probes along y and
/// z at +/- each amplitude, least-squares slopes, soft-axis drift coupling.
StiffnessMatrix identify_stiffness(const PlanarFrame& frame, const IdentifySettings& s = {});

struct ViscoSample {
    double displacement = 0.0;  // mm
    double velocity = 0.0;      // mm/s
    double force = 0.0;         // N
};

struct ViscoelasticFit {
    double k = 0.0;            // N/mm
    double b = 0.0;            // N s/mm
    double residual_rms = 0.0; // N

    void validate() const;
};

/// Ordinary least squares for F = k*displacement + b*velocity.
ViscoelasticFit fit_viscoelastic(std::span<const ViscoSample> samples);

enum class FailureMode { yield, buckling };
std::string to_string(FailureMode m);

struct StrengthReport {
    double max_force = 0.0;       // N, last stable tip reaction magnitude
    double max_deflection = 0.0;  // mm, last stable tip travel
    FailureMode failure_mode = FailureMode::yield;
};

struct StrengthSettings {
    double start_amplitude = 30.0;  // mm, first ramp target
    int steps = 20;                 // load increments per ramp
    int refine_bisections = 6;
    int max_extensions = 3;         // amplitude doublings when nothing fails
};

/// Ramps a prescribed tip displacement along `direction` until first yield or
/// buckling, then bisects the failure amplitude.
StrengthReport strength_sweep(const PlanarFrame& frame, Point2 direction,
                              const StrengthSettings& s = {});

struct Extrapolation {
    double value = 0.0;  // N/mm at the target angle
    double slope = 0.0;  // N/(mm deg)
};

/// Linear extrapolation through exactly two (angle, stiffness) points.
Extrapolation extrapolate_stiffness(double angle1_deg, double k1, double angle2_deg, double k2,
                                    double target_angle_deg);

/// One multiplicative effective-modulus scale per material, anchored to a
/// measured stiffness. Applied uniformly to every design of that material.
class Calibration {
public:
    /// Returns the scale that makes the anchor design reproduce measured_kyy.
    double calibrate(const FingerDesign& anchor, double measured_kyy,
                     const IdentifySettings& s = {});

    bool is_calibrated(const std::string& material_name) const;
    double scale_for(const std::string& material_name) const;  // 1.0 when absent
    Material apply(const Material& m) const;
    FingerDesign apply(const FingerDesign& d) const;

private:
    std::map<std::string, double> scales_;
};

} // namespace finray

#endif
