#include "finray/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finray/error.hpp"

namespace finray {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Least-squares slope through the origin.
double lsq_slope(std::span<const double> x, std::span<const double> y) {
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (sxx <= 0.0)
        throw Error::config("slope fit needs nonzero probe amplitudes");
    return sxy / sxx;
}

struct ProbeSeries {
    std::vector<double> delta;      // prescribed displacement
    std::vector<double> force;      // reaction along the probe axis
    std::vector<double> transverse; // displacement along the free axis
};

ProbeSeries run_probes(const PlanarFrame& frame, std::span<const double> amplitudes,
                       double scale, bool lateral) {
    ProbeSeries out;
    SolverOptions opts;
    opts.monitor_buckling = false;
    double max_amp = 0.0;
    for (double base : amplitudes) {
        for (double sign : {1.0, -1.0}) {
            const double amp = sign * base * scale;
            LoadCase lc;
            if (lateral)
                lc.prescribed[frame.tip_node] = {amp, std::nullopt};
            else
                lc.prescribed[frame.tip_node] = {std::nullopt, amp};
            const SolveResult res = solve_linear(frame, lc, opts);
            const Point2 tip_disp = res.displacement(frame.tip_node);
            out.delta.push_back(amp);
            if (lateral) {
                out.force.push_back(res.tip_reaction.y);
                out.transverse.push_back(tip_disp.z);
            } else {
                out.force.push_back(res.tip_reaction.z);
                out.transverse.push_back(tip_disp.y);
            }
            if (std::abs(amp) > std::abs(max_amp))
                max_amp = amp;

            // Elastic-range guard at the largest amplitude of the series.
            if (base == amplitudes.back() && sign > 0.0) {
                const auto stresses = recover_stresses(frame, res);
                for (std::size_t e = 0; e < stresses.size(); ++e) {
                    if (stresses[e] >= frame.elements[e].material.yield_strength) {
                        throw Error::numeric(
                            "probe exceeded elastic range at " +
                            std::string(lateral ? "y" : "z") + " amplitude " +
                            std::to_string(amp) + " mm");
                    }
                }
                LoadCase base_case = lc;
                if (tangent_min_eigenvalue(frame, res, base_case) <= 0.0)
                    throw Error::numeric("probe exceeded elastic range (buckling) at " +
                                         std::string(lateral ? "y" : "z") + " amplitude " +
                                         std::to_string(amp) + " mm");
            }
        }
    }
    return out;
}

} // namespace

void StiffnessMatrix::validate() const {
    if (kxx <= 0.0 || kyy <= 0.0 || kzz <= 0.0)
        throw Error::numeric("stiffness matrix needs positive diagonal entries");
    if (kzy * kzy >= kyy * kzz)
        throw Error::numeric("stiffness matrix (y,z) block is not positive definite");
}

PrincipalAxes principal_axis(const StiffnessMatrix& k) {
    k.validate();
    const double mean = 0.5 * (k.kyy + k.kzz);
    const double diff = 0.5 * (k.kzz - k.kyy);
    const double radius = std::hypot(diff, k.kzy);
    PrincipalAxes out;
    out.stiff = mean + radius;
    out.soft = mean - radius;
    out.angle_from_z_deg = 0.5 * std::atan2(2.0 * k.kzy, k.kzz - k.kyy) * kRadToDeg;
    return out;
}

StiffnessMatrix identify_stiffness(const PlanarFrame& frame, const IdentifySettings& s) {
    if (s.lateral_amplitudes.empty() || s.axial_amplitudes.empty())
        throw Error::config("identification needs probe amplitudes on both axes");
    if (s.amplitude_scale <= 0.0)
        throw Error::config("amplitude scale must be positive");

    const ProbeSeries lat = run_probes(frame, s.lateral_amplitudes, s.amplitude_scale, true);
    const ProbeSeries ax = run_probes(frame, s.axial_amplitudes, s.amplitude_scale, false);

    StiffnessMatrix k;
    k.kxx = s.kxx;
    k.kyy = lsq_slope(lat.delta, lat.force);
    k.kzz = lsq_slope(ax.delta, ax.force);
    if (k.kyy <= 0.0 || k.kzz <= 0.0)
        throw Error::numeric("identification produced a non-positive stiffness");

    // Soft-axis direction: lateral drift per unit axial travel, mapped through
    // the identified compliances. kzy is chosen so the principal-axis analysis
    // of the stored matrix reproduces this angle exactly.
    const double drift = lsq_slope(ax.delta, ax.transverse);
    const double theta = std::atan(drift * k.kyy / k.kzz);
    k.kzy = 0.5 * (k.kzz - k.kyy) * std::tan(2.0 * theta);
    k.validate();
    return k;
}

void ViscoelasticFit::validate() const {
    if (k <= 0.0)
        throw Error::numeric("viscoelastic fit needs a positive stiffness");
    if (b < 0.0)
        throw Error::numeric("viscoelastic fit needs a non-negative damping");
}

ViscoelasticFit fit_viscoelastic(std::span<const ViscoSample> samples) {
    if (samples.size() < 3)
        throw Error::config("viscoelastic fit needs at least 3 samples");
    // Normal equations for [delta, delta_dot] -> F.
    double sdd = 0.0, sdv = 0.0, svv = 0.0, sdf = 0.0, svf = 0.0;
    for (const ViscoSample& s : samples) {
        sdd += s.displacement * s.displacement;
        sdv += s.displacement * s.velocity;
        svv += s.velocity * s.velocity;
        sdf += s.displacement * s.force;
        svf += s.velocity * s.force;
    }
    const double det = sdd * svv - sdv * sdv;
    const double scale = std::max(sdd, svv);
    if (scale <= 0.0 || det <= 1e-12 * scale * scale)
        throw Error::config("viscoelastic fit is rank-deficient: samples need at "
                            "least two distinct velocities and displacements");
    ViscoelasticFit fit;
    fit.k = (svv * sdf - sdv * svf) / det;
    fit.b = (sdd * svf - sdv * sdf) / det;
    double ss = 0.0;
    for (const ViscoSample& s : samples) {
        const double r = s.force - fit.k * s.displacement - fit.b * s.velocity;
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(samples.size()));
    return fit;
}

std::string to_string(FailureMode m) {
    return m == FailureMode::yield ? "yield" : "buckling";
}

namespace {

struct RampOutcome {
    SolveResult result;
    bool failed = false;
    FailureMode mode = FailureMode::yield;
};

RampOutcome ramp_to(const PlanarFrame& frame, Point2 direction, double amplitude, int steps) {
    // Prescribe only the driven components; the orthogonal axis stays free,
    // like the rig tool sliding on the contact plane.
    NodeConstraint c;
    if (std::abs(direction.y) > 1e-12)
        c.dy = direction.y * amplitude;
    if (std::abs(direction.z) > 1e-12)
        c.dz = direction.z * amplitude;
    LoadCase lc;
    lc.prescribed[frame.tip_node] = c;
    lc.steps = std::max(steps, 1);
    SolverOptions opts;
    RampOutcome out;
    out.result = solve_nonlinear(frame, lc, opts);
    switch (out.result.status) {
    case SolveStatus::converged:
        break;
    case SolveStatus::yielded:
        out.failed = true;
        out.mode = FailureMode::yield;
        break;
    case SolveStatus::buckled:
        out.failed = true;
        out.mode = FailureMode::buckling;
        break;
    case SolveStatus::diverged:
        throw Error::numeric("strength sweep diverged at step " +
                             std::to_string(out.result.failed_step) + " (residual " +
                             std::to_string(out.result.final_residual) + " N)");
    }
    return out;
}

} // namespace

StrengthReport strength_sweep(const PlanarFrame& frame, Point2 direction,
                              const StrengthSettings& s) {
    const double norm = std::hypot(direction.y, direction.z);
    if (norm <= 0.0)
        throw Error::config("strength sweep needs a nonzero direction");
    direction = {direction.y / norm, direction.z / norm};

    double amplitude = s.start_amplitude;
    RampOutcome ramp = ramp_to(frame, direction, amplitude, s.steps);
    for (int ext = 0; !ramp.failed && ext < s.max_extensions; ++ext) {
        amplitude *= 2.0;
        ramp = ramp_to(frame, direction, amplitude, s.steps);
    }
    if (!ramp.failed)
        throw Error::numeric("no component failure up to " + std::to_string(amplitude) +
                             " mm tip travel");

    // Failure happened between these two ramp targets.
    double hi = amplitude * static_cast<double>(ramp.result.failed_step) / s.steps;
    double lo = hi - amplitude / s.steps;
    FailureMode mode = ramp.mode;
    for (int i = 0; i < s.refine_bisections; ++i) {
        const double mid = 0.5 * (lo + hi);
        const int steps = std::max(4, static_cast<int>(std::lround(
                                           s.steps * mid / s.start_amplitude)));
        RampOutcome probe = ramp_to(frame, direction, mid, steps);
        if (probe.failed) {
            hi = mid * static_cast<double>(probe.result.failed_step) / steps;
            lo = std::max(lo, mid * static_cast<double>(probe.result.failed_step - 1) / steps);
            mode = probe.mode;
        } else {
            lo = mid;
        }
    }

    RampOutcome last = ramp_to(frame, direction, lo, s.steps);
    if (last.failed) {
        // The bisected amplitude grazes the limit; report the stable prefix.
        lo *= static_cast<double>(last.result.failed_step - 1) /
              static_cast<double>(s.steps);
        last = ramp_to(frame, direction, lo, s.steps);
    }
    const Point2 reaction = last.result.tip_reaction;
    StrengthReport report;
    report.max_force = std::hypot(reaction.y, reaction.z);
    report.max_deflection = lo;
    report.failure_mode = mode;
    if (report.max_force <= 0.0 || report.max_deflection <= 0.0)
        throw Error::numeric("strength sweep failed before any stable load step");
    return report;
}

Extrapolation extrapolate_stiffness(double angle1_deg, double k1, double angle2_deg, double k2,
                                    double target_angle_deg) {
    if (angle1_deg == angle2_deg)
        throw Error::config("stiffness extrapolation needs two distinct angles");
    Extrapolation out;
    out.slope = (k2 - k1) / (angle2_deg - angle1_deg);
    out.value = k1 + out.slope * (target_angle_deg - angle1_deg);
    return out;
}

double Calibration::calibrate(const FingerDesign& anchor, double measured_kyy,
                              const IdentifySettings& s) {
    if (measured_kyy <= 0.0)
        throw Error::config("calibration anchor stiffness must be positive");
    if (is_calibrated(anchor.material.name))
        throw Error::config("material '" + anchor.material.name + "' is already calibrated");
    const PlanarFrame frame = build_frame(anchor, s.elems_per_member);
    const StiffnessMatrix k = identify_stiffness(frame, s);
    if (k.kyy <= 0.0)
        throw Error::numeric("calibration anchor produced a non-positive stiffness");
    const double scale = measured_kyy / k.kyy;
    scales_[anchor.material.name] = scale;
    return scale;
}

bool Calibration::is_calibrated(const std::string& material_name) const {
    return scales_.count(material_name) > 0;
}

double Calibration::scale_for(const std::string& material_name) const {
    auto it = scales_.find(material_name);
    return it == scales_.end() ? 1.0 : it->second;
}

Material Calibration::apply(const Material& m) const {
    // The scale raises the effective modulus and strengths together, so the
    // strain at first yield is preserved while the rendered stiffness matches
    // the anchor measurement.
    const double s = scale_for(m.name);
    Material out = m;
    out.youngs_modulus *= s;
    out.yield_strength *= s;
    out.ultimate_strength *= s;
    return out;
}

FingerDesign Calibration::apply(const FingerDesign& d) const {
    FingerDesign out = d;
    out.material = apply(d.material);
    return out;
}

} // namespace finray
