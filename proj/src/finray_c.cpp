#include "finray/finray_c.h"

#include <cctype>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "finray/characterize.hpp"
#include "finray/error.hpp"
#include "finray/exports.hpp"
#include "finray/geometry.hpp"
#include "finray/insertion.hpp"
#include "finray/solver.hpp"
#include "finray/study.hpp"

namespace {

thread_local std::string g_last_error;

fr_status fail(fr_status code, const std::string& what) {
    g_last_error = what;
    return code;
}

template <typename Fn>
fr_status guarded(Fn&& fn) {
    try {
        fn();
        return FR_OK;
    } catch (const finray::Error& e) {
        return fail(static_cast<fr_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::exception& e) {
        return fail(FR_ERR_CONFIG, e.what());
    }
}

} // namespace

struct fr_material {
    finray::Material m;
};

struct fr_design {
    finray::FingerDesign d;
};

struct fr_frame {
    finray::PlanarFrame f;
};

struct fr_study {
    finray::StudyConfig cfg;
};

extern "C" {

const char* fr_last_error(void) {
    return g_last_error.c_str();
}

int fr_version_major(void) {
    return 1;
}

int fr_version_minor(void) {
    return 0;
}

fr_status fr_material_builtin(const char* name, fr_material** out) {
    if (!name || !out)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new fr_material{finray::builtin_material(name)}; });
}

fr_status fr_material_get(const fr_material* m, const char* property, double* out) {
    if (!m || !property || !out)
        return fail(FR_ERR_CONFIG, "null argument");
    const std::string key = property;
    if (key == "youngs_modulus_mpa")
        *out = m->m.youngs_modulus;
    else if (key == "yield_strength_mpa")
        *out = m->m.yield_strength;
    else if (key == "ultimate_strength_mpa")
        *out = m->m.ultimate_strength;
    else if (key == "poisson_ratio")
        *out = m->m.poisson_ratio;
    else if (key == "density_g_cm3")
        *out = m->m.density;
    else
        return fail(FR_ERR_UNKNOWN, "unknown material property '" + key + "'");
    return FR_OK;
}

void fr_material_free(fr_material* m) {
    delete m;
}

fr_status fr_rib_spacing(double density, double line_width_mm, double* out_mm) {
    if (!out_mm)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        finray::PrintParams p;
        p.line_width = line_width_mm;
        *out_mm = finray::rib_spacing(density, p);
    });
}

fr_status fr_design_create(fr_design** out) {
    if (!out)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        auto* d = new fr_design;
        d->d.material = finray::builtin_material("PLA+");
        *out = d;
    });
}

fr_status fr_design_set_material(fr_design* d, const fr_material* m) {
    if (!d || !m)
        return fail(FR_ERR_CONFIG, "null argument");
    d->d.material = m->m;
    return FR_OK;
}

fr_status fr_design_set(fr_design* d, const char* key, double value) {
    if (!d || !key)
        return fail(FR_ERR_CONFIG, "null argument");
    const std::string k = key;
    if (k == "infill_direction_deg")
        d->d.infill_direction = value;
    else if (k == "infill_density")
        d->d.infill_density = value;
    else if (k == "notch_width_mm")
        d->d.notch_width = value;
    else if (k == "mount_angle_deg")
        d->d.mount_angle = value;
    else if (k == "envelope_height_mm")
        d->d.envelope.height = value;
    else if (k == "envelope_base_width_mm")
        d->d.envelope.base_width = value;
    else if (k == "envelope_depth_mm")
        d->d.envelope.depth = value;
    else if (k == "line_width_mm")
        d->d.print.line_width = value;
    else if (k == "layer_depth_mm")
        d->d.print.layer_depth = value;
    else
        return fail(FR_ERR_UNKNOWN, "unknown design key '" + k + "'");
    return FR_OK;
}

fr_status fr_design_set_fingertip(fr_design* d, const char* style) {
    if (!d || !style)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { d->d.fingertip = finray::fingertip_from_string(style); });
}

void fr_design_free(fr_design* d) {
    delete d;
}

fr_status fr_design_export_stl(const fr_design* d, const char* path) {
    if (!d || !path)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { finray::write_file(path, finray::export_stl(d->d)); });
}

fr_status fr_frame_build(const fr_design* d, int elems_per_member, fr_frame** out) {
    if (!d || !out)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new fr_frame{finray::build_frame(d->d, elems_per_member)}; });
}

int fr_frame_node_count(const fr_frame* f) {
    return f ? static_cast<int>(f->f.nodes.size()) : 0;
}

int fr_frame_element_count(const fr_frame* f) {
    return f ? static_cast<int>(f->f.elements.size()) : 0;
}

int fr_frame_tip_node(const fr_frame* f) {
    return f ? f->f.tip_node : -1;
}

fr_status fr_frame_export_svg(const fr_frame* f, const char* path) {
    if (!f || !path)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { finray::write_file(path, finray::export_svg(f->f)); });
}

void fr_frame_free(fr_frame* f) {
    delete f;
}

fr_status fr_identify_stiffness(const fr_frame* f, double amplitude_scale, fr_stiffness* out) {
    if (!f || !out)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        finray::IdentifySettings s;
        if (amplitude_scale > 0.0)
            s.amplitude_scale = amplitude_scale;
        const finray::StiffnessMatrix k = finray::identify_stiffness(f->f, s);
        out->kxx = k.kxx;
        out->kyy = k.kyy;
        out->kzz = k.kzz;
        out->kzy = k.kzy;
    });
}

fr_status fr_principal_axis(const fr_stiffness* k, double* angle_from_z_deg, double* stiff_n_mm,
                            double* soft_n_mm) {
    if (!k)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        finray::StiffnessMatrix sm;
        sm.kxx = k->kxx;
        sm.kyy = k->kyy;
        sm.kzz = k->kzz;
        sm.kzy = k->kzy;
        const finray::PrincipalAxes a = finray::principal_axis(sm);
        if (angle_from_z_deg)
            *angle_from_z_deg = a.angle_from_z_deg;
        if (stiff_n_mm)
            *stiff_n_mm = a.stiff;
        if (soft_n_mm)
            *soft_n_mm = a.soft;
    });
}

fr_status fr_extrapolate_stiffness(double angle1_deg, double k1, double angle2_deg, double k2,
                                   double target_angle_deg, double* value, double* slope) {
    return guarded([&] {
        const finray::Extrapolation e =
            finray::extrapolate_stiffness(angle1_deg, k1, angle2_deg, k2, target_angle_deg);
        if (value)
            *value = e.value;
        if (slope)
            *slope = e.slope;
    });
}

fr_status fr_fit_viscoelastic(const double* displacement_mm, const double* velocity_mm_s,
                              const double* force_n, size_t count, double* k_n_mm,
                              double* b_ns_mm, double* residual_rms_n) {
    if (!displacement_mm || !velocity_mm_s || !force_n)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        std::vector<finray::ViscoSample> samples(count);
        for (size_t i = 0; i < count; ++i)
            samples[i] = {displacement_mm[i], velocity_mm_s[i], force_n[i]};
        const finray::ViscoelasticFit fit = finray::fit_viscoelastic(samples);
        if (k_n_mm)
            *k_n_mm = fit.k;
        if (b_ns_mm)
            *b_ns_mm = fit.b;
        if (residual_rms_n)
            *residual_rms_n = fit.residual_rms;
    });
}

double fr_viscous_force(double b_ns_mm, double speed_mm_s) {
    return b_ns_mm * speed_mm_s;
}

fr_status fr_strength_sweep(const fr_frame* f, double dir_y, double dir_z, double* max_force_n,
                            double* max_deflection_mm, char* mode_buf, size_t mode_buf_len) {
    if (!f)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        const finray::StrengthReport r = finray::strength_sweep(f->f, {dir_y, dir_z});
        if (max_force_n)
            *max_force_n = r.max_force;
        if (max_deflection_mm)
            *max_deflection_mm = r.max_deflection;
        if (mode_buf && mode_buf_len > 0) {
            const std::string mode = finray::to_string(r.failure_mode);
            std::strncpy(mode_buf, mode.c_str(), mode_buf_len - 1);
            mode_buf[mode_buf_len - 1] = '\0';
        }
    });
}

fr_status fr_study_load(const char* config_path, fr_study** out) {
    if (!config_path || !out)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new fr_study{finray::load_config(config_path)}; });
}

fr_status fr_study_load_json(const char* json_text, fr_study** out) {
    if (!json_text || !out)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new fr_study{finray::parse_config(json_text)}; });
}

fr_status fr_study_design(fr_study* s, const char* design_id, const char* out_dir) {
    if (!s || !design_id || !out_dir)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { finray::run_design(s->cfg, design_id, out_dir); });
}

fr_status fr_study_characterize(fr_study* s, const char* out_dir, int jobs) {
    if (!s || !out_dir)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto records = finray::run_characterize(s->cfg, jobs > 0 ? jobs : s->cfg.jobs);
        std::filesystem::create_directories(out_dir);
        finray::write_file(std::string(out_dir) + "/stiffness_report.csv",
                           finray::stiffness_csv(records));
    });
}

fr_status fr_study_sweep(fr_study* s, const char* scenario_id, const char* axis, double step_mm,
                         const char* out_dir, int jobs) {
    if (!s || !scenario_id || !axis || !out_dir)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        finray::Axis ax;
        const std::string a = axis;
        if (a == "x")
            ax = finray::Axis::x;
        else if (a == "y")
            ax = finray::Axis::y;
        else
            throw finray::Error::config("axis must be 'x' or 'y'");
        const double step = step_mm > 0.0 ? step_mm : s->cfg.sweep_step;
        const auto records = finray::run_sweep(s->cfg, scenario_id, ax, step,
                                               jobs > 0 ? jobs : s->cfg.jobs, out_dir);
        std::filesystem::create_directories(out_dir);
        finray::write_file(std::string(out_dir) + "/window_report.csv",
                           finray::window_csv(records));
    });
}

fr_status fr_study_simulate(fr_study* s, const char* scenario_id, const char* out_dir) {
    if (!s || !scenario_id || !out_dir)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] { finray::run_simulate(s->cfg, scenario_id, out_dir); });
}

fr_status fr_study_fit_visco(fr_study* s, const char* samples_csv_path, const char* out_dir) {
    if (!s || !samples_csv_path || !out_dir)
        return fail(FR_ERR_CONFIG, "null argument");
    return guarded([&] {
        const std::string csv = finray::read_file(samples_csv_path);
        std::istringstream is(csv);
        std::string line;
        std::vector<finray::ViscoSample> samples;
        while (std::getline(is, line)) {
            if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0])))
                continue;
            finray::ViscoSample v;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &v.displacement, &v.velocity,
                            &v.force) != 3)
                throw finray::Error::config("bad visco sample line: " + line);
            samples.push_back(v);
        }
        const finray::ViscoelasticFit fit = finray::fit_viscoelastic(samples);
        std::ostringstream os;
        os << "k_n_mm,b_ns_mm,residual_rms_n\n"
           << finray::report_round(fit.k) << ',' << finray::report_round(fit.b) << ','
           << finray::report_round(fit.residual_rms) << '\n';
        std::filesystem::create_directories(out_dir);
        finray::write_file(std::string(out_dir) + "/visco_fit.csv", os.str());
    });
}

void fr_study_free(fr_study* s) {
    delete s;
}

} // extern "C"
