#include "finray/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "finray/error.hpp"
#include "finray/exports.hpp"
#include "finray/solver.hpp"

namespace finray {

namespace {

using nlohmann::json;

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j.at(key).is_number())
        throw Error::config(std::string("config field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::string text(const json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key))
        return fallback;
    return j.at(key).get<std::string>();
}

std::string design_id(const std::string& material, double direction, double density) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s-id%g-i%g", material.c_str(), direction,
                  density * 100.0);
    return buf;
}

Material parse_material(const json& j, const Material& base) {
    Material m = base;
    m.name = text(j, "name", base.name);
    m.youngs_modulus = num(j, "youngs_modulus_mpa", base.youngs_modulus);
    m.yield_strength = num(j, "yield_strength_mpa", base.yield_strength);
    m.ultimate_strength = num(j, "ultimate_strength_mpa", base.ultimate_strength);
    m.poisson_ratio = num(j, "poisson_ratio", base.poisson_ratio);
    m.density = num(j, "density_g_cm3", base.density);
    m.validate();
    return m;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", report_round(v));
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw Error::config("bad numeric field '" + s + "'");
        return v;
    } catch (const std::exception&) {
        throw Error::config("bad numeric field '" + s + "'");
    }
}

} // namespace

double report_round(double v) {
    return std::round(v * 1e6) / 1e6;
}

const DesignSpec& StudyConfig::find_design(const std::string& id) const {
    for (const DesignSpec& d : designs)
        if (d.id == id)
            return d;
    throw Error::unknown("unknown design id '" + id + "'");
}

const ScenarioSpec& StudyConfig::find_scenario(const std::string& id) const {
    for (const ScenarioSpec& s : scenarios)
        if (s.id == id)
            return s;
    throw Error::unknown("unknown scenario id '" + id + "'");
}

Material StudyConfig::resolve_material(const std::string& name) const {
    auto it = materials.find(name);
    if (it != materials.end())
        return it->second;
    return builtin_material(name);
}

StudyConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error::config(std::string("config is not valid JSON: ") + e.what());
    }
    StudyConfig cfg;
    cfg.schema_version = static_cast<int>(num(j, "schema_version", 1));
    if (cfg.schema_version != 1)
        throw Error::config("unsupported config schema_version " +
                            std::to_string(cfg.schema_version));

    if (j.contains("materials")) {
        for (const json& jm : j.at("materials")) {
            const std::string name = text(jm, "name", "");
            if (name.empty())
                throw Error::config("material override needs a name");
            Material base;
            try {
                base = builtin_material(name);
            } catch (const Error&) {
                base.name = name;
                base.youngs_modulus = 1.0;
                base.yield_strength = 1.0;
                base.ultimate_strength = 1.0;
                base.poisson_ratio = 0.3;
                base.density = 1.0;
            }
            cfg.materials[name] = parse_material(jm, base);
        }
    }

    if (j.contains("print")) {
        const json& jp = j.at("print");
        cfg.print.line_width = num(jp, "line_width_mm", cfg.print.line_width);
        cfg.print.wall_line_count =
            static_cast<int>(num(jp, "wall_line_count", cfg.print.wall_line_count));
        cfg.print.layer_depth = num(jp, "layer_depth_mm", cfg.print.layer_depth);
        cfg.print.validate();
    }
    if (j.contains("geometry")) {
        const json& jg = j.at("geometry");
        cfg.envelope.height = num(jg, "height_mm", cfg.envelope.height);
        cfg.envelope.base_width = num(jg, "base_width_mm", cfg.envelope.base_width);
        cfg.envelope.depth = num(jg, "depth_mm", cfg.envelope.depth);
        cfg.geometry.base_height = num(jg, "base_height_mm", cfg.geometry.base_height);
        cfg.geometry.tip_cap_thickness =
            num(jg, "tip_cap_thickness_mm", cfg.geometry.tip_cap_thickness);
        cfg.geometry.min_element_length =
            num(jg, "min_element_length_mm", cfg.geometry.min_element_length);
        cfg.geometry.contact_standoff =
            num(jg, "contact_standoff_mm", cfg.geometry.contact_standoff);
        cfg.geometry.notch_setback = num(jg, "notch_setback_mm", cfg.geometry.notch_setback);
        cfg.geometry.rigid_offset_scale =
            num(jg, "rigid_offset_scale", cfg.geometry.rigid_offset_scale);
    }
    cfg.fingertip = fingertip_from_string(text(j, "fingertip", "notched_contact_plane"));
    cfg.notch_width = num(j, "notch_width_mm", cfg.notch_width);
    cfg.mount_angle = num(j, "mount_angle_deg", cfg.mount_angle);

    auto make_design = [&](const std::string& material, double direction, double density,
                           FingertipStyle tip, double notch, double mount) {
        FingerDesign d;
        d.material = cfg.resolve_material(material);
        d.infill_direction = direction;
        d.infill_density = density;
        d.fingertip = tip;
        d.notch_width = notch;
        d.mount_angle = mount;
        d.print = cfg.print;
        d.envelope = cfg.envelope;
        d.geometry = cfg.geometry;
        d.validate();
        return d;
    };

    if (j.contains("grid")) {
        const json& jg = j.at("grid");
        std::vector<std::string> mats;
        if (jg.contains("materials"))
            for (const json& m : jg.at("materials"))
                mats.push_back(m.get<std::string>());
        std::vector<double> dirs, dens;
        if (jg.contains("infill_directions_deg"))
            for (const json& v : jg.at("infill_directions_deg"))
                dirs.push_back(v.get<double>());
        if (jg.contains("infill_densities"))
            for (const json& v : jg.at("infill_densities"))
                dens.push_back(v.get<double>());
        for (const std::string& m : mats) {
            for (double direction : dirs) {
                for (double density : dens) {
                    DesignSpec spec;
                    spec.id = design_id(m, direction, density);
                    spec.design = make_design(m, direction, density, cfg.fingertip,
                                              cfg.notch_width, cfg.mount_angle);
                    cfg.designs.push_back(spec);
                }
            }
        }
    }
    if (j.contains("designs")) {
        for (const json& jd : j.at("designs")) {
            DesignSpec spec;
            const std::string material = text(jd, "material", "PLA+");
            const double direction = num(jd, "infill_direction_deg", 0.0);
            const double density = num(jd, "infill_density", 0.10);
            spec.design = make_design(
                material, direction, density,
                fingertip_from_string(text(jd, "fingertip", to_string(cfg.fingertip))),
                num(jd, "notch_width_mm", cfg.notch_width),
                num(jd, "mount_angle_deg", cfg.mount_angle));
            spec.design.mirrored = jd.value("mirrored", false);
            spec.id = text(jd, "id", design_id(material, direction, density));
            cfg.designs.push_back(spec);
        }
    }
    for (std::size_t i = 0; i < cfg.designs.size(); ++i)
        for (std::size_t k = i + 1; k < cfg.designs.size(); ++k)
            if (cfg.designs[i].id == cfg.designs[k].id)
                throw Error::config("duplicate design id '" + cfg.designs[i].id + "'");

    if (j.contains("calibration")) {
        const json& jc = j.at("calibration");
        CalibrationAnchor a;
        a.material = text(jc, "material", a.material);
        a.infill_direction = num(jc, "infill_direction_deg", a.infill_direction);
        a.infill_density = num(jc, "infill_density", a.infill_density);
        a.measured_kyy = num(jc, "measured_kyy_n_mm", a.measured_kyy);
        if (a.measured_kyy <= 0.0)
            throw Error::config("calibration anchor stiffness must be positive");
        cfg.anchor = a;
    }

    cfg.identify.kxx = num(j, "kxx_n_mm", cfg.identify.kxx);
    if (j.contains("solver")) {
        const json& js = j.at("solver");
        cfg.identify.elems_per_member =
            static_cast<int>(num(js, "elems_per_member", cfg.identify.elems_per_member));
        cfg.identify.amplitude_scale =
            num(js, "probe_amplitude_scale", cfg.identify.amplitude_scale);
        cfg.strength.steps = static_cast<int>(num(js, "strength_steps", cfg.strength.steps));
        cfg.strength.start_amplitude =
            num(js, "strength_start_amplitude_mm", cfg.strength.start_amplitude);
        cfg.strength_direction.y = num(js, "strength_direction_y", cfg.strength_direction.y);
        cfg.strength_direction.z = num(js, "strength_direction_z", cfg.strength_direction.z);
    }

    if (j.contains("scenarios")) {
        for (const json& js : j.at("scenarios")) {
            ScenarioSpec spec;
            spec.id = text(js, "id", "scenario");
            InsertionScenario& sc = spec.scenario;
            if (js.contains("traits")) {
                const json& jt = js.at("traits");
                sc.traits.fit = fit_from_string(text(jt, "fit", "running"));
                sc.traits.exposed_after_insert =
                    num(jt, "exposed_after_insert_mm", sc.traits.exposed_after_insert);
                sc.traits.gland = gland_from_string(text(jt, "gland", "straight"));
                sc.traits.pin_height = num(jt, "pin_height_mm", sc.traits.pin_height);
                sc.traits.locking = locking_from_string(text(jt, "locking", "none"));
            }
            sc.clearance = num(js, "clearance_mm", default_clearance(sc.traits.fit));
            sc.plug_width = num(js, "plug_width_mm", sc.plug_width);
            sc.plug_height = num(js, "plug_height_mm", sc.plug_height);
            sc.socket_depth = num(js, "socket_depth_mm", sc.socket_depth);
            sc.friction_mu = num(js, "friction_mu", sc.friction_mu);
            sc.tilt = num(js, "tilt_deg", sc.tilt);
            sc.misalignment.y = num(js, "misalignment_y_mm", 0.0);
            sc.misalignment.z = num(js, "misalignment_z_mm", 0.0);
            sc.contact_stiffness = num(js, "contact_stiffness_n_mm", sc.contact_stiffness);
            sc.force_limit = num(js, "force_limit_n", sc.force_limit);
            sc.x_rotation_tolerance =
                num(js, "x_rotation_tolerance_mm", sc.x_rotation_tolerance);
            if (js.contains("grip")) {
                const json& jk = js.at("grip");
                sc.grip.kyy = num(jk, "kyy_n_mm", 1.2);
                sc.grip.kzz = num(jk, "kzz_n_mm", 30.0);
                sc.grip.kzy = num(jk, "kzy_n_mm", 0.0);
                sc.grip.kxx = num(jk, "kxx_n_mm", 2.9);
                spec.explicit_grip = true;
            }
            if (js.contains("grip_rotation")) {
                const json& jr = js.at("grip_rotation");
                sc.grip_rotation.play_deg = num(jr, "play_deg", sc.grip_rotation.play_deg);
                sc.grip_rotation.k_play = num(jr, "k_play_n_mm_deg", sc.grip_rotation.k_play);
                sc.grip_rotation.k_hard = num(jr, "k_hard_n_mm_deg", sc.grip_rotation.k_hard);
            }
            if (js.contains("strategy")) {
                const json& js2 = js.at("strategy");
                StrategyParams& st = spec.strategy;
                st.step = num(js2, "step_mm", st.step);
                st.approach_height = num(js2, "approach_height_mm", st.approach_height);
                st.first_contact_offset =
                    num(js2, "first_contact_offset_mm", st.first_contact_offset);
                st.slide_overshoot = num(js2, "slide_overshoot_mm", st.slide_overshoot);
                st.preload = num(js2, "preload_mm", st.preload);
                st.seat_overtravel = num(js2, "seat_overtravel_mm", st.seat_overtravel);
                st.untilt_depth = num(js2, "untilt_depth_mm", st.untilt_depth);
                st.stall_steps = static_cast<int>(num(js2, "stall_steps", st.stall_steps));
                st.approach_speed = num(js2, "approach_speed_mm_s", st.approach_speed);
            }
            spec.strategy.validate();
            cfg.scenarios.push_back(spec);
        }
    }

    cfg.sweep_step = num(j, "sweep_step_mm", cfg.sweep_step);
    cfg.jobs = static_cast<int>(num(j, "jobs", 1));
    cfg.seed = static_cast<unsigned>(num(j, "seed", 0));
    return cfg;
}

StudyConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

Calibration study_calibration(const StudyConfig& cfg) {
    Calibration cal;
    if (cfg.anchor) {
        FingerDesign anchor;
        anchor.material = cfg.resolve_material(cfg.anchor->material);
        anchor.infill_direction = cfg.anchor->infill_direction;
        anchor.infill_density = cfg.anchor->infill_density;
        anchor.fingertip = cfg.fingertip;
        anchor.notch_width = cfg.notch_width;
        anchor.mount_angle = cfg.mount_angle;
        anchor.print = cfg.print;
        anchor.envelope = cfg.envelope;
        anchor.geometry = cfg.geometry;
        cal.calibrate(anchor, cfg.anchor->measured_kyy, cfg.identify);
    }
    return cal;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool)
        t.join();
    for (const std::exception_ptr& e : errors)
        if (e)
            std::rethrow_exception(e);
}

namespace {

std::vector<DesignSpec> sorted_designs(const StudyConfig& cfg) {
    std::vector<DesignSpec> designs = cfg.designs;
    std::sort(designs.begin(), designs.end(), [](const DesignSpec& a, const DesignSpec& b) {
        const auto key = [](const DesignSpec& d) {
            return std::make_tuple(d.design.material.name, d.design.infill_direction,
                                   d.design.infill_density, d.id);
        };
        return key(a) < key(b);
    });
    return designs;
}

} // namespace

std::vector<StiffnessRecord> run_characterize(const StudyConfig& cfg, int jobs) {
    const Calibration cal = study_calibration(cfg);
    const std::vector<DesignSpec> designs = sorted_designs(cfg);
    std::vector<StiffnessRecord> records(designs.size());
    int failures = 0;

    parallel_for(static_cast<int>(designs.size()), jobs, [&](int i) {
        const DesignSpec& spec = designs[static_cast<std::size_t>(i)];
        StiffnessRecord r;
        r.material = spec.design.material.name;
        r.infill_direction = spec.design.infill_direction;
        r.infill_density = spec.design.infill_density;
        r.fingertip = to_string(spec.design.fingertip);
        r.mount_angle = spec.design.mount_angle;
        r.status = "ok";
        try {
            const FingerDesign design = cal.apply(spec.design);
            const PlanarFrame frame = build_frame(design, cfg.identify.elems_per_member);
            const StiffnessMatrix k = identify_stiffness(frame, cfg.identify);
            const PrincipalAxes axes = principal_axis(k);
            r.kyy = k.kyy;
            r.kzz = k.kzz;
            r.kzy = k.kzy;
            r.kxx = k.kxx;
            r.ratio = k.kzz / k.kyy;
            r.rcc_angle_deg = axes.angle_from_z_deg;
            const StrengthReport strength =
                strength_sweep(frame, cfg.strength_direction, cfg.strength);
            r.max_force = strength.max_force;
            r.max_deflection = strength.max_deflection;
            r.failure_mode = to_string(strength.failure_mode);
        } catch (const std::exception& e) {
            r.status = std::string("error: ") + e.what();
        }
        records[static_cast<std::size_t>(i)] = r;
    });

    for (const StiffnessRecord& r : records)
        if (r.status != "ok")
            ++failures;
    if (!records.empty() && failures == static_cast<int>(records.size()))
        throw Error::numeric("characterization failed for every design");
    return records;
}

std::vector<WindowRecord> run_sweep(const StudyConfig& cfg, const std::string& scenario_id,
                                    Axis axis, double step, int jobs,
                                    const std::string& trace_dir) {
    const ScenarioSpec& spec = cfg.find_scenario(scenario_id);
    const Calibration cal = study_calibration(cfg);
    const std::vector<DesignSpec> designs = sorted_designs(cfg);
    std::vector<WindowRecord> records(designs.size());

    if (!trace_dir.empty())
        std::filesystem::create_directories(trace_dir);

    parallel_for(static_cast<int>(designs.size()), jobs, [&](int i) {
        const DesignSpec& dspec = designs[static_cast<std::size_t>(i)];
        WindowRecord r;
        r.material = dspec.design.material.name;
        r.infill_direction = dspec.design.infill_direction;
        r.infill_density = dspec.design.infill_density;
        r.fingertip = to_string(dspec.design.fingertip);
        r.mount_angle = dspec.design.mount_angle;
        r.axis = to_string(axis);
        r.status = "ok";
        try {
            InsertionScenario scenario = spec.scenario;
            if (!spec.explicit_grip) {
                const FingerDesign design = cal.apply(dspec.design);
                const PlanarFrame frame = build_frame(design, cfg.identify.elems_per_member);
                scenario.grip = identify_stiffness(frame, cfg.identify);
            }
            const ToleranceWindow win = tolerance_window(scenario, axis, step, spec.strategy);
            r.min_offset = win.min_offset;
            r.max_offset = win.max_offset;
            r.window = win.window;
            r.limiting_outcome = to_string(win.limit_low) + "/" + to_string(win.limit_high);
            if (!trace_dir.empty()) {
                const SearchTrace zero = simulate_insert(scenario, spec.strategy);
                write_file(trace_dir + "/" + dspec.id + "-trajectory.svg",
                           trace_svg(scenario, zero));
            }
        } catch (const std::exception& e) {
            r.status = std::string("error: ") + e.what();
        }
        records[static_cast<std::size_t>(i)] = r;
    });

    int failures = 0;
    for (const WindowRecord& r : records)
        if (r.status != "ok")
            ++failures;
    if (!records.empty() && failures == static_cast<int>(records.size()))
        throw Error::numeric("sweep failed for every design");
    return records;
}

std::vector<std::string> run_design(const StudyConfig& cfg, const std::string& design_id,
                                    const std::string& out_dir) {
    const DesignSpec& spec = cfg.find_design(design_id);
    std::filesystem::create_directories(out_dir);
    const PlanarFrame frame = build_frame(spec.design, cfg.identify.elems_per_member);
    const std::string svg_path = out_dir + "/" + spec.id + ".svg";
    const std::string stl_path = out_dir + "/" + spec.id + ".stl";
    write_file(svg_path, export_svg(frame));
    write_file(stl_path, export_stl(spec.design));
    return {svg_path, stl_path};
}

std::vector<std::string> run_simulate(const StudyConfig& cfg, const std::string& scenario_id,
                                      const std::string& out_dir) {
    const ScenarioSpec& spec = cfg.find_scenario(scenario_id);
    std::filesystem::create_directories(out_dir);
    InsertionScenario scenario = spec.scenario;
    if (!spec.explicit_grip) {
        if (cfg.designs.empty())
            throw Error::config("scenario '" + scenario_id +
                                "' has no grip and the config has no designs");
        const Calibration cal = study_calibration(cfg);
        const FingerDesign design = cal.apply(cfg.designs.front().design);
        scenario.grip =
            identify_stiffness(build_frame(design, cfg.identify.elems_per_member), cfg.identify);
    }
    const SearchTrace trace = simulate_insert(scenario, spec.strategy);
    const std::string csv_path = out_dir + "/" + spec.id + "-trace.csv";
    const std::string svg_path = out_dir + "/" + spec.id + "-trajectory.svg";
    write_file(csv_path, trace_csv(trace));
    write_file(svg_path, trace_svg(scenario, trace));
    return {csv_path, svg_path};
}

std::string stiffness_csv(const std::vector<StiffnessRecord>& records) {
    std::ostringstream os;
    os << "material,infill_direction_deg,infill_density,fingertip,mount_angle_deg,"
          "kyy_n_mm,kzz_n_mm,kzy_n_mm,kxx_n_mm,ratio_zz_yy,rcc_angle_deg,"
          "max_force_n,max_deflection_mm,failure_mode,status\n";
    for (const StiffnessRecord& r : records) {
        os << r.material << ',' << fmt6(r.infill_direction) << ',' << fmt6(r.infill_density)
           << ',' << r.fingertip << ',' << fmt6(r.mount_angle) << ',' << fmt6(r.kyy) << ','
           << fmt6(r.kzz) << ',' << fmt6(r.kzy) << ',' << fmt6(r.kxx) << ',' << fmt6(r.ratio)
           << ',' << fmt6(r.rcc_angle_deg) << ',' << fmt6(r.max_force) << ','
           << fmt6(r.max_deflection) << ',' << r.failure_mode << ',' << r.status << '\n';
    }
    return os.str();
}

std::vector<StiffnessRecord> parse_stiffness_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line))
        throw Error::config("stiffness csv is empty");
    std::vector<StiffnessRecord> out;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 15)
            throw Error::config("stiffness csv row has " + std::to_string(f.size()) +
                                " fields, expected 15");
        StiffnessRecord r;
        r.material = f[0];
        r.infill_direction = parse_num(f[1]);
        r.infill_density = parse_num(f[2]);
        r.fingertip = f[3];
        r.mount_angle = parse_num(f[4]);
        r.kyy = parse_num(f[5]);
        r.kzz = parse_num(f[6]);
        r.kzy = parse_num(f[7]);
        r.kxx = parse_num(f[8]);
        r.ratio = parse_num(f[9]);
        r.rcc_angle_deg = parse_num(f[10]);
        r.max_force = parse_num(f[11]);
        r.max_deflection = parse_num(f[12]);
        r.failure_mode = f[13];
        r.status = f[14];
        out.push_back(r);
    }
    return out;
}

std::string window_csv(const std::vector<WindowRecord>& records) {
    std::ostringstream os;
    os << "material,infill_direction_deg,infill_density,fingertip,mount_angle_deg,axis,"
          "min_offset_mm,max_offset_mm,window_mm,limiting_outcome,status\n";
    for (const WindowRecord& r : records) {
        os << r.material << ',' << fmt6(r.infill_direction) << ',' << fmt6(r.infill_density)
           << ',' << r.fingertip << ',' << fmt6(r.mount_angle) << ',' << r.axis << ','
           << fmt6(r.min_offset) << ',' << fmt6(r.max_offset) << ',' << fmt6(r.window) << ','
           << r.limiting_outcome << ',' << r.status << '\n';
    }
    return os.str();
}

std::vector<WindowRecord> parse_window_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line))
        throw Error::config("window csv is empty");
    std::vector<WindowRecord> out;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 11)
            throw Error::config("window csv row has " + std::to_string(f.size()) +
                                " fields, expected 11");
        WindowRecord r;
        r.material = f[0];
        r.infill_direction = parse_num(f[1]);
        r.infill_density = parse_num(f[2]);
        r.fingertip = f[3];
        r.mount_angle = parse_num(f[4]);
        r.axis = f[5];
        r.min_offset = parse_num(f[6]);
        r.max_offset = parse_num(f[7]);
        r.window = parse_num(f[8]);
        r.limiting_outcome = f[9];
        r.status = f[10];
        out.push_back(r);
    }
    return out;
}

std::string trace_csv(const SearchTrace& trace) {
    std::ostringstream os;
    os << "step,phase,cmd_y_mm,cmd_z_mm,cmd_tilt_deg,plug_y_mm,plug_z_mm,plug_tilt_deg,"
          "contact_fx_n,contact_fy_n,contact_fz_n,depth_mm\n";
    constexpr double kRadToDeg = 57.29577951308232;
    for (const TraceSample& s : trace.samples) {
        os << s.step << ',' << to_string(s.phase) << ',' << fmt6(s.command.y) << ','
           << fmt6(s.command.z) << ',' << fmt6(s.command.theta * kRadToDeg) << ','
           << fmt6(s.plug.y) << ',' << fmt6(s.plug.z) << ',' << fmt6(s.plug.theta * kRadToDeg)
           << ',' << fmt6(s.contact_fx) << ',' << fmt6(s.contact_fy) << ','
           << fmt6(s.contact_fz) << ',' << fmt6(s.depth) << '\n';
    }
    os << "# outcome," << to_string(trace.outcome) << ",insert_depth_mm,"
       << fmt6(trace.insert_depth) << ",max_contact_force_n," << fmt6(trace.max_contact_force)
       << '\n';
    return os.str();
}

std::string trace_svg(const InsertionScenario& scenario, const SearchTrace& trace) {
    const double a = (scenario.plug_width + scenario.clearance) / 2.0;
    const double d = scenario.socket_depth;
    double y_min = -a - 25.0, y_max = a + 25.0, z_min = -d - 5.0, z_max = 30.0;
    for (const TraceSample& s : trace.samples) {
        y_min = std::min(y_min, s.plug.y - scenario.plug_width);
        y_max = std::max(y_max, s.plug.y + scenario.plug_width);
        z_max = std::max(z_max, s.plug.z + scenario.plug_height + 5.0);
    }
    auto fx = [&](double y) { return y - y_min; };
    auto fy = [&](double z) { return z_max - z; };
    char buf[160];
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf), "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.3f %.3f\">\n",
                  y_max - y_min, z_max - z_min);
    os << buf;
    // Socket cross-section.
    std::snprintf(buf, sizeof(buf),
                  "<path d=\"M %.3f %.3f L %.3f %.3f L %.3f %.3f L %.3f %.3f L %.3f %.3f L %.3f %.3f\" "
                  "stroke=\"#222222\" stroke-width=\"0.5\" fill=\"none\"/>\n",
                  fx(y_min + 2.0), fy(0.0), fx(-a), fy(0.0), fx(-a), fy(-d), fx(a), fy(-d),
                  fx(a), fy(0.0), fx(y_max - 2.0), fy(0.0));
    os << buf;
    // Plug bottom-center path.
    os << "<polyline fill=\"none\" stroke=\"#cc3311\" stroke-width=\"0.4\" points=\"";
    for (const TraceSample& s : trace.samples) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", fx(s.plug.y), fy(s.plug.z));
        os << buf;
    }
    os << "\"/>\n";
    // Final plug outline.
    if (!trace.samples.empty()) {
        const PlugPose& q = trace.samples.back().plug;
        const double w2 = scenario.plug_width / 2.0;
        const double h = scenario.plug_height;
        const double c = std::cos(q.theta), s = std::sin(q.theta);
        auto corner = [&](double ly, double lz) {
            const double wy = q.y + c * ly - s * lz;
            const double wz = q.z + s * ly + c * lz;
            std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", fx(wy), fy(wz));
            os << buf;
        };
        os << "<polygon fill=\"none\" stroke=\"#4477aa\" stroke-width=\"0.4\" points=\"";
        corner(-w2, 0.0);
        corner(w2, 0.0);
        corner(w2, h);
        corner(-w2, h);
        os << "\"/>\n";
    }
    os << "<text x=\"2\" y=\"8\" font-size=\"4\">" << to_string(trace.outcome) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error::config("cannot open '" + path + "' for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os)
        throw Error::config("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error::config("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace finray
