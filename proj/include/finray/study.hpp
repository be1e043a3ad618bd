#ifndef FINRAY_STUDY_HPP
#define FINRAY_STUDY_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finray/characterize.hpp"
#include "finray/geometry.hpp"
#include "finray/insertion.hpp"

namespace finray {

struct DesignSpec {
    std::string id;
    FingerDesign design;
};

struct ScenarioSpec {
    std::string id;
    InsertionScenario scenario;
    StrategyParams strategy;
    bool explicit_grip = false;  // grip given in the config instead of identified
};

struct CalibrationAnchor {
    std::string material = "PLA+";
    double infill_direction = 0.0;
    double infill_density = 0.10;
    double measured_kyy = 1.2;  // N/mm
};

/// Parsed study configuration: materials, design grid, solver settings,
/// scenarios, and output options. One JSON document, schema_version 1.
struct StudyConfig {
    int schema_version = 1;
    std::map<std::string, Material> materials;
    PrintParams print;
    Envelope envelope;
    GeometryOptions geometry;
    FingertipStyle fingertip = FingertipStyle::notched_contact_plane;
    double notch_width = 6.0;
    double mount_angle = 10.0;
    std::vector<DesignSpec> designs;  // expanded grid plus explicit designs
    std::optional<CalibrationAnchor> anchor;
    IdentifySettings identify;
    StrengthSettings strength;
    Point2 strength_direction{-1.0, 0.0};
    std::vector<ScenarioSpec> scenarios;
    double sweep_step = 0.5;  // mm, misalignment scan increment
    int jobs = 1;
    unsigned seed = 0;  // reserved; the pipeline is deterministic

    const DesignSpec& find_design(const std::string& id) const;
    const ScenarioSpec& find_scenario(const std::string& id) const;
    Material resolve_material(const std::string& name) const;
};

StudyConfig parse_config(const std::string& json_text);
StudyConfig load_config(const std::string& path);

/// One stiffness_report.csv row.
struct StiffnessRecord {
    std::string material;
    double infill_direction = 0.0;
    double infill_density = 0.0;
    std::string fingertip;
    double mount_angle = 0.0;
    double kyy = 0.0, kzz = 0.0, kzy = 0.0, kxx = 0.0;
    double ratio = 0.0;
    double rcc_angle_deg = 0.0;
    double max_force = 0.0;
    double max_deflection = 0.0;
    std::string failure_mode;
    std::string status;  // "ok" or "error: ..."

    bool operator==(const StiffnessRecord&) const = default;
};

/// One window_report.csv row.
struct WindowRecord {
    std::string material;
    double infill_direction = 0.0;
    double infill_density = 0.0;
    std::string fingertip;
    double mount_angle = 0.0;
    std::string axis;
    double min_offset = 0.0;
    double max_offset = 0.0;
    double window = 0.0;
    std::string limiting_outcome;  // "<low>/<high>"
    std::string status;

    bool operator==(const WindowRecord&) const = default;
};

/// Calibration shared by every study command.
Calibration study_calibration(const StudyConfig& cfg);

std::vector<StiffnessRecord> run_characterize(const StudyConfig& cfg, int jobs);
std::vector<WindowRecord> run_sweep(const StudyConfig& cfg, const std::string& scenario_id,
                                    Axis axis, double step, int jobs,
                                    const std::string& trace_dir);

/// Writes <id>.svg and <id>.stl for one design. Returns the two paths.
std::vector<std::string> run_design(const StudyConfig& cfg, const std::string& design_id,
                                    const std::string& out_dir);

/// Runs one scenario; writes trace.csv and trajectory.svg. Returns the paths.
std::vector<std::string> run_simulate(const StudyConfig& cfg, const std::string& scenario_id,
                                      const std::string& out_dir);

std::string stiffness_csv(const std::vector<StiffnessRecord>& records);
std::vector<StiffnessRecord> parse_stiffness_csv(const std::string& text);
std::string window_csv(const std::vector<WindowRecord>& records);
std::vector<WindowRecord> parse_window_csv(const std::string& text);

std::string trace_csv(const SearchTrace& trace);
std::string trace_svg(const InsertionScenario& scenario, const SearchTrace& trace);

/// Rounds to the report precision (1e-6) so CSV round-trips are exact.
double report_round(double v);

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

/// Runs fn(0..n-1) on up to `jobs` workers; rethrows the first failure.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

} // namespace finray

#endif
