// finray CLI: design, characterize, fit-visco, simulate, sweep.
// Thin argument layer over the C API; exit codes 0 ok, 1 usage/config,
// 2 unknown entity, 3 numerical failure.

#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "finray/finray_c.h"

namespace {

struct StudyDeleter {
    void operator()(fr_study* s) const { fr_study_free(s); }
};
using StudyPtr = std::unique_ptr<fr_study, StudyDeleter>;

int report(fr_status status, bool verbose, const char* action) {
    if (status == FR_OK) {
        if (verbose)
            std::fprintf(stderr, "finray: %s done\n", action);
        return 0;
    }
    std::fprintf(stderr, "finray: %s failed: %s\n", action, fr_last_error());
    return static_cast<int>(status);
}

StudyPtr load_study(const std::string& config_path, int* exit_code) {
    fr_study* raw = nullptr;
    const fr_status st = fr_study_load(config_path.c_str(), &raw);
    if (st != FR_OK) {
        std::fprintf(stderr, "finray: cannot load config '%s': %s\n", config_path.c_str(),
                     fr_last_error());
        *exit_code = static_cast<int>(st);
        return nullptr;
    }
    return StudyPtr(raw);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finray finger design and insertion analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON study configuration")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for grid runs");
    app.add_flag("--verbose", verbose, "progress output on stderr");

    auto* cmd_design = app.add_subcommand("design", "write frame SVG and solid STL for a design");
    std::string design_id;
    cmd_design->add_option("--id", design_id, "design id from the config")->required();

    auto* cmd_characterize =
        app.add_subcommand("characterize", "stiffness and strength report over the design grid");

    auto* cmd_fit = app.add_subcommand("fit-visco", "least-squares viscoelastic fit");
    std::string samples_path;
    cmd_fit->add_option("--samples", samples_path,
                        "CSV of displacement_mm,velocity_mm_s,force_n")
        ->required();

    auto* cmd_simulate = app.add_subcommand("simulate", "run one insertion scenario");
    std::string scenario_id;
    cmd_simulate->add_option("--scenario", scenario_id, "scenario id from the config")
        ->required();

    auto* cmd_sweep = app.add_subcommand("sweep", "misalignment tolerance windows over the grid");
    std::string sweep_scenario;
    std::string axis = "y";
    double step = 0.0;
    cmd_sweep->add_option("--scenario", sweep_scenario, "scenario id from the config")
        ->required();
    cmd_sweep->add_option("--axis", axis, "scan axis: x or y");
    cmd_sweep->add_option("--step", step, "scan step in mm (default from config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    int exit_code = 0;
    StudyPtr study = load_study(config_path, &exit_code);
    if (!study)
        return exit_code;

    if (cmd_design->parsed())
        return report(fr_study_design(study.get(), design_id.c_str(), out_dir.c_str()), verbose,
                      "design");
    if (cmd_characterize->parsed())
        return report(fr_study_characterize(study.get(), out_dir.c_str(), jobs), verbose,
                      "characterize");
    if (cmd_fit->parsed())
        return report(fr_study_fit_visco(study.get(), samples_path.c_str(), out_dir.c_str()),
                      verbose, "fit-visco");
    if (cmd_simulate->parsed())
        return report(fr_study_simulate(study.get(), scenario_id.c_str(), out_dir.c_str()),
                      verbose, "simulate");
    if (cmd_sweep->parsed())
        return report(fr_study_sweep(study.get(), sweep_scenario.c_str(), axis.c_str(), step,
                                     out_dir.c_str(), jobs),
                      verbose, "sweep");
    return 1;
}
