#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const char* kConfig = R"json({
  "schema_version": 1,
  "calibration": {"material": "PLA+", "measured_kyy_n_mm": 1.2},
  "grid": {"materials": ["PLA+"], "infill_directions_deg": [0],
           "infill_densities": [0.10, 0.20]},
  "scenarios": [{"id": "s1",
     "grip": {"kyy_n_mm": 1.2, "kzz_n_mm": 30.0, "kzy_n_mm": 5.0}}]
})json";

std::string cli_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("finray_cli_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FINRAY_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WEXITSTATUS(raw);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("cli characterize runs end to end with deterministic output") {
    const std::string dir = cli_dir("char");
    const std::string config = dir + "/study.json";
    std::ofstream(config) << kConfig;

    CHECK(run_cli("--config " + config + " --out " + dir + "/a characterize") == 0);
    CHECK(run_cli("--config " + config + " --out " + dir + "/b --jobs 2 characterize") == 0);
    const std::string a = slurp(dir + "/a/stiffness_report.csv");
    const std::string b = slurp(dir + "/b/stiffness_report.csv");
    CHECK(!a.empty());
    CHECK(a == b);
}

TEST_CASE("cli design writes files and reports unknown ids") {
    const std::string dir = cli_dir("design");
    const std::string config = dir + "/study.json";
    std::ofstream(config) << kConfig;

    CHECK(run_cli("--config " + config + " --out " + dir + " design --id PLA+-id0-i10") == 0);
    CHECK(std::filesystem::exists(dir + "/PLA+-id0-i10.svg"));
    CHECK(std::filesystem::exists(dir + "/PLA+-id0-i10.stl"));
    CHECK(run_cli("--config " + config + " --out " + dir + " design --id nope") == 2);
}

TEST_CASE("cli exit codes for configuration problems") {
    const std::string dir = cli_dir("errors");
    CHECK(run_cli("--config " + dir + "/missing.json characterize") == 1);

    const std::string bad = dir + "/bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("--config " + bad + " characterize") == 1);

    CHECK(run_cli("characterize") == 1);  // --config is required
}

TEST_CASE("cli sweep and simulate") {
    const std::string dir = cli_dir("sweep");
    const std::string config = dir + "/study.json";
    std::ofstream(config) << kConfig;

    CHECK(run_cli("--config " + config + " --out " + dir + "/sw --jobs 2 sweep --scenario s1 "
                  "--axis y --step 1.0") == 0);
    CHECK(std::filesystem::exists(dir + "/sw/window_report.csv"));
    CHECK(run_cli("--config " + config + " --out " + dir + "/sw sweep --scenario nope") == 2);

    CHECK(run_cli("--config " + config + " --out " + dir + "/sim simulate --scenario s1") == 0);
    CHECK(std::filesystem::exists(dir + "/sim/s1-trace.csv"));
    CHECK(std::filesystem::exists(dir + "/sim/s1-trajectory.svg"));
}

TEST_CASE("cli fit-visco") {
    const std::string dir = cli_dir("visco");
    const std::string config = dir + "/study.json";
    std::ofstream(config) << kConfig;
    const std::string samples = dir + "/samples.csv";
    {
        std::ofstream os(samples);
        os << "displacement_mm,velocity_mm_s,force_n\n";
        for (double d : {1.0, 2.0, 3.0})
            for (double v : {2.0, 9.0, 15.0})
                os << d << ',' << v << ',' << 1.45 * d + 0.055 * v << '\n';
    }
    CHECK(run_cli("--config " + config + " --out " + dir + " fit-visco --samples " + samples) ==
          0);
    const std::string fit = slurp(dir + "/visco_fit.csv");
    CHECK(fit.find("1.45") != std::string::npos);
    CHECK(fit.find("0.055") != std::string::npos);
}
