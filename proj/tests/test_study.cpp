#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "finray/error.hpp"
#include "finray/exports.hpp"
#include "finray/study.hpp"

using namespace finray;

namespace {

const char* kPaperGridConfig = R"json({
  "schema_version": 1,
  "calibration": {"material": "PLA+", "infill_direction_deg": 0, "infill_density": 0.10,
                  "measured_kyy_n_mm": 1.2},
  "grid": {
    "materials": ["PLA+"],
    "infill_directions_deg": [0, 10, 20, 30, 40],
    "infill_densities": [0.10, 0.20, 0.30]
  },
  "designs": [
    {"material": "PETG", "infill_direction_deg": 0, "infill_density": 0.10},
    {"material": "PETG", "infill_direction_deg": 0, "infill_density": 0.20},
    {"material": "PETG", "infill_direction_deg": 0, "infill_density": 0.30}
  ]
})json";

const char* kSmallConfig = R"json({
  "schema_version": 1,
  "calibration": {"material": "PLA+", "infill_direction_deg": 0, "infill_density": 0.10,
                  "measured_kyy_n_mm": 1.2},
  "grid": {
    "materials": ["PLA+"],
    "infill_directions_deg": [0],
    "infill_densities": [0.10, 0.20]
  },
  "scenarios": [
    {"id": "plug8", "plug_width_mm": 10, "socket_depth_mm": 8,
     "grip": {"kyy_n_mm": 1.2, "kzz_n_mm": 30.0, "kzy_n_mm": 5.0, "kxx_n_mm": 2.9}}
  ]
})json";

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("finray_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("config parsing fills the grid and defaults") {
    const StudyConfig cfg = parse_config(kPaperGridConfig);
    CHECK(cfg.designs.size() == 18);  // populated stiffness-table cells
    CHECK(cfg.anchor.has_value());
    CHECK(cfg.find_design("PLA+-id0-i10").design.infill_density == doctest::Approx(0.10));
    CHECK(cfg.find_design("PETG-id0-i30").design.material.name == "PETG");
    CHECK_THROWS_AS(cfg.find_design("nope"), Error);
    CHECK_THROWS_AS(parse_config("{"), Error);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), Error);
}

TEST_CASE("characterize over the paper grid yields 18 sorted rows") {
    const StudyConfig cfg = parse_config(kPaperGridConfig);
    const auto records = run_characterize(cfg, 4);
    REQUIRE(records.size() == 18);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto key = [](const StiffnessRecord& r) {
            return std::make_tuple(r.material, r.infill_direction, r.infill_density);
        };
        CHECK(key(records[i - 1]) < key(records[i]));
    }
    int ok = 0;
    for (const auto& r : records)
        if (r.status == "ok")
            ++ok;
    CHECK(ok == 18);

    // Deterministic bytes on rerun.
    const std::string csv_a = stiffness_csv(records);
    const std::string csv_b = stiffness_csv(run_characterize(cfg, 2));
    CHECK(csv_a == csv_b);

    // Round trip reproduces the records exactly (values are report-rounded).
    auto rounded = records;
    for (auto& r : rounded) {
        r.infill_direction = report_round(r.infill_direction);
        r.infill_density = report_round(r.infill_density);
        r.mount_angle = report_round(r.mount_angle);
        r.kyy = report_round(r.kyy);
        r.kzz = report_round(r.kzz);
        r.kzy = report_round(r.kzy);
        r.kxx = report_round(r.kxx);
        r.ratio = report_round(r.ratio);
        r.rcc_angle_deg = report_round(r.rcc_angle_deg);
        r.max_force = report_round(r.max_force);
        r.max_deflection = report_round(r.max_deflection);
    }
    CHECK(parse_stiffness_csv(csv_a) == rounded);
}

TEST_CASE("empty grid gives a header-only report") {
    const StudyConfig cfg = parse_config(R"({"schema_version": 1})");
    const auto records = run_characterize(cfg, 1);
    CHECK(records.empty());
    const std::string csv = stiffness_csv(records);
    CHECK(csv.find("material,") == 0);
    CHECK(csv.find('\n') == csv.size() - 1);
}

TEST_CASE("design command writes deterministic files with the expected ribs") {
    const StudyConfig cfg = parse_config(kSmallConfig);
    const std::string out = temp_dir("design");
    const auto paths = run_design(cfg, "PLA+-id0-i10", out);
    REQUIRE(paths.size() == 2);
    const std::string svg_a = read_file(paths[0]);
    const std::string stl_a = read_file(paths[1]);
    CHECK(!svg_a.empty());
    CHECK(!stl_a.empty());

    // Rerun: byte identical.
    run_design(cfg, "PLA+-id0-i10", out);
    CHECK(read_file(paths[0]) == svg_a);
    CHECK(read_file(paths[1]) == stl_a);

    // SVG polyline count equals the rebuilt frame's element count.
    const DesignSpec& spec = cfg.find_design("PLA+-id0-i10");
    const PlanarFrame frame = build_frame(spec.design, cfg.identify.elems_per_member);
    std::size_t polylines = 0;
    for (std::size_t pos = svg_a.find("<polyline"); pos != std::string::npos;
         pos = svg_a.find("<polyline", pos + 1))
        ++polylines;
    CHECK(polylines == frame.elements.size());

    CHECK_THROWS_AS(run_design(cfg, "missing-design", out), Error);
}

TEST_CASE("simulate command writes a trace and a trajectory plot") {
    const StudyConfig cfg = parse_config(kSmallConfig);
    const std::string out = temp_dir("simulate");
    const auto paths = run_simulate(cfg, "plug8", out);
    REQUIRE(paths.size() == 2);
    const std::string csv = read_file(paths[0]);
    CHECK(csv.find("step,phase,") == 0);
    CHECK(csv.find("insert_z") != std::string::npos);
    CHECK(read_file(paths[1]).find("<svg") != std::string::npos);
    CHECK_THROWS_AS(run_simulate(cfg, "missing", out), Error);
}

TEST_CASE("sweep produces windows and is deterministic") {
    const StudyConfig cfg = parse_config(kSmallConfig);
    const std::string out = temp_dir("sweep");
    const auto a = run_sweep(cfg, "plug8", Axis::y, 0.5, 2, out);
    REQUIRE(a.size() == 2);
    for (const auto& r : a) {
        CHECK(r.status == "ok");
        CHECK(r.window >= 0.0);
        CHECK(r.window == doctest::Approx(r.max_offset - r.min_offset));
    }
    const auto b = run_sweep(cfg, "plug8", Axis::y, 0.5, 1, "");
    CHECK(window_csv(a) == window_csv(b));
    CHECK(parse_window_csv(window_csv(a)).size() == 2);
    // Trajectory SVGs were written for each design.
    CHECK(std::filesystem::exists(out + "/PLA+-id0-i10-trajectory.svg"));
}

TEST_CASE("window csv round-trips exactly") {
    WindowRecord r;
    r.material = "PLA+";
    r.infill_direction = 10.0;
    r.infill_density = 0.2;
    r.fingertip = "notched_contact_plane";
    r.mount_angle = 10.0;
    r.axis = "y";
    r.min_offset = -2.5;
    r.max_offset = 3.0;
    r.window = 5.5;
    r.limiting_outcome = "jammed/missed";
    r.status = "ok";
    const auto parsed = parse_window_csv(window_csv({r}));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == r);
}

TEST_CASE("parallel_for propagates failures and covers every index") {
    std::vector<int> hits(64, 0);
    parallel_for(64, 8, [&](int i) { hits[static_cast<std::size_t>(i)] = 1; });
    for (int h : hits)
        CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(8, 4,
                                 [&](int i) {
                                     if (i == 5)
                                         throw Error::numeric("boom");
                                 }),
                    Error);
}

TEST_CASE("material overrides and lumped kxx flow through the config") {
    const char* cfg = R"json({
      "schema_version": 1,
      "kxx_n_mm": 3.4,
      "materials": [
        {"name": "PLA+", "youngs_modulus_mpa": 2200.0},
        {"name": "custom", "youngs_modulus_mpa": 1000.0, "yield_strength_mpa": 10.0,
         "ultimate_strength_mpa": 12.0, "poisson_ratio": 0.3, "density_g_cm3": 1.0}
      ],
      "grid": {"materials": ["PLA+"], "infill_directions_deg": [0],
               "infill_densities": [0.10]}
    })json";
    const StudyConfig c = parse_config(cfg);
    CHECK(c.resolve_material("PLA+").youngs_modulus == doctest::Approx(2200.0));
    CHECK(c.resolve_material("PLA+").yield_strength == doctest::Approx(20.04));
    CHECK(c.resolve_material("custom").youngs_modulus == doctest::Approx(1000.0));
    CHECK(c.identify.kxx == doctest::Approx(3.4));
    CHECK_THROWS_AS(c.resolve_material("nope"), Error);

    const auto records = run_characterize(c, 1);
    REQUIRE(records.size() == 1);
    CHECK(records[0].kxx == doctest::Approx(3.4));
}

TEST_CASE("a failing grid point is flagged without sinking the report") {
    const char* cfg = R"json({
      "schema_version": 1,
      "grid": {"materials": ["PLA+"], "infill_directions_deg": [0],
               "infill_densities": [0.004, 0.10]}
    })json";
    // density 0.004 gives a rib pitch of 100 mm: degenerate at build time
    const auto records = run_characterize(parse_config(cfg), 1);
    REQUIRE(records.size() == 2);
    CHECK(records[0].status.find("error:") == 0);
    CHECK(records[0].status.find("degenerate rib layout") != std::string::npos);
    CHECK(records[1].status == "ok");
}
