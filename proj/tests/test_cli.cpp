#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wgspdc/errors.hpp"
#include "wgspdc/run.hpp"

using namespace wgspdc;
using nlohmann::json;

namespace {

json base_tree()
{
    return json::parse(R"({
      "schema_version": 1,
      "geometry": {"H_um": 1.0, "n_core": 3.6, "n_clad": 3.5, "Ly_um": 1.0},
      "pump": {"wavelength_um": 0.775},
      "structure": {"kind": "photonic_crystal", "layers": 3, "layer_length_um": 300.0,
                    "alpha_rad_per_um2": 1e-4, "qpm_layer": 1},
      "channels": [{"pump": 1, "signal": 0, "idler": 1}, {"pump": 1, "signal": 1, "idler": 0}],
      "grid": {"kind": "auto", "points": 801}
    })");
}

std::string read(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("wgspdc_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parsing")
{
    const auto c = parse_config(base_tree());
    CHECK(c.structure.kind == StructureKind::chirped_photonic_crystal);
    CHECK(c.channels.size() == 2);
    CHECK(c.grid.points == 801);
    CHECK(c.analysis.margin == kDefaultMargin);

    const auto expect_error = [](json t) { CHECK_THROWS_AS((void)parse_config(t), ConfigError); };
    auto t = base_tree();
    t["channels"] = json::array();
    expect_error(t);
    t = base_tree();
    t.erase("schema_version");
    expect_error(t);
    t = base_tree();
    t["schema_version"] = 2;
    expect_error(t);
    t = base_tree();
    t["geometry"]["H"] = 1.0;
    expect_error(t);
    t = base_tree();
    t["structure"]["total_length_um"] = 900.0;
    expect_error(t);
    t = base_tree();
    t["structure"]["kind"] = "bragg";
    expect_error(t);
    t = base_tree();
    t["structure"]["qpm_offset_rad_per_um"] = 0.1;
    expect_error(t);
    t = base_tree();
    t["geometry"]["n_clad"] = 3.7;
    expect_error(t);
    t = base_tree();
    t["grid"] = {{"kind", "detuning"}, {"min_rad_per_fs", 0.1}, {"max_rad_per_fs", -0.1}};
    expect_error(t);
    t = base_tree();
    t["analysis"] = {{"margin", 0.5}};
    expect_error(t);
    t = base_tree();
    t["channels"][0]["pump"] = "one";
    expect_error(t);
}

TEST_CASE("config echo round trip")
{
    const auto c = parse_config(base_tree());
    const auto echo = to_json(c);
    const auto again = to_json(parse_config(echo));
    CHECK(echo.dump() == again.dump());

    auto t = base_tree();
    t["structure"] = {{"kind", "aperiodic"}, {"layers", 10}, {"total_length_um", 2000.0},
                      {"chirp_um", 0.3}, {"expansion", "linear"}};
    const auto a = to_json(parse_config(t));
    CHECK(a.dump() == to_json(parse_config(a)).dump());
    CHECK(a["structure"].contains("total_length_um"));
    CHECK_FALSE(a["structure"].contains("first_length_um"));
}

TEST_CASE("structure from config")
{
    auto t = base_tree();
    t["structure"] = {{"kind", "photonic_crystal"}, {"layers", 5}, {"total_length_um", 2300.0},
                      {"alpha_rad_per_um2", 2.6e-5}};
    const auto s = build_structure(parse_config(t));
    CHECK(s.base_length() == doctest::Approx(460.0));
    t["structure"].erase("alpha_rad_per_um2");
    t["structure"]["index_chirp_per_um"] = {{"pump", 1e-6}};
    const auto s2 = build_structure(parse_config(t));
    CHECK(s2.chirp().alpha_rad_per_um2 == doctest::Approx(2.0 * 3.14159265358979 / 0.775 * 1e-6));
}

TEST_CASE("run produces spectra and reports")
{
    const auto c = parse_config(base_tree());
    const auto r = run(c);
    REQUIRE(r.channels.size() == 2);
    CHECK(r.channels[0].spectrum.detuning.size() == 801);
    CHECK(r.channels[0].peaks.has_value());
    REQUIRE(r.entanglement.size() == 1);
    CHECK(r.entanglement[0].overlap_metric >= 0.0);
    CHECK(r.entanglement[0].overlap_metric <= 1.0);
    REQUIRE(r.discreteness);
    CHECK(r.discreteness->ratio == doctest::Approx(1e-4 * 300.0 * 300.0 * std::sqrt(0.189) / 4.0));

    const auto csv = spectrum_csv(r);
    CHECK(csv.rfind("omega_rad_per_fs,lambda_s_um,re_phi_p1s0i1,im_phi_p1s0i1,abs2_phi_p1s0i1,", 0) == 0);
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(csv.find("inf") == std::string::npos);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 802);

    SUBCASE("forbidden channel becomes a warning")
    {
        auto t = base_tree();
        t["channels"].push_back({{"pump", 1}, {"signal", 0}, {"idler", 0}});
        const auto w = run(parse_config(t));
        CHECK(w.channels[2].spectrum.forbidden);
        REQUIRE(w.warnings.size() == 1);
        CHECK(w.warnings[0].find("p1s0i0") != std::string::npos);
    }
    SUBCASE("cut-off mode is reported with mode and wavelength")
    {
        auto t = base_tree();
        t["channels"] = json::array({{{"pump", 1}, {"signal", 3}, {"idler", 1}}});
        try {
            (void)run(parse_config(t));
            FAIL("expected cutoff");
        } catch (const CutoffError& e) {
            CHECK(e.order == 3);
            CHECK(e.wavelength == doctest::Approx(1.55));
        }
    }
}

TEST_CASE("determinism and echo re-run")
{
    const auto c = parse_config(base_tree());
    const auto r1 = run(c);
    const auto r2 = run(parse_config(r1.config_echo));
    CHECK(spectrum_csv(r1) == spectrum_csv(r2));
    CHECK(results_json(r1, true).dump() == results_json(r2, true).dump());
}

TEST_CASE("format_double round trips")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("output files")
{
    const auto dir = scratch("outputs");
    auto c = parse_config(base_tree());
    c.output.plot_data = true;
    c.output.plot_bins = 50;
    const auto r = run(c);
    const auto files = write_outputs(r, c.output, dir);
    CHECK(std::filesystem::exists(dir / "spectrum.csv"));
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "plot_p1s0i1.csv"));
    const auto report = json::parse(read(dir / "report.json"));
    CHECK(report["metadata"]["version"] == kToolVersion);
    CHECK(report["metadata"]["config"] == r.config_echo);
    CHECK(report["results"]["channels"].size() == 2);
    std::size_t lines = 0;
    for (char ch : read(dir / "plot_p1s0i1.csv")) lines += ch == '\n';
    CHECK(lines == 51);

    c.output.format = "json";
    const auto jdir = scratch("outputs_json");
    (void)write_outputs(r, c.output, jdir);
    CHECK_FALSE(std::filesystem::exists(jdir / "spectrum.csv"));
    const auto jr = json::parse(read(jdir / "report.json"));
    CHECK(jr["results"]["channels"][0]["abs2_phi"].size() == 801);
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(jdir);
}

TEST_CASE("modes output")
{
    auto t = base_tree();
    t["geometry"]["H_um"] = 0.8;
    t["modes"] = {{"min_wavelength_um", 0.7}, {"max_wavelength_um", 2.0}, {"samples", 200}};
    const auto modes = run_modes(parse_config(t));
    REQUIRE(modes.size() == 2);
    const auto dir = scratch("modes");
    (void)write_modes(modes, dir);
    const auto csv0 = read(dir / "modes_mu0.csv");
    const auto csv1 = read(dir / "modes_mu1.csv");
    CHECK(csv0.rfind("lambda_um,n_eff\n", 0) == 0);
    CHECK(csv1.size() < csv0.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep")
{
    const auto c = parse_config(base_tree());
    CHECK(sweep_parameter_key("sigma") == "chirp_um");
    CHECK(sweep_parameter_key("n") == "qpm_layer");
    CHECK_THROWS_AS((void)sweep_parameter_key("gamma"), ConfigError);

    const auto points = sweep(c, "N", {"1", "2", "0", "x"});
    REQUIRE(points.size() == 4);
    CHECK(points[0].record.has_value());
    CHECK(points[1].record.has_value());
    CHECK_FALSE(points[2].record.has_value());
    CHECK_FALSE(points[2].error.empty());
    CHECK_FALSE(points[3].record.has_value());

    const auto single = sweep(c, "alpha", {"1e-4"});
    REQUIRE(single[0].record);
    CHECK(spectrum_csv(*single[0].record) == spectrum_csv(run(c)));

    const auto summary = sweep_summary_csv(points);
    CHECK(summary.rfind("value,channel,bandwidth_rad_per_fs,peak_count,overlap_metric,error\n", 0) == 0);
    const auto dir = scratch("sweep");
    (void)write_sweep(points, c.output, dir);
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "point_000" / "spectrum.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("validate")
{
    const auto report = validate(parse_config(base_tree()));
    CHECK(report.passed);
    CHECK(report.points > 0);
    CHECK(report.max_deviation < kValidationTolerance);
    CHECK(relative_deviation(1.0, 1.0, 0.0) == 0.0);
    CHECK(relative_deviation(0.0, 0.0, 0.0) == 0.0);
    CHECK(relative_deviation(1e-20, 0.0, 1.0) == 1e-20);
}
