// wgspdc: command-line front end for the waveguide SPDC simulator.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wgspdc/errors.hpp"
#include "wgspdc/run.hpp"

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::string format;
    bool plot_data = false;
    double margin = 0.0;
    double threshold = 0.0;
    std::string param;
    std::vector<std::string> values;
};

wgspdc::RunConfig load(const Options& o, const CLI::App& sub)
{
    auto config = wgspdc::load_config(o.config);
    if (!o.format.empty()) config.output.format = o.format;
    if (o.plot_data) config.output.plot_data = true;
    if (sub.count("--margin")) config.analysis.margin = o.margin;
    if (sub.count("--threshold")) config.analysis.threshold = o.threshold;
    // re-validate the overridden values through the schema
    return wgspdc::parse_config(wgspdc::to_json(config));
}

void print_written(const std::vector<std::filesystem::path>& files)
{
    for (const auto& f : files) std::cout << f.string() << '\n';
}

void print_warnings(const wgspdc::OutputRecord& record)
{
    for (const auto& w : record.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Biphoton spectra of layered planar waveguides"};
    app.require_subcommand(1);
    app.set_version_flag("--version", wgspdc::kToolVersion);

    Options o;
    const auto common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON configuration file")->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--format", o.format, "spectrum output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--plot-data", o.plot_data, "also write binned series per channel");
        sub->add_option("--margin", o.margin, "discreteness margin (>= 1)");
        sub->add_option("--threshold", o.threshold, "overlap threshold, fraction of maximum");
    };

    auto* modes = app.add_subcommand("modes", "dispersion curves n_eff(lambda) per mode order");
    common(modes);
    auto* spectrum = app.add_subcommand("spectrum", "biphoton spectra and analyses");
    common(spectrum);
    auto* analyze = app.add_subcommand("analyze", "analysis reports without the spectrum table");
    common(analyze);
    auto* sweep = app.add_subcommand("sweep", "one run per parameter value");
    common(sweep);
    sweep->add_option("--param", o.param, "sigma, alpha, l, l0, L, N, H or n")->required();
    sweep->add_option("--values", o.values, "parameter values")->required();
    auto* validate = app.add_subcommand("validate", "three-way agreement of the spectrum paths");
    common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : wgspdc::kExitConfig;
    }

    try {
        if (modes->parsed()) {
            const auto config = load(o, *modes);
            print_written(wgspdc::write_modes(wgspdc::run_modes(config), o.out));
        } else if (spectrum->parsed() || analyze->parsed()) {
            const auto* sub = spectrum->parsed() ? spectrum : analyze;
            const auto config = load(o, *sub);
            const auto record = wgspdc::run(config);
            print_warnings(record);
            print_written(
                wgspdc::write_outputs(record, config.output, o.out, spectrum->parsed()));
        } else if (sweep->parsed()) {
            const auto config = load(o, *sweep);
            const auto points = wgspdc::sweep(config, o.param, o.values);
            for (const auto& p : points) {
                if (!p.error.empty()) std::cerr << "point " << p.value << ": " << p.error << '\n';
            }
            print_written(wgspdc::write_sweep(points, config.output, o.out));
        } else if (validate->parsed()) {
            const auto config = load(o, *validate);
            const auto report = wgspdc::validate(config);
            std::ostringstream os;
            os.precision(3);
            os << std::scientific << "points " << report.points << "  max deviation "
               << report.max_deviation << " (layer/closed " << report.max_deviation_layer_closed
               << ", layer/oracle " << report.max_deviation_layer_oracle << ", closed/oracle "
               << report.max_deviation_closed_oracle << ")  tolerance "
               << wgspdc::kValidationTolerance << "  " << (report.passed ? "PASS" : "FAIL");
            std::cout << os.str() << '\n';
            return report.passed ? wgspdc::kExitOk : wgspdc::kExitOracle;
        }
    } catch (const wgspdc::CutoffError& e) {
        std::cerr << "error: mode " << e.order << " is cut off at " << e.wavelength
                  << " um: " << e.what() << '\n';
        return wgspdc::kExitPhysics;
    } catch (const wgspdc::PhysicsError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return wgspdc::kExitPhysics;
    } catch (const wgspdc::QuadratureNonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return wgspdc::kExitOracle;
    } catch (const wgspdc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return wgspdc::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return wgspdc::kExitOk;
}
