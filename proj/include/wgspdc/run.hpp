#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgspdc/analysis.hpp"
#include "wgspdc/spectrum.hpp"

namespace wgspdc {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

struct StructureSpec {
    StructureKind kind = StructureKind::aperiodic_poled;
    int layers = 1;
    // aperiodic: exactly one of first_length_um / total_length_um
    std::optional<double> first_length_um;
    std::optional<double> chirp_um;
    // photonic crystal: exactly one of layer_length_um / total_length_um,
    // exactly one of alpha / index_chirp
    std::optional<double> layer_length_um;
    std::optional<double> alpha_rad_per_um2;
    std::optional<ChirpParameters> index_chirp;
    std::optional<double> total_length_um;
    // at most one of the two; default is the middle layer for the aperiodic
    // family and layer 1 for the photonic crystal
    std::optional<int> qpm_layer;
    std::optional<double> qpm_offset_rad_per_um;
    std::optional<Expansion> expansion;
};

struct GridSpec {
    enum class Kind { automatic, detuning, wavelength };
    Kind kind = Kind::automatic;
    double lo = 0.0;  // rad/fs or um
    double hi = 0.0;
    std::size_t points = kDefaultGridPoints;
};

struct ModesSpec {
    double min_wavelength_um = 1.0;
    double max_wavelength_um = 2.0;
    std::size_t samples = 200;
    std::vector<int> orders{0, 1};
};

struct AnalysisSpec {
    bool peaks = true;
    bool entanglement = true;
    bool discreteness = true;
    double margin = kDefaultMargin;
    double threshold = kDefaultOverlapThreshold;
    double prominence = kDefaultProminence;
};

struct OutputSpec {
    std::string format = "csv";  // csv | json
    bool plot_data = false;
    std::size_t plot_bins = 256;
    bool normalize = false;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    SlabGeometry geometry;
    double pump_wavelength_um = 0.775;
    StructureSpec structure;
    std::vector<TriModeChannel> channels;
    GridSpec grid;
    ModesSpec modes;
    AnalysisSpec analysis;
    OutputSpec output;
};

/// Parses and validates a configuration tree. Throws ConfigError naming the
/// offending key.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& tree);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Canonical tree for a configuration; parse_config(to_json(c)) reproduces c
/// and to_json of that is identical.
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

[[nodiscard]] LayeredStructure build_structure(const RunConfig& config);

/// Expansion coefficients of one channel at the configured pump wavelength.
/// Propagates CutoffError for any wave that is not guided.
[[nodiscard]] TaylorCoefficients channel_coefficients(const SlabGeometry& geometry,
                                                      const TriModeChannel& channel,
                                                      double pump_wavelength_um);

struct ChannelOutput {
    SpectrumResult spectrum;
    std::optional<PeakReport> peaks;
};

struct OutputRecord {
    nlohmann::json config_echo;
    std::string tool_version = kToolVersion;
    std::string timestamp;
    std::vector<ChannelOutput> channels;
    std::vector<EntanglementReport> entanglement;
    std::optional<Discreteness> discreteness;
    std::vector<std::string> warnings;
    double qpm_offset = 0.0;
    std::string structure_id;
};

[[nodiscard]] OutputRecord run(const RunConfig& config);

// Serialization. `results` holds every computed quantity and is a pure
// function of the configuration; `metadata` carries the echo, version and
// timestamp.
[[nodiscard]] nlohmann::json results_json(const OutputRecord& record, bool include_spectra);
[[nodiscard]] nlohmann::json record_json(const OutputRecord& record, bool include_spectra);
[[nodiscard]] std::string spectrum_csv(const OutputRecord& record);
[[nodiscard]] std::string plot_data_csv(const ChannelOutput& channel, std::size_t bins);

/// Shortest decimal string that reads back to the same double.
[[nodiscard]] std::string format_double(double value);

// Writes the run outputs below `dir` and returns the files written.
std::vector<std::filesystem::path> write_outputs(const OutputRecord& record,
                                                 const OutputSpec& output,
                                                 const std::filesystem::path& dir,
                                                 bool include_spectrum = true);

struct ModesOutput {
    int order = 0;
    double cutoff_um = 0.0;
    DispersionCurve curve;
};

[[nodiscard]] std::vector<ModesOutput> run_modes(const RunConfig& config);
std::vector<std::filesystem::path> write_modes(const std::vector<ModesOutput>& modes,
                                               const std::filesystem::path& dir);

struct SweepPoint {
    std::string value;
    std::optional<OutputRecord> record;
    std::string error;
};

/// Canonical parameter key for a sweep name; accepts the symbols
/// (sigma, alpha, l, l0, N, H, n) and the config key names. Throws
/// ConfigError for anything else.
[[nodiscard]] std::string sweep_parameter_key(const std::string& name);

/// Configuration with one parameter replaced.
[[nodiscard]] RunConfig with_parameter(const RunConfig& config, const std::string& name,
                                       const std::string& value);

/// Runs every point concurrently. Per-point failures are recorded and do not
/// stop the sweep.
[[nodiscard]] std::vector<SweepPoint> sweep(const RunConfig& config, const std::string& name,
                                            const std::vector<std::string>& values);

[[nodiscard]] std::string sweep_summary_csv(const std::vector<SweepPoint>& points);

std::vector<std::filesystem::path> write_sweep(const std::vector<SweepPoint>& points,
                                               const OutputSpec& output,
                                               const std::filesystem::path& dir);

struct ValidationReport {
    double max_deviation = 0.0;  // largest pairwise |P_a - P_b| / max(P_a, P_b, floor)
    double max_deviation_layer_closed = 0.0;
    double max_deviation_layer_oracle = 0.0;
    double max_deviation_closed_oracle = 0.0;
    std::size_t points = 0;
    bool passed = true;
};

inline constexpr double kValidationTolerance = 1e-8;
inline constexpr std::size_t kValidationMaxPoints = 201;

/// Three-way agreement (layer sum, closed form, quadrature oracle) of |Phi|^2
/// on up to kValidationMaxPoints of the configured grid for every allowed
/// channel.
[[nodiscard]] ValidationReport validate(const RunConfig& config);

/// Relative difference of two non-negative values with an absolute floor.
[[nodiscard]] double relative_deviation(double a, double b, double floor);

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPhysics = 3;
inline constexpr int kExitOracle = 4;

}  // namespace wgspdc
