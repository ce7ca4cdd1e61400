#include "wgspdc/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"

namespace wgspdc {

using nlohmann::json;

namespace {

// ---- config parsing -------------------------------------------------------

void reject_unknown(const json& node, const std::string& where,
                    std::initializer_list<const char*> allowed)
{
    for (const auto& [key, _] : node.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

const json& section(const json& tree, const char* key)
{
    static const json empty = json::object();
    if (!tree.contains(key)) return empty;
    const auto& node = tree.at(key);
    if (!node.is_object()) throw ConfigError(std::string(key) + " must be an object");
    return node;
}

double number(const json& node, const std::string& where, const char* key)
{
    const auto& v = node.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + " must be finite");
    return d;
}

double number_or(const json& node, const std::string& where, const char* key, double fallback)
{
    return node.contains(key) ? number(node, where, key) : fallback;
}

std::optional<double> maybe_number(const json& node, const std::string& where, const char* key)
{
    if (!node.contains(key)) return std::nullopt;
    return number(node, where, key);
}

long long integer(const json& node, const std::string& where, const char* key)
{
    const auto& v = node.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<long long>();
}

bool boolean_or(const json& node, const std::string& where, const char* key, bool fallback)
{
    if (!node.contains(key)) return fallback;
    const auto& v = node.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
    return v.get<bool>();
}

std::string string_or(const json& node, const std::string& where, const char* key,
                      const std::string& fallback)
{
    if (!node.contains(key)) return fallback;
    const auto& v = node.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
    return v.get<std::string>();
}

StructureSpec parse_structure(const json& node)
{
    const std::string where = "structure";
    reject_unknown(node, where,
                   {"kind", "layers", "first_length_um", "chirp_um", "layer_length_um",
                    "alpha_rad_per_um2", "index_chirp_per_um", "total_length_um", "qpm_layer",
                    "qpm_offset_rad_per_um", "expansion"});
    if (!node.contains("kind")) throw ConfigError("structure.kind is required");
    StructureSpec s;
    const std::string kind = string_or(node, where, "kind", "");
    if (kind == "aperiodic") {
        s.kind = StructureKind::aperiodic_poled;
    } else if (kind == "photonic_crystal") {
        s.kind = StructureKind::chirped_photonic_crystal;
    } else {
        throw ConfigError("structure.kind must be 'aperiodic' or 'photonic_crystal'");
    }
    if (!node.contains("layers")) throw ConfigError("structure.layers is required");
    const long long layers = integer(node, where, "layers");
    if (layers < 1 || layers > 1000000) throw ConfigError("structure.layers must be >= 1");
    s.layers = static_cast<int>(layers);

    s.first_length_um = maybe_number(node, where, "first_length_um");
    s.chirp_um = maybe_number(node, where, "chirp_um");
    s.layer_length_um = maybe_number(node, where, "layer_length_um");
    s.alpha_rad_per_um2 = maybe_number(node, where, "alpha_rad_per_um2");
    s.total_length_um = maybe_number(node, where, "total_length_um");
    s.qpm_offset_rad_per_um = maybe_number(node, where, "qpm_offset_rad_per_um");
    if (node.contains("qpm_layer")) {
        s.qpm_layer = static_cast<int>(integer(node, where, "qpm_layer"));
    }
    if (node.contains("index_chirp_per_um")) {
        const auto& ic = node.at("index_chirp_per_um");
        if (!ic.is_object()) throw ConfigError("structure.index_chirp_per_um must be an object");
        reject_unknown(ic, "structure.index_chirp_per_um", {"pump", "signal", "idler"});
        const std::string w = "structure.index_chirp_per_um";
        s.index_chirp = ChirpParameters{number_or(ic, w, "pump", 0.0),
                                        number_or(ic, w, "signal", 0.0),
                                        number_or(ic, w, "idler", 0.0), 0.0};
    }
    if (node.contains("expansion")) {
        const std::string e = string_or(node, where, "expansion", "");
        if (e == "linear") {
            s.expansion = Expansion::linear;
        } else if (e == "quadratic") {
            s.expansion = Expansion::quadratic;
        } else {
            throw ConfigError("structure.expansion must be 'linear' or 'quadratic'");
        }
    }
    if (s.qpm_layer && s.qpm_offset_rad_per_um) {
        throw ConfigError("structure: give qpm_layer or qpm_offset_rad_per_um, not both");
    }

    if (s.kind == StructureKind::aperiodic_poled) {
        if (s.layer_length_um || s.alpha_rad_per_um2 || s.index_chirp) {
            throw ConfigError("structure: photonic-crystal keys given for an aperiodic structure");
        }
        if (s.first_length_um.has_value() == s.total_length_um.has_value()) {
            throw ConfigError("structure: give exactly one of first_length_um, total_length_um");
        }
    } else {
        if (s.first_length_um || s.chirp_um) {
            throw ConfigError("structure: aperiodic keys given for a photonic crystal");
        }
        if (s.layer_length_um.has_value() == s.total_length_um.has_value()) {
            throw ConfigError("structure: give exactly one of layer_length_um, total_length_um");
        }
        if (s.alpha_rad_per_um2.has_value() == s.index_chirp.has_value()) {
            throw ConfigError(
                "structure: give exactly one of alpha_rad_per_um2, index_chirp_per_um");
        }
    }
    return s;
}

TriModeChannel parse_channel(const json& node, std::size_t index)
{
    const std::string where = "channels[" + std::to_string(index) + "]";
    if (!node.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown(node, where,
                   {"pump", "signal", "idler", "signal_polarization", "idler_polarization"});
    TriModeChannel c;
    for (const char* key : {"pump", "signal", "idler"}) {
        if (!node.contains(key)) throw ConfigError(where + "." + key + " is required");
    }
    const auto order = [&](const char* key) {
        const long long v = integer(node, where, key);
        if (v < 0 || v > 1000) throw ConfigError(where + "." + key + " must be a mode order >= 0");
        return static_cast<int>(v);
    };
    c.pump = order("pump");
    c.signal = order("signal");
    c.idler = order("idler");
    c.signal_polarization = string_or(node, where, "signal_polarization", "H");
    c.idler_polarization = string_or(node, where, "idler_polarization", "V");
    return c;
}

GridSpec parse_grid(const json& node)
{
    const std::string where = "grid";
    GridSpec g;
    const std::string kind = string_or(node, where, "kind", "auto");
    if (node.contains("points")) {
        const long long p = integer(node, where, "points");
        if (p < 2 || p > 100000000) throw ConfigError("grid.points must be >= 2");
        g.points = static_cast<std::size_t>(p);
    }
    if (kind == "auto") {
        reject_unknown(node, where, {"kind", "points"});
        g.kind = GridSpec::Kind::automatic;
        return g;
    }
    if (kind == "detuning") {
        reject_unknown(node, where, {"kind", "points", "min_rad_per_fs", "max_rad_per_fs"});
        g.kind = GridSpec::Kind::detuning;
        if (!node.contains("min_rad_per_fs") || !node.contains("max_rad_per_fs")) {
            throw ConfigError("grid: detuning grid needs min_rad_per_fs and max_rad_per_fs");
        }
        g.lo = number(node, where, "min_rad_per_fs");
        g.hi = number(node, where, "max_rad_per_fs");
    } else if (kind == "wavelength") {
        reject_unknown(node, where, {"kind", "points", "min_um", "max_um"});
        g.kind = GridSpec::Kind::wavelength;
        if (!node.contains("min_um") || !node.contains("max_um")) {
            throw ConfigError("grid: wavelength grid needs min_um and max_um");
        }
        g.lo = number(node, where, "min_um");
        g.hi = number(node, where, "max_um");
        if (!(g.lo > 0.0)) throw ConfigError("grid.min_um must be positive");
    } else {
        throw ConfigError("grid.kind must be 'auto', 'detuning' or 'wavelength'");
    }
    if (!(g.hi > g.lo)) throw ConfigError("grid: max must exceed min");
    return g;
}

ModesSpec parse_modes(const json& node)
{
    const std::string where = "modes";
    reject_unknown(node, where, {"min_wavelength_um", "max_wavelength_um", "samples", "orders"});
    ModesSpec m;
    m.min_wavelength_um = number_or(node, where, "min_wavelength_um", m.min_wavelength_um);
    m.max_wavelength_um = number_or(node, where, "max_wavelength_um", m.max_wavelength_um);
    if (node.contains("samples")) {
        const long long s = integer(node, where, "samples");
        if (s < 2) throw ConfigError("modes.samples must be >= 2");
        m.samples = static_cast<std::size_t>(s);
    }
    if (node.contains("orders")) {
        const auto& o = node.at("orders");
        if (!o.is_array() || o.empty()) throw ConfigError("modes.orders must be a non-empty array");
        m.orders.clear();
        for (const auto& v : o) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw ConfigError("modes.orders entries must be integers >= 0");
            }
            m.orders.push_back(static_cast<int>(v.get<long long>()));
        }
    }
    if (!(m.min_wavelength_um > 0.0) || !(m.max_wavelength_um > m.min_wavelength_um)) {
        throw ConfigError("modes: need 0 < min_wavelength_um < max_wavelength_um");
    }
    return m;
}

AnalysisSpec parse_analysis(const json& node)
{
    const std::string where = "analysis";
    reject_unknown(node, where,
                   {"peaks", "entanglement", "discreteness", "margin", "threshold", "prominence"});
    AnalysisSpec a;
    a.peaks = boolean_or(node, where, "peaks", a.peaks);
    a.entanglement = boolean_or(node, where, "entanglement", a.entanglement);
    a.discreteness = boolean_or(node, where, "discreteness", a.discreteness);
    a.margin = number_or(node, where, "margin", a.margin);
    a.threshold = number_or(node, where, "threshold", a.threshold);
    a.prominence = number_or(node, where, "prominence", a.prominence);
    if (!(a.margin >= 1.0)) throw ConfigError("analysis.margin must be >= 1");
    if (!(a.threshold > 0.0 && a.threshold < 1.0)) {
        throw ConfigError("analysis.threshold must lie in (0, 1)");
    }
    if (!(a.prominence >= 0.0 && a.prominence <= 1.0)) {
        throw ConfigError("analysis.prominence must lie in [0, 1]");
    }
    return a;
}

OutputSpec parse_output(const json& node)
{
    const std::string where = "output";
    reject_unknown(node, where, {"format", "plot_data", "plot_bins", "normalize"});
    OutputSpec o;
    o.format = string_or(node, where, "format", o.format);
    if (o.format != "csv" && o.format != "json") {
        throw ConfigError("output.format must be 'csv' or 'json'");
    }
    o.plot_data = boolean_or(node, where, "plot_data", o.plot_data);
    o.normalize = boolean_or(node, where, "normalize", o.normalize);
    if (node.contains("plot_bins")) {
        const long long b = integer(node, where, "plot_bins");
        if (b < 1) throw ConfigError("output.plot_bins must be >= 1");
        o.plot_bins = static_cast<std::size_t>(b);
    }
    return o;
}

// ---- shared run preparation ----------------------------------------------

struct Prepared {
    LayeredStructure structure;
    std::vector<TaylorCoefficients> coefficients;
    double qpm_offset = 0.0;
    std::vector<double> grid;
};

int default_qpm_layer(const LayeredStructure& structure)
{
    if (structure.kind() == StructureKind::aperiodic_poled) {
        return static_cast<int>((structure.size() + 1) / 2);
    }
    return 1;
}

Prepared prepare(const RunConfig& config)
{
    config.geometry.validate();
    Prepared p{build_structure(config), {}, 0.0, {}};
    for (const auto& channel : config.channels) {
        p.coefficients.push_back(
            channel_coefficients(config.geometry, channel, config.pump_wavelength_um));
    }

    std::size_t reference = 0;
    for (std::size_t c = 0; c < config.channels.size(); ++c) {
        if (parity_allowed(config.channels[c])) {
            reference = c;
            break;
        }
    }
    const auto& s = config.structure;
    if (s.qpm_offset_rad_per_um) {
        p.qpm_offset = *s.qpm_offset_rad_per_um;
    } else {
        p.qpm_offset = matched_qpm_offset(p.structure, p.coefficients[reference],
                                          s.qpm_layer.value_or(default_qpm_layer(p.structure)));
    }

    const auto& g = config.grid;
    if (g.kind == GridSpec::Kind::automatic) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t c = 0; c < config.channels.size(); ++c) {
            if (!parity_allowed(config.channels[c])) continue;
            const auto model =
                mismatch_model(p.structure, p.coefficients[c], p.qpm_offset, s.expansion);
            const auto band = detuning_band(model);
            lo = std::min(lo, band.first);
            hi = std::max(hi, band.second);
        }
        if (!std::isfinite(lo)) {
            const auto model =
                mismatch_model(p.structure, p.coefficients[0], p.qpm_offset, s.expansion);
            std::tie(lo, hi) = detuning_band(model);
        }
        p.grid = uniform_grid(lo, hi, g.points);
    } else if (g.kind == GridSpec::Kind::detuning) {
        p.grid = uniform_grid(g.lo, g.hi, g.points);
    } else {
        const double a = detuning_from_signal_wavelength(g.hi, config.pump_wavelength_um);
        const double b = detuning_from_signal_wavelength(g.lo, config.pump_wavelength_um);
        if (!(a > -angular_frequency(config.pump_wavelength_um) / 2.0)) {
            throw ConfigError("grid: wavelength range reaches zero signal frequency");
        }
        p.grid = uniform_grid(a, b, g.points);
    }
    return p;
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

bool swapped(const TriModeChannel& a, const TriModeChannel& b)
{
    return a.pump == b.pump && a.signal == b.idler && a.idler == b.signal && a.signal != a.idler;
}

// ---- serialization --------------------------------------------------------

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json peaks_json(const PeakReport& r)
{
    json peaks = json::array();
    for (const auto& p : r.peaks) {
        peaks.push_back({{"omega_rad_per_fs", p.detuning},
                         {"height", p.height},
                         {"width_rad_per_fs", p.width},
                         {"prominence", p.prominence}});
    }
    return {{"peaks", peaks},
            {"count", r.count},
            {"discrete", r.discrete},
            {"criterion_ratio", r.criterion_ratio},
            {"margin", r.margin},
            {"prominence", r.prominence},
            {"predicted_omega_rad_per_fs", r.predicted},
            {"max_position_error_rad_per_fs", optional_number(r.max_position_error)},
            {"spacing_alpha_l_over_D_rad_per_fs", optional_number(r.spacing_profile)},
            {"spacing_alpha_l_over_2D_rad_per_fs", optional_number(r.spacing_half)}};
}

json entanglement_json(const EntanglementReport& e)
{
    json interval = nullptr;
    if (e.overlap_interval) {
        interval = json::array({e.overlap_interval->first, e.overlap_interval->second});
    }
    return {{"channel_a", e.channel_a.label()},
            {"channel_b", e.channel_b.label()},
            {"overlap_interval_rad_per_fs", interval},
            {"overlap_metric", e.overlap_metric},
            {"coexistence_width_rad_per_fs", e.coexistence_width},
            {"threshold", e.threshold}};
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw Error("failed writing " + path.string());
}

std::string parse_double_text(const std::string& text, double& value)
{
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        return "'" + text + "' is not a finite number";
    }
    return {};
}

}  // namespace

// ---- public API -----------------------------------------------------------

RunConfig parse_config(const json& tree)
{
    if (!tree.is_object()) throw ConfigError("configuration must be a JSON object");
    reject_unknown(tree, "config",
                   {"schema_version", "geometry", "pump", "structure", "channels", "grid", "modes",
                    "analysis", "output"});
    RunConfig c;
    try {
        if (!tree.contains("schema_version")) throw ConfigError("schema_version is required");
        c.schema_version = static_cast<int>(integer(tree, "config", "schema_version"));
        if (c.schema_version != kSchemaVersion) {
            throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
        }

        const auto& geo = section(tree, "geometry");
        reject_unknown(geo, "geometry", {"H_um", "n_core", "n_clad", "Ly_um"});
        c.geometry.height_um = number_or(geo, "geometry", "H_um", c.geometry.height_um);
        c.geometry.n_core = number_or(geo, "geometry", "n_core", c.geometry.n_core);
        c.geometry.n_clad = number_or(geo, "geometry", "n_clad", c.geometry.n_clad);
        c.geometry.width_um = number_or(geo, "geometry", "Ly_um", c.geometry.width_um);
        try {
            c.geometry.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("geometry: ") + e.what());
        }

        const auto& pump = section(tree, "pump");
        reject_unknown(pump, "pump", {"wavelength_um"});
        c.pump_wavelength_um = number_or(pump, "pump", "wavelength_um", c.pump_wavelength_um);
        if (!(c.pump_wavelength_um > 0.0)) throw ConfigError("pump.wavelength_um must be positive");

        if (!tree.contains("structure")) throw ConfigError("structure is required");
        c.structure = parse_structure(section(tree, "structure"));

        if (!tree.contains("channels") || !tree.at("channels").is_array()) {
            throw ConfigError("channels must be an array");
        }
        const auto& channels = tree.at("channels");
        if (channels.empty()) throw ConfigError("channels must not be empty");
        for (std::size_t i = 0; i < channels.size(); ++i) {
            c.channels.push_back(parse_channel(channels[i], i));
        }

        c.grid = parse_grid(section(tree, "grid"));
        c.modes = parse_modes(section(tree, "modes"));
        c.analysis = parse_analysis(section(tree, "analysis"));
        c.output = parse_output(section(tree, "output"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration " + path.string());
    json tree;
    try {
        tree = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(tree);
}

json to_json(const RunConfig& c)
{
    json structure = {{"kind", std::string(to_string(c.structure.kind))},
                      {"layers", c.structure.layers}};
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) structure[key] = *v;
    };
    put("first_length_um", c.structure.first_length_um);
    put("chirp_um", c.structure.chirp_um);
    put("layer_length_um", c.structure.layer_length_um);
    put("total_length_um", c.structure.total_length_um);
    put("alpha_rad_per_um2", c.structure.alpha_rad_per_um2);
    put("qpm_offset_rad_per_um", c.structure.qpm_offset_rad_per_um);
    if (c.structure.index_chirp) {
        structure["index_chirp_per_um"] = {{"pump", c.structure.index_chirp->pump_per_um},
                                           {"signal", c.structure.index_chirp->signal_per_um},
                                           {"idler", c.structure.index_chirp->idler_per_um}};
    }
    if (c.structure.qpm_layer) structure["qpm_layer"] = *c.structure.qpm_layer;
    if (c.structure.expansion) {
        structure["expansion"] =
            *c.structure.expansion == Expansion::linear ? "linear" : "quadratic";
    }

    json channels = json::array();
    for (const auto& ch : c.channels) {
        channels.push_back({{"pump", ch.pump},
                            {"signal", ch.signal},
                            {"idler", ch.idler},
                            {"signal_polarization", ch.signal_polarization},
                            {"idler_polarization", ch.idler_polarization}});
    }

    json grid = {{"points", c.grid.points}};
    switch (c.grid.kind) {
    case GridSpec::Kind::automatic: grid["kind"] = "auto"; break;
    case GridSpec::Kind::detuning:
        grid["kind"] = "detuning";
        grid["min_rad_per_fs"] = c.grid.lo;
        grid["max_rad_per_fs"] = c.grid.hi;
        break;
    case GridSpec::Kind::wavelength:
        grid["kind"] = "wavelength";
        grid["min_um"] = c.grid.lo;
        grid["max_um"] = c.grid.hi;
        break;
    }

    return {{"schema_version", c.schema_version},
            {"geometry",
             {{"H_um", c.geometry.height_um},
              {"n_core", c.geometry.n_core},
              {"n_clad", c.geometry.n_clad},
              {"Ly_um", c.geometry.width_um}}},
            {"pump", {{"wavelength_um", c.pump_wavelength_um}}},
            {"structure", structure},
            {"channels", channels},
            {"grid", grid},
            {"modes",
             {{"min_wavelength_um", c.modes.min_wavelength_um},
              {"max_wavelength_um", c.modes.max_wavelength_um},
              {"samples", c.modes.samples},
              {"orders", c.modes.orders}}},
            {"analysis",
             {{"peaks", c.analysis.peaks},
              {"entanglement", c.analysis.entanglement},
              {"discreteness", c.analysis.discreteness},
              {"margin", c.analysis.margin},
              {"threshold", c.analysis.threshold},
              {"prominence", c.analysis.prominence}}},
            {"output",
             {{"format", c.output.format},
              {"plot_data", c.output.plot_data},
              {"plot_bins", c.output.plot_bins},
              {"normalize", c.output.normalize}}}};
}

LayeredStructure build_structure(const RunConfig& config)
{
    const auto& s = config.structure;
    if (s.kind == StructureKind::aperiodic_poled) {
        const double chirp = s.chirp_um.value_or(0.0);
        if (s.total_length_um) {
            return build_aperiodic_from_total(*s.total_length_um, chirp, s.layers,
                                              config.geometry);
        }
        return build_aperiodic(*s.first_length_um, chirp, s.layers, config.geometry);
    }
    const double l = s.layer_length_um ? *s.layer_length_um : *s.total_length_um / s.layers;
    ChirpParameters chirp;
    if (s.index_chirp) {
        chirp = with_derived_alpha(config.pump_wavelength_um, *s.index_chirp);
    } else {
        chirp.alpha_rad_per_um2 = *s.alpha_rad_per_um2;
    }
    return build_chirped_pc(l, s.layers, uniform_indices(config.geometry), chirp);
}

TaylorCoefficients channel_coefficients(const SlabGeometry& geometry,
                                        const TriModeChannel& channel, double pump_wavelength_um)
{
    const double sub = 2.0 * pump_wavelength_um;
    // surface cut-off with the offending mode and wavelength before any stencil work
    (void)solve_mode(geometry, channel.pump, pump_wavelength_um);
    (void)solve_mode(geometry, channel.signal, sub);
    (void)solve_mode(geometry, channel.idler, sub);
    const auto curve = [&](int order, Wave wave, double center) {
        return dispersion_curve(geometry, ModeIndex{order, wave}, 0.99 * center, 1.01 * center, 5);
    };
    return taylor_coefficients(curve(channel.pump, Wave::pump, pump_wavelength_um),
                               curve(channel.signal, Wave::signal, sub),
                               curve(channel.idler, Wave::idler, sub), pump_wavelength_um);
}

OutputRecord run(const RunConfig& config)
{
    const Prepared prepared = prepare(config);
    OutputRecord record;
    record.config_echo = to_json(config);
    record.timestamp = utc_timestamp();
    record.qpm_offset = prepared.qpm_offset;
    record.structure_id = structure_id(prepared.structure);

    for (std::size_t c = 0; c < config.channels.size(); ++c) {
        const auto& channel = config.channels[c];
        ChannelOutput out{total_spectrum(prepared.structure, channel, prepared.coefficients[c],
                                         prepared.grid, config.geometry,
                                         config.pump_wavelength_um, prepared.qpm_offset,
                                         config.structure.expansion),
                          std::nullopt};
        if (out.spectrum.forbidden) {
            record.warnings.push_back("channel " + channel.label() +
                                      " is forbidden by mode parity; spectrum is zero");
        }
        record.channels.push_back(std::move(out));
    }

    if (config.output.normalize) {
        double peak = 0.0;
        for (const auto& ch : record.channels) {
            for (const auto& v : ch.spectrum.amplitude) peak = std::max(peak, std::norm(v));
        }
        if (peak > 0.0) {
            const double scale = 1.0 / std::sqrt(peak);
            for (auto& ch : record.channels) {
                for (auto& v : ch.spectrum.amplitude) v *= scale;
                ch.spectrum.normalization = "common scale, max |Phi|^2 = 1 over all channels";
            }
        }
    }

    if (config.analysis.peaks) {
        for (auto& ch : record.channels) {
            if (ch.spectrum.forbidden) continue;
            try {
                ch.peaks = detect_peaks(ch.spectrum, config.analysis.prominence,
                                        config.analysis.margin);
            } catch (const GridTooCoarse& e) {
                record.warnings.push_back("peaks for channel " + ch.spectrum.channel.label() +
                                          ": " + e.what());
            }
        }
    }
    if (config.analysis.entanglement) {
        for (std::size_t a = 0; a < record.channels.size(); ++a) {
            for (std::size_t b = a + 1; b < record.channels.size(); ++b) {
                if (!swapped(config.channels[a], config.channels[b])) continue;
                record.entanglement.push_back(entanglement_overlap(
                    record.channels[a].spectrum, record.channels[b].spectrum,
                    config.analysis.threshold));
            }
        }
    }
    if (config.analysis.discreteness &&
        prepared.structure.kind() == StructureKind::chirped_photonic_crystal) {
        record.discreteness =
            discreteness_criterion(prepared.structure.chirp().alpha_rad_per_um2,
                                   prepared.structure.base_length(), config.analysis.margin);
    }
    return record;
}

std::string format_double(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

json results_json(const OutputRecord& record, bool include_spectra)
{
    json channels = json::array();
    for (const auto& ch : record.channels) {
        const auto& s = ch.spectrum;
        json entry = {{"label", s.channel.label()},
                      {"pump_mode", s.channel.pump},
                      {"signal_mode", s.channel.signal},
                      {"idler_mode", s.channel.idler},
                      {"signal_polarization", s.channel.signal_polarization},
                      {"idler_polarization", s.channel.idler_polarization},
                      {"forbidden", s.forbidden},
                      {"spatial_amplitude", s.spatial_amplitude},
                      {"normalization", s.normalization},
                      {"expansion", s.expansion == Expansion::linear ? "linear" : "quadratic"},
                      {"delta_beta0_rad_per_um", s.coefficients.delta_beta0},
                      {"D_fs_per_um", s.coefficients.d},
                      {"B_fs2_per_um", s.coefficients.b},
                      {"bandwidth_rad_per_fs", spectral_bandwidth(s)},
                      {"peaks", ch.peaks ? peaks_json(*ch.peaks) : json(nullptr)}};
        if (include_spectra) {
            json re = json::array();
            json im = json::array();
            for (const auto& v : s.amplitude) {
                re.push_back(v.real());
                im.push_back(v.imag());
            }
            entry["re_phi"] = re;
            entry["im_phi"] = im;
            entry["abs2_phi"] = s.power();
        }
        channels.push_back(entry);
    }
    json ent = json::array();
    for (const auto& e : record.entanglement) ent.push_back(entanglement_json(e));

    json out = {{"structure_id", record.structure_id},
                {"qpm_offset_rad_per_um", record.qpm_offset},
                {"grid_points", record.channels.empty() ? 0 : record.channels[0].spectrum.detuning.size()},
                {"channels", channels},
                {"entanglement", ent},
                {"warnings", record.warnings}};
    out["discreteness"] = record.discreteness
                              ? json{{"discrete", record.discreteness->discrete},
                                     {"criterion_ratio", record.discreteness->ratio}}
                              : json(nullptr);
    if (include_spectra && !record.channels.empty()) {
        out["omega_rad_per_fs"] = record.channels[0].spectrum.detuning;
        out["lambda_s_um"] = record.channels[0].spectrum.signal_wavelength;
    }
    return out;
}

json record_json(const OutputRecord& record, bool include_spectra)
{
    return {{"metadata",
             {{"tool", "wgspdc"},
              {"version", record.tool_version},
              {"timestamp", record.timestamp},
              {"config", record.config_echo}}},
            {"results", results_json(record, include_spectra)}};
}

std::string spectrum_csv(const OutputRecord& record)
{
    std::string out = "omega_rad_per_fs,lambda_s_um";
    for (const auto& ch : record.channels) {
        const auto label = ch.spectrum.channel.label();
        out += ",re_phi_" + label + ",im_phi_" + label + ",abs2_phi_" + label;
    }
    out += '\n';
    if (record.channels.empty()) return out;
    const auto& grid = record.channels[0].spectrum;
    for (std::size_t i = 0; i < grid.detuning.size(); ++i) {
        out += format_double(grid.detuning[i]);
        out += ',';
        out += format_double(grid.signal_wavelength[i]);
        for (const auto& ch : record.channels) {
            const auto v = ch.spectrum.amplitude[i];
            out += ',';
            out += format_double(v.real());
            out += ',';
            out += format_double(v.imag());
            out += ',';
            out += format_double(std::norm(v));
        }
        out += '\n';
    }
    return out;
}

std::string plot_data_csv(const ChannelOutput& channel, std::size_t bins)
{
    const auto& s = channel.spectrum;
    std::string out = "omega_center_rad_per_fs,lambda_s_center_um,abs2_phi_mean,abs2_phi_max\n";
    const std::size_t n = s.detuning.size();
    if (n == 0 || bins == 0) return out;
    bins = std::min(bins, n);
    const auto power = s.power();
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t first = b * n / bins;
        const std::size_t last = (b + 1) * n / bins;
        double sum = 0.0;
        double peak = 0.0;
        for (std::size_t i = first; i < last; ++i) {
            sum += power[i];
            peak = std::max(peak, power[i]);
        }
        const double center = 0.5 * (s.detuning[first] + s.detuning[last - 1]);
        out += format_double(center) + ',' +
               format_double(signal_wavelength_from_detuning(center, s.pump_wavelength_um)) + ',' +
               format_double(sum / static_cast<double>(last - first)) + ',' +
               format_double(peak) + '\n';
    }
    return out;
}

std::vector<std::filesystem::path> write_outputs(const OutputRecord& record,
                                                 const OutputSpec& output,
                                                 const std::filesystem::path& dir,
                                                 bool include_spectrum)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const bool json_format = output.format == "json";
    if (include_spectrum && !json_format) {
        written.push_back(dir / "spectrum.csv");
        write_file(written.back(), spectrum_csv(record));
    }
    written.push_back(dir / "report.json");
    write_file(written.back(), record_json(record, include_spectrum && json_format).dump(2) + '\n');
    written.push_back(dir / "config_echo.json");
    write_file(written.back(), record.config_echo.dump(2) + '\n');
    if (output.plot_data) {
        for (const auto& ch : record.channels) {
            written.push_back(dir / ("plot_" + ch.spectrum.channel.label() + ".csv"));
            write_file(written.back(), plot_data_csv(ch, output.plot_bins));
        }
    }
    return written;
}

std::vector<ModesOutput> run_modes(const RunConfig& config)
{
    std::vector<ModesOutput> out;
    for (int order : config.modes.orders) {
        out.push_back(ModesOutput{order, cutoff_wavelength(config.geometry, order),
                                  dispersion_curve(config.geometry, ModeIndex{order, Wave::signal},
                                                   config.modes.min_wavelength_um,
                                                   config.modes.max_wavelength_um,
                                                   config.modes.samples)});
    }
    return out;
}

std::vector<std::filesystem::path> write_modes(const std::vector<ModesOutput>& modes,
                                               const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    json summary = json::array();
    for (const auto& m : modes) {
        std::string csv = "lambda_um,n_eff\n";
        std::size_t guided = 0;
        for (std::size_t i = 0; i < m.curve.size(); ++i) {
            const auto& sample = m.curve.samples()[i];
            if (!sample) continue;
            ++guided;
            csv += format_double(sample->wavelength_um) + ',' + format_double(sample->n_eff) + '\n';
        }
        written.push_back(dir / ("modes_mu" + std::to_string(m.order) + ".csv"));
        write_file(written.back(), csv);
        summary.push_back({{"order", m.order},
                           {"cutoff_wavelength_um",
                            std::isfinite(m.cutoff_um) ? json(m.cutoff_um) : json("inf")},
                           {"guided_samples", guided},
                           {"samples", m.curve.size()}});
    }
    written.push_back(dir / "modes.json");
    write_file(written.back(), json{{"modes", summary}}.dump(2) + '\n');
    return written;
}

std::string sweep_parameter_key(const std::string& name)
{
    if (name == "sigma" || name == "chirp_um") return "chirp_um";
    if (name == "alpha" || name == "alpha_rad_per_um2") return "alpha_rad_per_um2";
    if (name == "l" || name == "layer_length_um") return "layer_length_um";
    if (name == "l0" || name == "first_length_um") return "first_length_um";
    if (name == "L" || name == "total_length_um") return "total_length_um";
    if (name == "N" || name == "layers") return "layers";
    if (name == "H" || name == "H_um") return "H_um";
    if (name == "n" || name == "qpm_layer") return "qpm_layer";
    throw ConfigError("unknown sweep parameter '" + name + "'");
}

RunConfig with_parameter(const RunConfig& config, const std::string& name, const std::string& value)
{
    const std::string key = sweep_parameter_key(name);
    double v = 0.0;
    if (const auto err = parse_double_text(value, v); !err.empty()) {
        throw ConfigError("sweep value " + err);
    }
    json tree = to_json(config);
    auto& s = tree["structure"];
    if (key == "layers" || key == "qpm_layer") {
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            throw ConfigError("sweep value '" + value + "' must be an integer for " + key);
        }
        s[key] = static_cast<long long>(v);
        if (key == "qpm_layer") s.erase("qpm_offset_rad_per_um");
    } else if (key == "H_um") {
        tree["geometry"]["H_um"] = v;
    } else {
        s[key] = v;
        if (key == "alpha_rad_per_um2") s.erase("index_chirp_per_um");
        if (key == "layer_length_um" || key == "first_length_um") s.erase("total_length_um");
        if (key == "total_length_um") {
            s.erase("layer_length_um");
            s.erase("first_length_um");
        }
    }
    return parse_config(tree);
}

std::vector<SweepPoint> sweep(const RunConfig& config, const std::string& name,
                              const std::vector<std::string>& values)
{
    (void)sweep_parameter_key(name);
    std::vector<std::future<SweepPoint>> futures;
    futures.reserve(values.size());
    for (const auto& value : values) {
        futures.push_back(std::async(std::launch::async, [&config, &name, value] {
            SweepPoint point{value, std::nullopt, {}};
            try {
                point.record = run(with_parameter(config, name, value));
            } catch (const std::exception& e) {
                point.error = e.what();
            }
            return point;
        }));
    }
    std::vector<SweepPoint> points;
    points.reserve(values.size());
    for (auto& f : futures) points.push_back(f.get());
    return points;
}

std::string sweep_summary_csv(const std::vector<SweepPoint>& points)
{
    std::string out = "value,channel,bandwidth_rad_per_fs,peak_count,overlap_metric,error\n";
    for (const auto& p : points) {
        if (!p.record) {
            out += csv_escape(p.value) + ",,,,," + csv_escape(p.error) + '\n';
            continue;
        }
        for (const auto& ch : p.record->channels) {
            const auto& channel = ch.spectrum.channel;
            std::string overlap;
            for (const auto& e : p.record->entanglement) {
                if (e.channel_a == channel || e.channel_b == channel) {
                    overlap = format_double(e.overlap_metric);
                    break;
                }
            }
            out += csv_escape(p.value) + ',' + channel.label() + ',' +
                   format_double(spectral_bandwidth(ch.spectrum)) + ',' +
                   (ch.peaks ? std::to_string(ch.peaks->count) : std::string()) + ',' + overlap +
                   ",\n";
        }
    }
    return out;
}

std::vector<std::filesystem::path> write_sweep(const std::vector<SweepPoint>& points,
                                               const OutputSpec& output,
                                               const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].record) continue;
        std::ostringstream name;
        name << "point_" << std::setw(3) << std::setfill('0') << i;
        const auto files = write_outputs(*points[i].record, output, dir / name.str());
        written.insert(written.end(), files.begin(), files.end());
    }
    written.push_back(dir / "summary.csv");
    write_file(written.back(), sweep_summary_csv(points));
    return written;
}

double relative_deviation(double a, double b, double floor)
{
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    if (denom == 0.0) return 0.0;
    return std::abs(a - b) / denom;
}

ValidationReport validate(const RunConfig& config)
{
    const Prepared prepared = prepare(config);
    ValidationReport report;
    const auto& grid = prepared.grid;
    const std::size_t stride =
        grid.size() <= kValidationMaxPoints ? 1 : (grid.size() - 1) / (kValidationMaxPoints - 1);
    const auto lengths = prepared.structure.lengths();
    const auto signs = kernel_signs(prepared.structure);

    for (std::size_t c = 0; c < config.channels.size(); ++c) {
        const auto& channel = config.channels[c];
        if (!parity_allowed(channel)) continue;
        const double spatial =
            channel_spatial_amplitude(config.geometry, channel, config.pump_wavelength_um).value;
        std::vector<std::array<double, 3>> values;
        double scale = 0.0;
        for (std::size_t i = 0; i < grid.size(); i += stride) {
            const auto profile =
                phase_mismatch_profile(prepared.structure, prepared.coefficients[c], grid[i],
                                       prepared.qpm_offset, config.structure.expansion);
            const double layer = std::norm(layer_sum(profile, lengths, signs, spatial));
            const double closed = closed_form_power(prepared.structure, profile, spatial);
            const double oracle =
                std::norm(oracle_direct_integration(prepared.structure, profile, spatial));
            values.push_back({layer, closed, oracle});
            scale = std::max({scale, layer, closed, oracle});
        }
        const double floor = 1e-12 * scale;
        for (const auto& v : values) {
            const double lc = relative_deviation(v[0], v[1], floor);
            const double lo = relative_deviation(v[0], v[2], floor);
            const double co = relative_deviation(v[1], v[2], floor);
            report.max_deviation_layer_closed = std::max(report.max_deviation_layer_closed, lc);
            report.max_deviation_layer_oracle = std::max(report.max_deviation_layer_oracle, lo);
            report.max_deviation_closed_oracle = std::max(report.max_deviation_closed_oracle, co);
        }
        report.points += values.size();
    }
    report.max_deviation = std::max({report.max_deviation_layer_closed,
                                     report.max_deviation_layer_oracle,
                                     report.max_deviation_closed_oracle});
    report.passed = report.max_deviation <= kValidationTolerance;
    return report;
}

}  // namespace wgspdc
