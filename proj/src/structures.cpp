#include "wgspdc/structures.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"

namespace wgspdc {

std::string_view to_string(StructureKind kind)
{
    switch (kind) {
    case StructureKind::aperiodic_poled: return "aperiodic";
    case StructureKind::chirped_photonic_crystal: return "photonic_crystal";
    }
    return "unknown";
}

IndexTriple uniform_indices(const SlabGeometry& geometry)
{
    const WaveIndices w{geometry.n_core, geometry.n_clad};
    return {w, w, w};
}

LayeredStructure::LayeredStructure(StructureKind kind, std::vector<Layer> layers,
                                   double base_length_um, double length_chirp_um,
                                   ChirpParameters chirp)
    : kind_(kind), layers_(std::move(layers)), base_length_um_(base_length_um),
      length_chirp_um_(length_chirp_um), chirp_(chirp), total_length_um_(0.0)
{
    if (layers_.empty()) {
        throw InvalidLayerLength("a layered structure needs at least one layer");
    }
    for (const auto& layer : layers_) {
        if (!(layer.length_um > 0.0)) {
            throw InvalidLayerLength("layer lengths must be positive");
        }
        total_length_um_ += layer.length_um;
    }
}

std::vector<double> LayeredStructure::lengths() const
{
    std::vector<double> out;
    out.reserve(layers_.size());
    for (const auto& layer : layers_) out.push_back(layer.length_um);
    return out;
}

std::vector<int> LayeredStructure::chi_signs() const
{
    std::vector<int> out;
    out.reserve(layers_.size());
    for (const auto& layer : layers_) out.push_back(layer.chi_sign);
    return out;
}

LayeredStructure LayeredStructure::with_flipped_signs() const
{
    auto flipped = layers_;
    for (auto& layer : flipped) layer.chi_sign = -layer.chi_sign;
    return LayeredStructure(kind_, std::move(flipped), base_length_um_, length_chirp_um_, chirp_);
}

LayeredStructure build_aperiodic(double first_length_um, double chirp_um, int layers,
                                 const SlabGeometry& geometry)
{
    geometry.validate();
    if (layers < 1) {
        throw InvalidLayerLength("layer count must be at least 1");
    }
    const IndexTriple indices = uniform_indices(geometry);
    std::vector<Layer> out;
    out.reserve(static_cast<std::size_t>(layers));
    for (int m = 0; m < layers; ++m) {
        const double length = first_length_um + m * chirp_um;
        if (!(length > 0.0)) {
            std::ostringstream os;
            os << "layer " << m << " would have non-positive length " << length << " um";
            throw InvalidLayerLength(os.str());
        }
        out.push_back(Layer{length, m % 2 == 0 ? 1 : -1, indices});
    }
    return LayeredStructure(StructureKind::aperiodic_poled, std::move(out), first_length_um,
                            chirp_um, ChirpParameters{});
}

LayeredStructure build_aperiodic_from_total(double total_length_um, double chirp_um, int layers,
                                            const SlabGeometry& geometry)
{
    if (layers < 1) {
        throw InvalidLayerLength("layer count must be at least 1");
    }
    const double n = layers;
    const double first = (total_length_um - chirp_um * n * (n - 1.0) / 2.0) / n;
    return build_aperiodic(first, chirp_um, layers, geometry);
}

double matched_cladding_index(double n_clad0, double n_core0, double chirp_per_um, int layer,
                              double layer_length_um)
{
    const double shift = layer * layer_length_um * chirp_per_um;
    const double radicand = n_clad0 * n_clad0 + shift * (2.0 * n_core0 + shift);
    const double core = n_core0 + shift;
    if (!(radicand > 0.0)) {
        std::ostringstream os;
        os << "matched cladding index of layer " << layer << " has non-positive square "
           << radicand;
        throw GuidanceViolation(os.str());
    }
    const double clad = std::sqrt(radicand);
    if (!(clad < core)) {
        std::ostringstream os;
        os << "layer " << layer << " loses guidance: cladding " << clad << " >= core " << core;
        throw GuidanceViolation(os.str());
    }
    return clad;
}

LayeredStructure build_chirped_pc(double layer_length_um, int layers, const IndexTriple& base,
                                  const ChirpParameters& chirp)
{
    if (!(layer_length_um > 0.0)) {
        throw InvalidLayerLength("photonic-crystal layer length must be positive");
    }
    if (layers < 1) {
        throw InvalidLayerLength("layer count must be at least 1");
    }
    const std::array<double, 3> slopes{chirp.pump_per_um, chirp.signal_per_um, chirp.idler_per_um};
    std::vector<Layer> out;
    out.reserve(static_cast<std::size_t>(layers));
    for (int m = 0; m < layers; ++m) {
        Layer layer{layer_length_um, m % 2 == 0 ? 1 : -1, {}};
        for (std::size_t q = 0; q < 3; ++q) {
            const auto& b = base[q];
            if (!(b.n_core > b.n_clad) || !(b.n_clad > 0.0)) {
                throw GuidanceViolation("base indices must satisfy n_core > n_clad > 0");
            }
            const double core = b.n_core + m * layer_length_um * slopes[q];
            if (!(core > 0.0)) {
                throw GuidanceViolation("chirped core index became non-positive");
            }
            layer.indices[q] = WaveIndices{
                core, matched_cladding_index(b.n_clad, b.n_core, slopes[q], m, layer_length_um)};
        }
        out.push_back(layer);
    }
    return LayeredStructure(StructureKind::chirped_photonic_crystal, std::move(out),
                            layer_length_um, 0.0, chirp);
}

double spatial_chirp_alpha(double pump_wavelength_um, const ChirpParameters& chirp)
{
    const double k_pump = angular_frequency(pump_wavelength_um) / kSpeedOfLight;
    return k_pump * (chirp.pump_per_um - chirp.signal_per_um / 2.0 - chirp.idler_per_um / 2.0);
}

ChirpParameters with_derived_alpha(double pump_wavelength_um, ChirpParameters chirp)
{
    chirp.alpha_rad_per_um2 = spatial_chirp_alpha(pump_wavelength_um, chirp);
    return chirp;
}

double pump_chirp_for_alpha(double alpha_rad_per_um2, double pump_wavelength_um)
{
    return alpha_rad_per_um2 * kSpeedOfLight / angular_frequency(pump_wavelength_um);
}

Expansion default_expansion(StructureKind kind)
{
    return kind == StructureKind::aperiodic_poled ? Expansion::quadratic : Expansion::linear;
}

std::vector<double> phase_mismatch_profile(const LayeredStructure& structure,
                                           const TaylorCoefficients& coefficients,
                                           double detuning_rad_per_fs, double qpm_offset_rad_per_um,
                                           std::optional<Expansion> expansion)
{
    const Expansion order = expansion.value_or(default_expansion(structure.kind()));
    double common = (coefficients.delta_beta0 - qpm_offset_rad_per_um) +
                    coefficients.d * detuning_rad_per_fs;
    if (order == Expansion::quadratic) {
        common += coefficients.b * detuning_rad_per_fs * detuning_rad_per_fs;
    }
    std::vector<double> profile(structure.size(), common);
    if (structure.kind() == StructureKind::chirped_photonic_crystal) {
        const double step = structure.chirp().alpha_rad_per_um2 * structure.base_length();
        for (std::size_t m = 0; m < profile.size(); ++m) {
            profile[m] = common + step * static_cast<double>(m);
        }
    }
    return profile;
}

double matched_qpm_offset(const LayeredStructure& structure, const TaylorCoefficients& coefficients,
                          int qpm_layer)
{
    if (qpm_layer < 1 || static_cast<std::size_t>(qpm_layer) > structure.size()) {
        std::ostringstream os;
        os << "QPM layer " << qpm_layer << " outside [1, " << structure.size() << "]";
        throw IndexOutOfRange(os.str());
    }
    const auto& layer = structure.layers()[static_cast<std::size_t>(qpm_layer - 1)];
    if (structure.kind() == StructureKind::aperiodic_poled) {
        // A single layer has no domain inversion; its lobe sits at zero mismatch.
        const double target = structure.size() == 1 ? 0.0 : kPi / layer.length_um;
        return coefficients.delta_beta0 - target;
    }
    const double residual =
        -(qpm_layer - 1) * structure.chirp().alpha_rad_per_um2 * structure.base_length();
    return coefficients.delta_beta0 - residual;
}

double detuning_from_signal_wavelength(double signal_wavelength_um, double pump_wavelength_um)
{
    return angular_frequency(signal_wavelength_um) - angular_frequency(pump_wavelength_um) / 2.0;
}

double signal_wavelength_from_detuning(double detuning_rad_per_fs, double pump_wavelength_um)
{
    return vacuum_wavelength(angular_frequency(pump_wavelength_um) / 2.0 + detuning_rad_per_fs);
}

}  // namespace wgspdc
