#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "wgspdc/modes.hpp"

namespace wgspdc {

enum class StructureKind { aperiodic_poled, chirped_photonic_crystal };

[[nodiscard]] std::string_view to_string(StructureKind kind);

struct WaveIndices {
    double n_core = 0.0;
    double n_clad = 0.0;
};

// Per-wave indices, ordered pump, signal, idler.
using IndexTriple = std::array<WaveIndices, 3>;

[[nodiscard]] IndexTriple uniform_indices(const SlabGeometry& geometry);

struct Layer {
    double length_um = 0.0;
    int chi_sign = 1;  // sign of chi(2); magnitude normalized to 1
    IndexTriple indices{};

    [[nodiscard]] const WaveIndices& wave(Wave w) const
    {
        return indices[static_cast<std::size_t>(w)];
    }
};

// Linear refractive-index chirp of the photonic-crystal core (per um of
// propagation, one slope per wave) and the resulting spatial chirp of the
// phase mismatch.
struct ChirpParameters {
    double pump_per_um = 0.0;
    double signal_per_um = 0.0;
    double idler_per_um = 0.0;
    double alpha_rad_per_um2 = 0.0;
};

class LayeredStructure {
public:
    LayeredStructure(StructureKind kind, std::vector<Layer> layers, double base_length_um,
                     double length_chirp_um, ChirpParameters chirp);

    [[nodiscard]] StructureKind kind() const { return kind_; }
    [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
    [[nodiscard]] std::size_t size() const { return layers_.size(); }
    [[nodiscard]] std::vector<double> lengths() const;
    [[nodiscard]] std::vector<int> chi_signs() const;

    // l0 for the aperiodic family, l for the photonic crystal.
    [[nodiscard]] double base_length() const { return base_length_um_; }
    // Layer-length increment; zero for the photonic crystal.
    [[nodiscard]] double length_chirp() const { return length_chirp_um_; }
    [[nodiscard]] const ChirpParameters& chirp() const { return chirp_; }
    [[nodiscard]] double total_length() const { return total_length_um_; }

    [[nodiscard]] LayeredStructure with_flipped_signs() const;

private:
    StructureKind kind_;
    std::vector<Layer> layers_;
    double base_length_um_;
    double length_chirp_um_;
    ChirpParameters chirp_;
    double total_length_um_;
};

/// Aperiodically poled core: layer m (0-based) has length l0 + m*chirp and
/// chi sign (-1)^m. Throws InvalidLayerLength if any length is not positive.
[[nodiscard]] LayeredStructure build_aperiodic(double first_length_um, double chirp_um,
                                               int layers, const SlabGeometry& geometry);

/// Same family parameterized by the total length; l0 = (L - chirp N(N-1)/2) / N.
[[nodiscard]] LayeredStructure build_aperiodic_from_total(double total_length_um,
                                                          double chirp_um, int layers,
                                                          const SlabGeometry& geometry);

/// Chirped photonic-crystal core with equal layers of length l. In layer m
/// the core index of wave q is n_c^q + m l chirp_q and the cladding index is
/// matched so that n_c^2 - n_cl^2 is the same in every layer.
[[nodiscard]] LayeredStructure build_chirped_pc(double layer_length_um, int layers,
                                                const IndexTriple& base,
                                                const ChirpParameters& chirp);

/// Cladding index of layer m that keeps the transverse wavevector of the
/// guided modes unchanged: sqrt(n_cl0^2 + m l chirp (2 n_c0 + m l chirp)).
/// Throws GuidanceViolation when the radicand is not positive or the result
/// reaches the layer's core index.
[[nodiscard]] double matched_cladding_index(double n_clad0, double n_core0,
                                            double chirp_per_um, int layer, double layer_length_um);

/// alpha = (w_p / c)(chirp_p - chirp_s/2 - chirp_i/2).
[[nodiscard]] double spatial_chirp_alpha(double pump_wavelength_um, const ChirpParameters& chirp);

/// Returns a copy of chirp with alpha derived from the index slopes.
[[nodiscard]] ChirpParameters with_derived_alpha(double pump_wavelength_um, ChirpParameters chirp);

/// Pump index slope giving the requested alpha when the subharmonic slopes
/// are zero.
[[nodiscard]] double pump_chirp_for_alpha(double alpha_rad_per_um2, double pump_wavelength_um);

enum class Expansion { linear, quadratic };

// Aperiodic spectra keep the second-order term; the photonic-crystal kernel
// is linear in detuning.
[[nodiscard]] Expansion default_expansion(StructureKind kind);

/// Per-layer phase mismatch at detuning Omega (rad/fs), m = 1..N:
///   aperiodic:        (dbeta0 - qpm_offset) + D Omega [+ B Omega^2]
///   photonic crystal: (dbeta0 - qpm_offset) + D Omega [+ B Omega^2] + alpha (m-1) l
/// For the aperiodic family the value is the full mismatch seen by the
/// alternating domains. For the photonic crystal it is the residual after
/// first-order quasi-phase matching (pi/l), i.e. the argument of the
/// sign-free kernel.
[[nodiscard]] std::vector<double> phase_mismatch_profile(const LayeredStructure& structure,
                                                         const TaylorCoefficients& coefficients,
                                                         double detuning_rad_per_fs,
                                                         double qpm_offset_rad_per_um,
                                                         std::optional<Expansion> expansion = {});

/// Offset that places the quasi-phase-matching peak of layer `qpm_layer`
/// (1-based) at zero detuning. Aperiodic: mismatch pi/l_n at Omega = 0.
/// Photonic crystal: residual -(n-1) alpha l, the layer-tuning condition
/// pi/l + (n-1) alpha l expressed in the kernel's sign convention.
[[nodiscard]] double matched_qpm_offset(const LayeredStructure& structure,
                                        const TaylorCoefficients& coefficients, int qpm_layer);

/// Signal-wavelength grid to detuning: Omega = 2 pi c / lambda_s - w_p/2.
[[nodiscard]] double detuning_from_signal_wavelength(double signal_wavelength_um,
                                                     double pump_wavelength_um);
[[nodiscard]] double signal_wavelength_from_detuning(double detuning_rad_per_fs,
                                                     double pump_wavelength_um);

}  // namespace wgspdc
