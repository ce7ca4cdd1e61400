#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wgspdc/modes.hpp"
#include "wgspdc/structures.hpp"

namespace wgspdc {

// One SPDC pathway: spatial mode orders of pump, signal and idler plus the
// polarization labels carried by the subharmonics (TE throughout).
struct TriModeChannel {
    int pump = 0;
    int signal = 0;
    int idler = 0;
    std::string signal_polarization = "H";
    std::string idler_polarization = "V";

    [[nodiscard]] int odd_count() const;
    [[nodiscard]] std::string label() const;  // e.g. "p1s0i1"

    friend bool operator==(const TriModeChannel&, const TriModeChannel&) = default;
};

/// True iff an even number of the three waves are in odd modes; otherwise
/// the transverse overlap integral vanishes identically.
[[nodiscard]] bool parity_allowed(const TriModeChannel& channel);

struct SpatialAmplitude {
    double value = 0.0;
    TriModeChannel channel;
    std::array<double, 3> kz{};  // pump, signal, idler, rad/um
};

/// (2/H) * integral over the core of u_p u_s u_i with u = cos(k_z z) for
/// even modes and sin(k_z z) for odd modes (A0 = 1). Expanding every factor
/// into exponentials gives a signed sum of sinc((k_p +- k_s +- k_i) H/2)
/// terms; channels with an odd number of sine factors return exactly 0.
[[nodiscard]] SpatialAmplitude spatial_amplitude(const SlabGeometry& geometry,
                                                 const TriModeChannel& channel, double kz_p,
                                                 double kz_s, double kz_i);

/// Spatial amplitude at the degenerate point: pump at lambda_p, both
/// subharmonics at 2 lambda_p. Propagates CutoffError.
[[nodiscard]] SpatialAmplitude channel_spatial_amplitude(const SlabGeometry& geometry,
                                                         const TriModeChannel& channel,
                                                         double pump_wavelength_um);

// sin(x)/x with the removable singularity handled by its series.
[[nodiscard]] double sinc(double x);

/// Amplitude generated in one layer:
///   l chi A exp(-i(phase + dbeta l/2)) sinc(dbeta l/2)
[[nodiscard]] std::complex<double> layer_amplitude(double mismatch_rad_per_um, double length_um,
                                                   double phase_rad, int chi_sign,
                                                   double spatial);

/// Phase accumulated before layer m (1-based): sum_{n<m} dbeta_n l_n.
[[nodiscard]] double accumulated_phase(std::span<const double> profile,
                                       std::span<const double> lengths, std::size_t layer);

/// Signs entering the layer sum. Aperiodic domains keep their alternating
/// chi signs. In the photonic crystal the mismatch is measured from the
/// first-order QPM momentum, which absorbs the domain inversion, so every
/// layer carries the sign of the first.
[[nodiscard]] std::vector<int> kernel_signs(const LayeredStructure& structure);

/// Coherent superposition of layer_amplitude over all layers.
[[nodiscard]] std::complex<double> layer_sum(std::span<const double> profile,
                                             std::span<const double> lengths,
                                             std::span<const int> signs, double spatial);

// Detuning dependence of the per-layer mismatch:
//   dbeta_m(Omega) = offsets[m] + linear Omega + quadratic Omega^2
// together with where each layer's lobe peaks and how wide the lobes are.
struct MismatchModel {
    std::vector<double> offsets;
    double linear = 0.0;
    double quadratic = 0.0;
    std::vector<double> lengths;
    std::vector<double> lobe_targets;  // mismatch at which layer m peaks
    double lobe_width = 0.0;           // full main-lobe width, rad/um
    double band_half_width = 0.0;      // auto-grid margin around each target, rad/um

    [[nodiscard]] double at(std::size_t layer, double detuning) const;
    [[nodiscard]] double slope(double detuning) const;

    /// Detuning nearest zero at which layer m reaches its lobe target.
    [[nodiscard]] std::optional<double> lobe_center(std::size_t layer) const;

    /// Detuning nearest zero at which offsets[m] + ... equals value.
    [[nodiscard]] std::optional<double> solve(std::size_t layer, double value) const;
};

[[nodiscard]] MismatchModel mismatch_model(const LayeredStructure& structure,
                                           const TaylorCoefficients& coefficients,
                                           double qpm_offset_rad_per_um,
                                           std::optional<Expansion> expansion = {});

/// Smallest detuning interval containing every layer's lobe target plus
/// band_half_width on either side. An edge the quadratic mismatch never
/// reaches is replaced by the vertex of the parabola. Throws DomainError when the mismatch does
/// not depend on detuning.
[[nodiscard]] std::pair<double, double> detuning_band(const MismatchModel& model);

[[nodiscard]] std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

inline constexpr std::size_t kDefaultGridPoints = 2001;

struct SpectrumResult {
    std::vector<double> detuning;            // rad/fs
    std::vector<double> signal_wavelength;   // um
    std::vector<std::complex<double>> amplitude;
    TriModeChannel channel;
    std::string structure_id;
    std::string normalization = "arbitrary units, A0 = chi0 = 1";
    bool forbidden = false;

    double spatial_amplitude = 0.0;
    double pump_wavelength_um = 0.0;
    double qpm_offset = 0.0;
    TaylorCoefficients coefficients;
    Expansion expansion = Expansion::quadratic;
    StructureKind kind = StructureKind::aperiodic_poled;
    std::size_t layer_count = 0;
    double base_length_um = 0.0;
    double alpha_rad_per_um2 = 0.0;
    MismatchModel model;

    [[nodiscard]] std::vector<double> power() const;
};

[[nodiscard]] std::string structure_id(const LayeredStructure& structure);

/// Biphoton spectral amplitude sum_m Phi_m(Omega) on the detuning grid. A
/// forbidden channel yields an all-zero result with `forbidden` set.
[[nodiscard]] SpectrumResult total_spectrum(const LayeredStructure& structure,
                                            const TriModeChannel& channel,
                                            const TaylorCoefficients& coefficients,
                                            std::span<const double> detuning,
                                            const SlabGeometry& geometry,
                                            double pump_wavelength_um, double qpm_offset_rad_per_um,
                                            std::optional<Expansion> expansion = {});

/// |Phi|^2 of the aperiodically poled structure for a uniform mismatch:
///   (4A^2/dbeta^2) sum_m [ sin^2(dbeta l_m/2)
///       + 2 sum_p (-1)^p sin(dbeta l_m/2) sin(dbeta l_{m+p}/2) cos(zeta_mp) ]
/// with l_m = l0 + (m-1) chirp and zeta_mp = dbeta p (l0 + (m + p/2 - 1) chirp).
/// Below |dbeta| < 1e-8 rad/um the layer sum is evaluated instead.
[[nodiscard]] double closed_form_aperiodic(double first_length_um, double chirp_um, int layers,
                                           double spatial, double mismatch_rad_per_um);

/// |Phi|^2 of the chirped photonic crystal with dbeta_m = first + alpha (m-1) l:
///   A^2 l^2 sum_m [ sinc^2(dbeta_m l/2)
///       + 2 sum_p sinc(dbeta_m l/2) sinc(dbeta_{m+p} l/2) cos(zeta_mp) ]
/// with zeta_mp = p l (first + alpha l (m - 1 + p/2)).
[[nodiscard]] double closed_form_pc_mismatch(double layer_length_um, int layers,
                                             double alpha_rad_per_um2, double first_mismatch,
                                             double spatial);

/// Kernel written with a detuning slope: first-layer mismatch = slope * Omega.
[[nodiscard]] double closed_form_pc(double layer_length_um, int layers, double alpha_rad_per_um2,
                                    double slope, double spatial, double detuning);

/// Dispatches to the closed form matching the structure family. The profile
/// must come from phase_mismatch_profile for the same structure.
[[nodiscard]] double closed_form_power(const LayeredStructure& structure,
                                       std::span<const double> profile, double spatial);

/// Reference amplitude by adaptive Gauss-Kronrod quadrature of
/// chi A exp(-i psi(x)) over every layer, psi being the continuously
/// accumulated mismatch phase. No sinc closed form is used. Throws
/// QuadratureNonConvergence when refinement exceeds depth 30.
[[nodiscard]] std::complex<double> oracle_direct_integration(const LayeredStructure& structure,
                                                             std::span<const double> profile,
                                                             double spatial);

}  // namespace wgspdc
