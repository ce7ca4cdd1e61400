#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wgspdc/spectrum.hpp"

namespace wgspdc {

inline constexpr double kDefaultProminence = 0.1;
inline constexpr double kDefaultMargin = 3.0;
inline constexpr double kDefaultOverlapThreshold = 0.1;
inline constexpr std::size_t kMinSamplesPerLobe = 5;

struct Peak {
    double detuning = 0.0;    // rad/fs, parabolic refinement of the sample maximum
    double height = 0.0;      // |Phi|^2 at the sample maximum
    double width = 0.0;       // full width at height/e, rad/fs
    double prominence = 0.0;  // absolute, same units as height
    std::size_t index = 0;    // grid index of the sample maximum
};

struct PeakReport {
    std::vector<Peak> peaks;
    std::size_t count = 0;
    bool discrete = false;
    double criterion_ratio = 0.0;
    double margin = kDefaultMargin;
    double prominence = kDefaultProminence;

    // Detuning at which each layer's mismatch reaches its lobe target; layers
    // with no real solution inside the grid are omitted.
    std::vector<double> predicted;
    // Largest distance from a predicted position to the nearest detected peak.
    std::optional<double> max_position_error;
    // Two candidate spacings between neighbouring layer peaks: alpha l / D
    // from the mismatch profile, alpha l / (2 D) as printed.
    std::optional<double> spacing_profile;
    std::optional<double> spacing_half;
};

struct Discreteness {
    bool discrete = false;
    double ratio = 0.0;
};

/// ratio = alpha l^2 sqrt(gamma) / 4 with gamma = 0.189; discrete iff
/// ratio >= margin. Throws DomainError for l <= 0 or margin < 1.
[[nodiscard]] Discreteness discreteness_criterion(double alpha_rad_per_um2, double layer_length_um,
                                                  double margin = kDefaultMargin);

/// Degenerate-frequency mismatch that phase matches layer n (1-based) of an
/// N-layer photonic crystal: pi/l + (n-1) alpha l. Throws IndexOutOfRange
/// when n is outside [1, N].
[[nodiscard]] double qpm_layer_tuning(double layer_length_um, double alpha_rad_per_um2, int n,
                                      int layers);

/// Interior local maxima of y whose topographic prominence is at least
/// prominence * max(y). The prominence of a peak is its height above the
/// higher of the two lowest points reached before the signal climbs above
/// the peak on either side (or the grid ends).
[[nodiscard]] std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                                           double prominence = kDefaultProminence);

/// Peak report for |Phi|^2 of a spectrum. Throws GridTooCoarse when fewer
/// than five samples span the narrowest predicted main lobe.
[[nodiscard]] PeakReport detect_peaks(const SpectrumResult& result,
                                      double prominence = kDefaultProminence,
                                      double margin = kDefaultMargin);

/// Extent of the region where |Phi|^2 >= max/2 (outermost crossings), rad/fs.
/// Zero for an all-zero spectrum.
[[nodiscard]] double spectral_bandwidth(const SpectrumResult& result);

struct EntanglementReport {
    std::optional<std::pair<double, double>> overlap_interval;  // rad/fs
    double overlap_metric = 0.0;
    double coexistence_width = 0.0;  // total detuning measure where both exceed threshold
    double threshold = kDefaultOverlapThreshold;
    TriModeChannel channel_a;
    TriModeChannel channel_b;
};

/// Spectral coexistence of two channels on a shared grid. The interval is the
/// longest contiguous run where both |Phi|^2 exceed threshold times their own
/// maxima; the metric is int|a||b| / sqrt(int|a|^2 int|b|^2) by the
/// trapezoidal rule. Throws GridMismatch when the grids differ.
[[nodiscard]] EntanglementReport entanglement_overlap(const SpectrumResult& a,
                                                      const SpectrumResult& b,
                                                      double threshold = kDefaultOverlapThreshold);

/// Same on raw magnitudes |Phi| sampled on x.
[[nodiscard]] EntanglementReport entanglement_overlap(std::span<const double> x,
                                                      std::span<const double> magnitude_a,
                                                      std::span<const double> magnitude_b,
                                                      double threshold = kDefaultOverlapThreshold);

/// Scales both spectra by one common factor so that the larger maximum of
/// |Phi|^2 becomes 1. All-zero pairs are returned unchanged.
void normalize_pair(SpectrumResult& a, SpectrumResult& b);

}  // namespace wgspdc
