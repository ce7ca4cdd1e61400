#include "wgspdc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"

namespace wgspdc {

namespace {

constexpr double kSeriesThreshold = 1e-4;
constexpr double kClosedFormMinMismatch = 1e-8;

}  // namespace

int TriModeChannel::odd_count() const
{
    return (pump % 2 != 0) + (signal % 2 != 0) + (idler % 2 != 0);
}

std::string TriModeChannel::label() const
{
    return "p" + std::to_string(pump) + "s" + std::to_string(signal) + "i" + std::to_string(idler);
}

bool parity_allowed(const TriModeChannel& channel)
{
    return channel.odd_count() % 2 == 0;
}

double sinc(double x)
{
    if (std::abs(x) < kSeriesThreshold) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

SpatialAmplitude spatial_amplitude(const SlabGeometry& geometry, const TriModeChannel& channel,
                                   double kz_p, double kz_s, double kz_i)
{
    geometry.validate();
    SpatialAmplitude result{0.0, channel, {kz_p, kz_s, kz_i}};
    if (!parity_allowed(channel)) {
        return result;
    }
    // u = cos(kz) = (e+ + e-)/2, u = sin(kz) = (e+ - e-)/(2i). With the pump
    // exponent fixed to +1, the terms pair up with their mirror images and
    // (2/H) int e^{iqz} dz = 2 sinc(qH/2), so
    //   A = (1/2) i^{-s} sum_{e_s, e_i} (prod of e over sine factors) sinc(...)
    // where s is the (even) number of sine factors.
    const std::array<int, 3> orders{channel.pump, channel.signal, channel.idler};
    const double half_height = geometry.height_um / 2.0;
    double sum = 0.0;
    for (int es : {1, -1}) {
        for (int ei : {1, -1}) {
            const std::array<int, 3> eps{1, es, ei};
            double sign = 1.0;
            for (std::size_t q = 0; q < 3; ++q) {
                if (orders[q] % 2 != 0) sign *= eps[q];
            }
            sum += sign * sinc((kz_p + es * kz_s + ei * kz_i) * half_height);
        }
    }
    const int sines = channel.odd_count();
    const double i_power = (sines / 2) % 2 == 0 ? 1.0 : -1.0;  // i^{-s} for even s
    result.value = 0.5 * i_power * sum;
    return result;
}

SpatialAmplitude channel_spatial_amplitude(const SlabGeometry& geometry,
                                           const TriModeChannel& channel, double pump_wavelength_um)
{
    const auto pump = solve_mode(geometry, channel.pump, pump_wavelength_um);
    const auto signal = solve_mode(geometry, channel.signal, 2.0 * pump_wavelength_um);
    const auto idler = solve_mode(geometry, channel.idler, 2.0 * pump_wavelength_um);
    return spatial_amplitude(geometry, channel, pump.k_z, signal.k_z, idler.k_z);
}

std::complex<double> layer_amplitude(double mismatch_rad_per_um, double length_um,
                                     double phase_rad, int chi_sign, double spatial)
{
    const double half = mismatch_rad_per_um * length_um / 2.0;
    const double magnitude = length_um * chi_sign * spatial * sinc(half);
    return std::polar(1.0, -(phase_rad + half)) * magnitude;
}

double accumulated_phase(std::span<const double> profile, std::span<const double> lengths,
                         std::size_t layer)
{
    if (layer == 0 || layer > profile.size() + 1 || profile.size() != lengths.size()) {
        throw IndexOutOfRange("accumulated_phase: layer index out of range");
    }
    double phase = 0.0;
    for (std::size_t n = 0; n + 1 < layer; ++n) {
        phase += profile[n] * lengths[n];
    }
    return phase;
}

std::vector<int> kernel_signs(const LayeredStructure& structure)
{
    auto signs = structure.chi_signs();
    if (structure.kind() == StructureKind::chirped_photonic_crystal) {
        std::fill(signs.begin(), signs.end(), signs.front());
    }
    return signs;
}

std::complex<double> layer_sum(std::span<const double> profile, std::span<const double> lengths,
                               std::span<const int> signs, double spatial)
{
    if (profile.size() != lengths.size() || profile.size() != signs.size()) {
        throw DomainError("layer_sum: profile, lengths and signs must have equal size");
    }
    std::complex<double> total{0.0, 0.0};
    double phase = 0.0;
    for (std::size_t m = 0; m < profile.size(); ++m) {
        total += layer_amplitude(profile[m], lengths[m], phase, signs[m], spatial);
        phase += profile[m] * lengths[m];
    }
    return total;
}

double MismatchModel::at(std::size_t layer, double detuning) const
{
    return offsets.at(layer) + linear * detuning + quadratic * detuning * detuning;
}

double MismatchModel::slope(double detuning) const
{
    return linear + 2.0 * quadratic * detuning;
}

std::optional<double> MismatchModel::solve(std::size_t layer, double value) const
{
    // quadratic W^2 + linear W + (offset - value) = 0, root nearest zero
    const double c = offsets.at(layer) - value;
    if (quadratic == 0.0) {
        if (linear == 0.0) return std::nullopt;
        return -c / linear;
    }
    const double disc = linear * linear - 4.0 * quadratic * c;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double q = -0.5 * (linear + std::copysign(root, linear));
    if (q == 0.0) return 0.0;
    const double r1 = q / quadratic;
    const double r2 = c / q;
    return std::abs(r1) < std::abs(r2) ? r1 : r2;
}

std::optional<double> MismatchModel::lobe_center(std::size_t layer) const
{
    return solve(layer, lobe_targets.at(layer));
}

MismatchModel mismatch_model(const LayeredStructure& structure,
                             const TaylorCoefficients& coefficients, double qpm_offset_rad_per_um,
                             std::optional<Expansion> expansion)
{
    const Expansion order = expansion.value_or(default_expansion(structure.kind()));
    MismatchModel model;
    model.offsets = phase_mismatch_profile(structure, coefficients, 0.0, qpm_offset_rad_per_um,
                                           order);
    model.linear = coefficients.d;
    model.quadratic = order == Expansion::quadratic ? coefficients.b : 0.0;
    model.lengths = structure.lengths();
    model.lobe_targets.resize(structure.size(), 0.0);
    if (structure.kind() == StructureKind::aperiodic_poled) {
        if (structure.size() > 1) {
            for (std::size_t m = 0; m < structure.size(); ++m) {
                model.lobe_targets[m] = kPi / model.lengths[m];
            }
        }
        model.lobe_width = 4.0 * kPi / structure.total_length();
        model.band_half_width = 16.0 * kPi / structure.total_length();
    } else {
        model.lobe_width = 4.0 * kPi / structure.base_length();
        model.band_half_width = 16.0 * kPi / structure.base_length();
    }
    return model;
}

std::pair<double, double> detuning_band(const MismatchModel& model)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < model.offsets.size(); ++m) {
        for (double side : {-1.0, 1.0}) {
            auto root = model.solve(m, model.lobe_targets[m] + side * model.band_half_width);
            if (!root && model.quadratic != 0.0) {
                // edge beyond the parabola's extremum: the lobe reaches the vertex
                root = -model.linear / (2.0 * model.quadratic);
            }
            if (root) {
                lo = std::min(lo, *root);
                hi = std::max(hi, *root);
            }
        }
    }
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("phase mismatch does not vary with detuning; supply an explicit grid");
    }
    return {lo, hi};
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points)
{
    if (points < 2 || !(hi > lo)) {
        throw DomainError("uniform grid needs at least two points and hi > lo");
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = i + 1 == points ? hi : lo + (hi - lo) * t;
    }
    return grid;
}

std::vector<double> SpectrumResult::power() const
{
    std::vector<double> out;
    out.reserve(amplitude.size());
    for (const auto& a : amplitude) out.push_back(std::norm(a));
    return out;
}

std::string structure_id(const LayeredStructure& structure)
{
    std::ostringstream os;
    os.precision(17);
    os << to_string(structure.kind()) << ":N=" << structure.size();
    if (structure.kind() == StructureKind::aperiodic_poled) {
        os << ",l0_um=" << structure.base_length() << ",chirp_um=" << structure.length_chirp();
    } else {
        os << ",l_um=" << structure.base_length()
           << ",alpha_rad_per_um2=" << structure.chirp().alpha_rad_per_um2;
    }
    return os.str();
}

SpectrumResult total_spectrum(const LayeredStructure& structure, const TriModeChannel& channel,
                              const TaylorCoefficients& coefficients,
                              std::span<const double> detuning, const SlabGeometry& geometry,
                              double pump_wavelength_um, double qpm_offset_rad_per_um,
                              std::optional<Expansion> expansion)
{
    if (detuning.empty()) {
        throw DomainError("spectrum grid must not be empty");
    }
    const Expansion order = expansion.value_or(default_expansion(structure.kind()));

    SpectrumResult result;
    result.channel = channel;
    result.structure_id = structure_id(structure);
    result.pump_wavelength_um = pump_wavelength_um;
    result.qpm_offset = qpm_offset_rad_per_um;
    result.coefficients = coefficients;
    result.expansion = order;
    result.kind = structure.kind();
    result.layer_count = structure.size();
    result.base_length_um = structure.base_length();
    result.alpha_rad_per_um2 = structure.chirp().alpha_rad_per_um2;
    result.model = mismatch_model(structure, coefficients, qpm_offset_rad_per_um, order);
    result.detuning.assign(detuning.begin(), detuning.end());
    result.signal_wavelength.reserve(detuning.size());
    for (double w : detuning) {
        result.signal_wavelength.push_back(signal_wavelength_from_detuning(w, pump_wavelength_um));
    }

    result.forbidden = !parity_allowed(channel);
    if (result.forbidden) {
        result.amplitude.assign(detuning.size(), {0.0, 0.0});
        return result;
    }
    result.spatial_amplitude =
        channel_spatial_amplitude(geometry, channel, pump_wavelength_um).value;

    const auto lengths = structure.lengths();
    const auto signs = kernel_signs(structure);
    result.amplitude.reserve(detuning.size());
    for (double w : detuning) {
        const auto profile =
            phase_mismatch_profile(structure, coefficients, w, qpm_offset_rad_per_um, order);
        result.amplitude.push_back(layer_sum(profile, lengths, signs, result.spatial_amplitude));
    }
    return result;
}

double closed_form_aperiodic(double first_length_um, double chirp_um, int layers, double spatial,
                             double mismatch_rad_per_um)
{
    if (layers < 1) throw DomainError("closed form needs at least one layer");
    const auto n = static_cast<std::size_t>(layers);
    std::vector<double> lengths(n);
    for (std::size_t m = 0; m < n; ++m) lengths[m] = first_length_um + static_cast<double>(m) * chirp_um;

    const double dbeta = mismatch_rad_per_um;
    if (std::abs(dbeta) < kClosedFormMinMismatch) {
        std::vector<double> profile(n, dbeta);
        std::vector<int> signs(n);
        for (std::size_t m = 0; m < n; ++m) signs[m] = m % 2 == 0 ? 1 : -1;
        return std::norm(layer_sum(profile, lengths, signs, spatial));
    }

    std::vector<double> s(n);
    for (std::size_t m = 0; m < n; ++m) s[m] = std::sin(dbeta * lengths[m] / 2.0);

    double total = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        double cross = 0.0;
        const double m1 = static_cast<double>(m + 1);
        for (std::size_t p = 1; m + p < n; ++p) {
            const double pd = static_cast<double>(p);
            const double zeta = dbeta * pd * (first_length_um + (m1 + pd / 2.0 - 1.0) * chirp_um);
            const double sign = p % 2 == 0 ? 1.0 : -1.0;
            cross += sign * s[m + p] * std::cos(zeta);
        }
        total += s[m] * s[m] + 2.0 * s[m] * cross;
    }
    return 4.0 * spatial * spatial / (dbeta * dbeta) * total;
}

double closed_form_pc_mismatch(double layer_length_um, int layers, double alpha_rad_per_um2,
                               double first_mismatch, double spatial)
{
    if (layers < 1) throw DomainError("closed form needs at least one layer");
    const auto n = static_cast<std::size_t>(layers);
    const double l = layer_length_um;
    std::vector<double> kernel(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double dbeta = first_mismatch + alpha_rad_per_um2 * static_cast<double>(m) * l;
        kernel[m] = sinc(dbeta * l / 2.0);
    }
    double total = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        double cross = 0.0;
        const double m1 = static_cast<double>(m + 1);
        for (std::size_t p = 1; m + p < n; ++p) {
            const double pd = static_cast<double>(p);
            const double zeta =
                pd * l * (first_mismatch + alpha_rad_per_um2 * l * (m1 - 1.0 + pd / 2.0));
            cross += kernel[m + p] * std::cos(zeta);
        }
        total += kernel[m] * kernel[m] + 2.0 * kernel[m] * cross;
    }
    return spatial * spatial * l * l * total;
}

double closed_form_pc(double layer_length_um, int layers, double alpha_rad_per_um2, double slope,
                      double spatial, double detuning)
{
    return closed_form_pc_mismatch(layer_length_um, layers, alpha_rad_per_um2, slope * detuning,
                                   spatial);
}

double closed_form_power(const LayeredStructure& structure, std::span<const double> profile,
                         double spatial)
{
    if (profile.size() != structure.size()) {
        throw DomainError("closed_form_power: profile size does not match the structure");
    }
    const int layers = static_cast<int>(structure.size());
    if (structure.kind() == StructureKind::aperiodic_poled) {
        return closed_form_aperiodic(structure.base_length(), structure.length_chirp(), layers,
                                     spatial, profile.front());
    }
    return closed_form_pc_mismatch(structure.base_length(), layers,
                                   structure.chirp().alpha_rad_per_um2, profile.front(), spatial);
}

}  // namespace wgspdc
