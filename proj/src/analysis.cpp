#include "wgspdc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"

namespace wgspdc {

namespace {

double trapezoid(std::span<const double> x, const std::vector<double>& y)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return sum;
}

// Linear interpolation of the abscissa where y crosses level between i and j.
double crossing(std::span<const double> x, std::span<const double> y, std::size_t i,
                std::size_t j, double level)
{
    const double dy = y[j] - y[i];
    if (dy == 0.0) return x[i];
    return x[i] + (level - y[i]) * (x[j] - x[i]) / dy;
}

std::vector<double> magnitudes(const SpectrumResult& result)
{
    std::vector<double> out;
    out.reserve(result.amplitude.size());
    for (const auto& a : result.amplitude) out.push_back(std::abs(a));
    return out;
}

}  // namespace

Discreteness discreteness_criterion(double alpha_rad_per_um2, double layer_length_um,
                                    double margin)
{
    if (!(layer_length_um > 0.0)) throw DomainError("layer length must be positive");
    if (!(margin >= 1.0)) throw DomainError("discreteness margin must be at least 1");
    const double ratio =
        alpha_rad_per_um2 * layer_length_um * layer_length_um * std::sqrt(kSincGaussGamma) / 4.0;
    return {ratio >= margin, ratio};
}

double qpm_layer_tuning(double layer_length_um, double alpha_rad_per_um2, int n, int layers)
{
    if (!(layer_length_um > 0.0)) throw DomainError("layer length must be positive");
    if (n < 1 || n > layers) {
        std::ostringstream os;
        os << "layer " << n << " outside [1, " << layers << "]";
        throw IndexOutOfRange(os.str());
    }
    return kPi / layer_length_um + (n - 1) * alpha_rad_per_um2 * layer_length_um;
}

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                             double prominence)
{
    if (x.size() != y.size()) throw GridMismatch("find_peaks: x and y differ in length");
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    if (n < 3) return peaks;
    const double ymax = *std::max_element(y.begin(), y.end());
    if (!(ymax > 0.0)) return peaks;
    const double floor = prominence * ymax;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        // strict on the left so a plateau is counted once
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        const double h = y[i];

        double left_min = h;
        for (std::size_t k = i; k-- > 0;) {
            if (y[k] > h) break;
            left_min = std::min(left_min, y[k]);
        }
        double right_min = h;
        for (std::size_t k = i + 1; k < n; ++k) {
            if (y[k] > h) break;
            right_min = std::min(right_min, y[k]);
        }
        const double prom = h - std::max(left_min, right_min);
        if (prom < floor || prom <= 0.0) continue;

        Peak p;
        p.index = i;
        p.height = h;
        p.prominence = prom;
        p.detuning = x[i];
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        if (denom < 0.0) {
            const double shift = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            p.detuning = x[i] + shift * 0.5 * (x[i + 1] - x[i - 1]);
        }
        const double level = h / std::exp(1.0);
        std::size_t lo = i;
        while (lo > 0 && y[lo] >= level) --lo;
        std::size_t hi = i;
        while (hi + 1 < n && y[hi] >= level) ++hi;
        const double left = y[lo] < level ? crossing(x, y, lo, lo + 1, level) : x[lo];
        const double right = y[hi] < level ? crossing(x, y, hi - 1, hi, level) : x[hi];
        p.width = right - left;
        peaks.push_back(p);
    }
    return peaks;
}

PeakReport detect_peaks(const SpectrumResult& result, double prominence, double margin)
{
    const auto& x = result.detuning;
    if (x.size() < 2) throw GridTooCoarse("spectrum grid has fewer than two points");
    const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    const auto& model = result.model;

    PeakReport report;
    report.prominence = prominence;
    report.margin = margin;

    // Narrowest main lobe in detuning: lobe width divided by the largest
    // mismatch slope met at any layer's lobe centre.
    double narrowest = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < model.offsets.size(); ++m) {
        const auto center = model.lobe_center(m);
        if (!center) continue;
        const double slope = std::abs(model.slope(*center));
        if (slope > 0.0) narrowest = std::min(narrowest, model.lobe_width / slope);
        if (*center >= x.front() && *center <= x.back()) report.predicted.push_back(*center);
    }
    if (std::isfinite(narrowest) && narrowest / std::abs(step) < kMinSamplesPerLobe) {
        std::ostringstream os;
        os << "grid step " << step << " rad/fs leaves fewer than " << kMinSamplesPerLobe
           << " samples across a main lobe of width " << narrowest << " rad/fs";
        throw GridTooCoarse(os.str());
    }
    std::sort(report.predicted.begin(), report.predicted.end());

    const auto power = result.power();
    report.peaks = find_peaks(x, power, prominence);
    report.count = report.peaks.size();

    if (result.kind == StructureKind::chirped_photonic_crystal) {
        const auto d = discreteness_criterion(result.alpha_rad_per_um2, result.base_length_um,
                                              margin);
        report.discrete = d.discrete;
        report.criterion_ratio = d.ratio;
        if (model.linear != 0.0) {
            const double spacing =
                std::abs(result.alpha_rad_per_um2 * result.base_length_um / model.linear);
            report.spacing_profile = spacing;
            report.spacing_half = spacing / 2.0;
        }
    }

    if (!report.peaks.empty() && !report.predicted.empty()) {
        double worst = 0.0;
        for (double target : report.predicted) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : report.peaks) best = std::min(best, std::abs(p.detuning - target));
            worst = std::max(worst, best);
        }
        report.max_position_error = worst;
    }
    return report;
}

double spectral_bandwidth(const SpectrumResult& result)
{
    const auto power = result.power();
    if (power.empty()) return 0.0;
    const double ymax = *std::max_element(power.begin(), power.end());
    if (!(ymax > 0.0)) return 0.0;
    const double half = ymax / 2.0;
    std::size_t first = power.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < power.size(); ++i) {
        if (power[i] >= half) {
            first = std::min(first, i);
            last = i;
        }
    }
    const auto& x = result.detuning;
    const double lo = first > 0 ? crossing(x, power, first - 1, first, half) : x[first];
    const double hi = last + 1 < power.size() ? crossing(x, power, last, last + 1, half) : x[last];
    return hi - lo;
}

EntanglementReport entanglement_overlap(std::span<const double> x,
                                        std::span<const double> magnitude_a,
                                        std::span<const double> magnitude_b, double threshold)
{
    if (magnitude_a.size() != x.size() || magnitude_b.size() != x.size()) {
        throw GridMismatch("overlap: spectra and grid differ in length");
    }
    EntanglementReport report;
    report.threshold = threshold;
    const std::size_t n = x.size();
    if (n == 0) return report;

    std::vector<double> prod(n), aa(n), bb(n);
    double amax = 0.0;
    double bmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prod[i] = magnitude_a[i] * magnitude_b[i];
        aa[i] = magnitude_a[i] * magnitude_a[i];
        bb[i] = magnitude_b[i] * magnitude_b[i];
        amax = std::max(amax, aa[i]);
        bmax = std::max(bmax, bb[i]);
    }
    const double norm = std::sqrt(trapezoid(x, aa) * trapezoid(x, bb));
    if (norm > 0.0) {
        report.overlap_metric = std::clamp(trapezoid(x, prod) / norm, 0.0, 1.0);
    }
    if (!(amax > 0.0) || !(bmax > 0.0)) return report;

    std::vector<bool> both(n);
    for (std::size_t i = 0; i < n; ++i) {
        both[i] = aa[i] > threshold * amax && bb[i] > threshold * bmax;
    }
    std::size_t best_start = 0;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < n;) {
        if (!both[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && both[j]) ++j;
        const std::size_t len = j - i;
        if (len > best_len) {
            best_len = len;
            best_start = i;
        }
        // measure of the run: half a cell beyond each end sample, clipped to the grid
        const double lo = i > 0 ? 0.5 * (x[i - 1] + x[i]) : x[i];
        const double hi = j < n ? 0.5 * (x[j - 1] + x[j]) : x[j - 1];
        report.coexistence_width += hi - lo;
        i = j;
    }
    if (best_len > 0) {
        report.overlap_interval = std::make_pair(x[best_start], x[best_start + best_len - 1]);
    }
    return report;
}

EntanglementReport entanglement_overlap(const SpectrumResult& a, const SpectrumResult& b,
                                        double threshold)
{
    if (a.detuning != b.detuning) {
        throw GridMismatch("overlap: the two spectra are sampled on different grids");
    }
    auto report = entanglement_overlap(a.detuning, magnitudes(a), magnitudes(b), threshold);
    report.channel_a = a.channel;
    report.channel_b = b.channel;
    return report;
}

void normalize_pair(SpectrumResult& a, SpectrumResult& b)
{
    double peak = 0.0;
    for (const auto& v : a.amplitude) peak = std::max(peak, std::norm(v));
    for (const auto& v : b.amplitude) peak = std::max(peak, std::norm(v));
    if (!(peak > 0.0)) return;
    const double scale = 1.0 / std::sqrt(peak);
    for (auto& v : a.amplitude) v *= scale;
    for (auto& v : b.amplitude) v *= scale;
    a.normalization = b.normalization = "common scale, max |Phi|^2 = 1 over the channel pair";
}

}  // namespace wgspdc
