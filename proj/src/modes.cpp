#include "wgspdc/modes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"

namespace wgspdc {

namespace {

constexpr int kMaxBisectionSteps = 200;

double normalized_frequency(const SlabGeometry& geometry, double wavelength_um)
{
    return kPi * geometry.height_um * geometry.numerical_aperture() / wavelength_um;
}

double branch_function(double x, int order, double v)
{
    return std::cos(x - order * kPi / 2.0) - x / v;
}

void check_wavelength(double wavelength_um)
{
    if (!(wavelength_um > 0.0) || !std::isfinite(wavelength_um)) {
        throw DomainError("wavelength must be positive and finite");
    }
}

void check_transverse_index(const SlabGeometry& geometry, double n_z)
{
    const double na = geometry.numerical_aperture();
    if (!(n_z > 0.0) || n_z > na) {
        std::ostringstream os;
        os << "transverse index " << n_z << " outside the guided window (0, " << na << "]";
        throw DomainError(os.str());
    }
}

// Derivative of the quadratic through (xs, fs), evaluated at x.
double quadratic_derivative(const std::array<double, 3>& xs, const std::array<double, 3>& fs,
                            double x, int order)
{
    double result = 0.0;
    for (int j = 0; j < 3; ++j) {
        double denominator = 1.0;
        for (int k = 0; k < 3; ++k) {
            if (k != j) denominator *= xs[j] - xs[k];
        }
        double numerator = 0.0;
        if (order == 1) {
            for (int k = 0; k < 3; ++k) {
                if (k == j) continue;
                double term = 1.0;
                for (int l = 0; l < 3; ++l) {
                    if (l != j && l != k) term *= x - xs[l];
                }
                numerator += term;
            }
        } else {
            numerator = 2.0;
        }
        result += fs[j] * numerator / denominator;
    }
    return result;
}

}  // namespace

void SlabGeometry::validate() const
{
    if (!(height_um > 0.0) || !(width_um > 0.0)) {
        throw DomainError("slab height and width must be positive");
    }
    if (!(n_clad > 0.0) || !(n_core > n_clad) || !std::isfinite(n_core)) {
        throw DomainError("guiding requires n_core > n_clad > 0");
    }
}

double SlabGeometry::numerical_aperture() const
{
    return std::sqrt(n_core * n_core - n_clad * n_clad);
}

std::string_view to_string(Wave wave)
{
    switch (wave) {
    case Wave::pump: return "pump";
    case Wave::signal: return "signal";
    case Wave::idler: return "idler";
    }
    return "unknown";
}

double branch_residual(const SlabGeometry& geometry, int order, double wavelength_um, double n_z)
{
    geometry.validate();
    check_wavelength(wavelength_um);
    check_transverse_index(geometry, n_z);
    const double x = kPi * geometry.height_um * n_z / wavelength_um;
    return std::cos(x - order * kPi / 2.0) - n_z / geometry.numerical_aperture();
}

double transcendental_residual(const SlabGeometry& geometry, int order, double wavelength_um,
                               double n_z)
{
    if (order != 0 && order != 1) {
        return branch_residual(geometry, order, wavelength_um, n_z);
    }
    geometry.validate();
    check_wavelength(wavelength_um);
    check_transverse_index(geometry, n_z);
    const double x = kPi * geometry.height_um * n_z / wavelength_um;
    const double rhs = 1.0 / normalized_frequency(geometry, wavelength_um);
    if (order == 0) {
        return std::cos(x) / x - rhs;
    }
    const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return sinc - rhs;
}

std::optional<ModeSolution> try_solve_mode(const SlabGeometry& geometry, int order,
                                           double wavelength_um)
{
    geometry.validate();
    check_wavelength(wavelength_um);
    if (order < 0) {
        throw DomainError("mode order must be non-negative");
    }

    const double v = normalized_frequency(geometry, wavelength_um);
    double lo = order * kPi / 2.0;
    double hi = std::min((order + 1) * kPi / 2.0, v);
    double f_lo = branch_function(lo, order, v);
    if (!(f_lo > 0.0) || !(hi > lo)) {
        return std::nullopt;
    }
    double f_hi = branch_function(hi, order, v);

    double x = 0.5 * (lo + hi);
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
        x = 0.5 * (lo + hi);
        const double f = branch_function(x, order, v);
        if (f == 0.0) {
            lo = hi = x;
            f_lo = f_hi = 0.0;
            break;
        }
        if (f > 0.0) {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
            f_hi = f;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }

    // Secant polish on the final bracket; keep whichever point is best.
    double best = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
    if (f_hi != f_lo) {
        const double secant = std::clamp(lo - f_lo * (hi - lo) / (f_hi - f_lo), lo, hi);
        if (std::abs(branch_function(secant, order, v)) <
            std::abs(branch_function(best, order, v))) {
            best = secant;
        }
    }
    x = best;

    const double na = geometry.numerical_aperture();
    const double n_z = na * (x / v);
    if (!(n_z > 0.0)) {
        return std::nullopt;
    }
    ModeSolution solution;
    solution.wavelength_um = wavelength_um;
    solution.n_z = n_z;
    solution.n_eff = std::sqrt(geometry.n_core * geometry.n_core - n_z * n_z);
    const double k0 = 2.0 * kPi / wavelength_um;
    solution.beta = solution.n_eff * k0;
    solution.k_z = n_z * k0;
    return solution;
}

ModeSolution solve_mode(const SlabGeometry& geometry, int order, double wavelength_um)
{
    if (auto solution = try_solve_mode(geometry, order, wavelength_um)) {
        return *solution;
    }
    std::ostringstream os;
    os << "mode " << order << " is cut off at wavelength " << wavelength_um << " um";
    throw CutoffError(order, wavelength_um, os.str());
}

double cutoff_wavelength(const SlabGeometry& geometry, int order)
{
    geometry.validate();
    if (order < 0) throw DomainError("mode order must be non-negative");
    if (order == 0) return std::numeric_limits<double>::infinity();
    return 2.0 * geometry.height_um * geometry.numerical_aperture() / order;
}

DispersionCurve::DispersionCurve(SlabGeometry geometry, ModeIndex mode,
                                 std::vector<double> wavelengths,
                                 std::vector<std::optional<ModeSolution>> samples)
    : geometry_(geometry), mode_(mode), wavelengths_(std::move(wavelengths)),
      samples_(std::move(samples))
{
    if (wavelengths_.size() != samples_.size() || wavelengths_.size() < 2) {
        throw DomainError("dispersion curve needs at least two samples");
    }
    for (std::size_t i = 1; i < wavelengths_.size(); ++i) {
        if (!(wavelengths_[i] > wavelengths_[i - 1])) {
            throw DomainError("dispersion curve wavelengths must be strictly increasing");
        }
    }
}

std::size_t DispersionCurve::guided_count() const
{
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [](const auto& s) { return s.has_value(); }));
}

bool DispersionCurve::guides(double wavelength_um) const
{
    if (wavelength_um < wavelengths_.front() || wavelength_um > wavelengths_.back()) return false;
    const auto upper = std::lower_bound(wavelengths_.begin(), wavelengths_.end(), wavelength_um);
    const auto hi = static_cast<std::size_t>(upper - wavelengths_.begin());
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    return samples_[lo].has_value() && samples_[std::min(hi, samples_.size() - 1)].has_value();
}

double DispersionCurve::beta_derivative(std::size_t index, int order) const
{
    if (order != 1 && order != 2) {
        throw DomainError("only first and second derivatives are available");
    }
    if (index >= samples_.size() || !samples_[index]) {
        throw StencilError("derivative requested at an unguided sample");
    }
    const auto guided = [this](std::ptrdiff_t i) {
        return i >= 0 && i < static_cast<std::ptrdiff_t>(samples_.size()) &&
               samples_[static_cast<std::size_t>(i)].has_value();
    };
    const auto i = static_cast<std::ptrdiff_t>(index);
    std::ptrdiff_t start = -1;
    for (std::ptrdiff_t candidate : {i - 1, i, i - 2}) {
        if (guided(candidate) && guided(candidate + 1) && guided(candidate + 2)) {
            start = candidate;
            break;
        }
    }
    const double x = angular_frequency(wavelengths_[index]);
    if (start < 0) {
        if (order == 2) {
            throw StencilError("second derivative needs three consecutive guided samples");
        }
        const std::ptrdiff_t other = guided(i + 1) ? i + 1 : (guided(i - 1) ? i - 1 : -1);
        if (other < 0) {
            throw StencilError("first derivative needs two consecutive guided samples");
        }
        const auto o = static_cast<std::size_t>(other);
        return (samples_[o]->beta - samples_[index]->beta) /
               (angular_frequency(wavelengths_[o]) - x);
    }
    std::array<double, 3> xs{};
    std::array<double, 3> fs{};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto s = static_cast<std::size_t>(start) + k;
        xs[k] = angular_frequency(wavelengths_[s]);
        fs[k] = samples_[s]->beta;
    }
    return quadratic_derivative(xs, fs, x, order);
}

DispersionCurve dispersion_curve(const SlabGeometry& geometry, ModeIndex mode,
                                 double min_wavelength_um, double max_wavelength_um,
                                 std::size_t samples)
{
    geometry.validate();
    if (!(min_wavelength_um > 0.0) || !(max_wavelength_um > min_wavelength_um)) {
        throw DomainError("dispersion curve requires 0 < lambda_min < lambda_max");
    }
    if (samples < 2) {
        throw DomainError("dispersion curve requires at least two samples");
    }
    std::vector<double> wavelengths(samples);
    std::vector<std::optional<ModeSolution>> solutions(samples);
    const double span = max_wavelength_um - min_wavelength_um;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        wavelengths[i] = i + 1 == samples ? max_wavelength_um : min_wavelength_um + span * t;
        solutions[i] = try_solve_mode(geometry, mode.order, wavelengths[i]);
    }
    if (std::none_of(solutions.begin(), solutions.end(), [](const auto& s) { return s.has_value(); })) {
        std::ostringstream os;
        os << "mode " << mode.order << " is cut off over the whole range [" << min_wavelength_um
           << ", " << max_wavelength_um << "] um";
        throw EmptyCurveError(os.str());
    }
    return DispersionCurve(geometry, mode, std::move(wavelengths), std::move(solutions));
}

namespace {

struct StencilDerivatives {
    double value;
    double first;
    double second;
};

StencilDerivatives stencil_derivatives(const DispersionCurve& curve, double center_wavelength_um,
                                       double relative_step)
{
    const double omega = angular_frequency(center_wavelength_um);
    const double h = relative_step * omega;
    std::array<double, 5> beta{};
    for (int k = -2; k <= 2; ++k) {
        const double wavelength =
            k == 0 ? center_wavelength_um : vacuum_wavelength(omega + k * h);
        const auto solution = try_solve_mode(curve.geometry(), curve.mode().order, wavelength);
        if (!solution) {
            std::ostringstream os;
            os << "finite-difference stencil point " << wavelength << " um is past cut-off for mode "
               << curve.mode().order;
            throw StencilError(os.str());
        }
        beta[static_cast<std::size_t>(k + 2)] = solution->beta;
    }
    StencilDerivatives d{};
    d.value = beta[2];
    d.first = (beta[0] - 8.0 * beta[1] + 8.0 * beta[3] - beta[4]) / (12.0 * h);
    d.second = (-beta[0] + 16.0 * beta[1] - 30.0 * beta[2] + 16.0 * beta[3] - beta[4]) /
               (12.0 * h * h);
    return d;
}

void require_inside(const DispersionCurve& curve, double wavelength_um, std::string_view role)
{
    if (!curve.guides(wavelength_um)) {
        std::ostringstream os;
        os << role << " wavelength " << wavelength_um << " um is not inside the guided window of mode "
           << curve.mode().order;
        throw StencilError(os.str());
    }
}

}  // namespace

TaylorCoefficients taylor_coefficients(const DispersionCurve& curve_p,
                                       const DispersionCurve& curve_s,
                                       const DispersionCurve& curve_i,
                                       double pump_wavelength_um)
{
    return taylor_coefficients(curve_p, curve_s, curve_i, pump_wavelength_um,
                               kTaylorRelativeStep);
}

TaylorCoefficients taylor_coefficients(const DispersionCurve& curve_p,
                                       const DispersionCurve& curve_s,
                                       const DispersionCurve& curve_i,
                                       double pump_wavelength_um, double relative_step)
{
    check_wavelength(pump_wavelength_um);
    const double subharmonic = 2.0 * pump_wavelength_um;
    require_inside(curve_p, pump_wavelength_um, "pump");
    require_inside(curve_s, subharmonic, "signal");
    require_inside(curve_i, subharmonic, "idler");

    const auto signal = stencil_derivatives(curve_s, subharmonic, relative_step);
    const auto idler = stencil_derivatives(curve_i, subharmonic, relative_step);
    const auto pump = solve_mode(curve_p.geometry(), curve_p.mode().order, pump_wavelength_um);

    TaylorCoefficients coefficients;
    coefficients.delta_beta0 = signal.value + idler.value - pump.beta;
    coefficients.d = signal.first - idler.first;
    coefficients.b = (signal.second + idler.second) / 2.0;
    return coefficients;
}

}  // namespace wgspdc
