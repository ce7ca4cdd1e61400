#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace wgspdc {

// Symmetric planar waveguide cross-section. The core occupies
// z in [-H/2, H/2]; the cladding extends to infinity on both sides.
struct SlabGeometry {
    double height_um = 1.0;
    double n_core = 3.6;
    double n_clad = 3.5;
    double width_um = 1.0;

    // Throws DomainError unless H > 0, L_y > 0 and n_core > n_clad > 0.
    void validate() const;

    // sqrt(n_core^2 - n_clad^2)
    [[nodiscard]] double numerical_aperture() const;
};

enum class Wave { pump, signal, idler };

[[nodiscard]] std::string_view to_string(Wave wave);

struct ModeIndex {
    int order = 0;
    Wave wave = Wave::signal;
};

struct ModeSolution {
    double wavelength_um = 0.0;
    double n_eff = 0.0;
    double n_z = 0.0;     // sqrt(n_core^2 - n_eff^2)
    double beta = 0.0;    // rad/um
    double k_z = 0.0;     // rad/um
};

/// Residual of the TE dispersion relation in the form used for the two
/// lowest modes: cosc(x) - 1/V for order 0 and sinc(x) - 1/V for order 1,
/// with x = H n_z pi / lambda and V = H pi NA / lambda. Higher orders fall
/// back to branch_residual(). Throws DomainError when n_z lies outside
/// (0, NA].
[[nodiscard]] double transcendental_residual(const SlabGeometry& geometry, int order,
                                             double wavelength_um, double n_z);

/// Residual of the general form cos(x - order*pi/2) - n_z / NA. This is the
/// function the solver brackets; it is bounded on every branch.
[[nodiscard]] double branch_residual(const SlabGeometry& geometry, int order,
                                     double wavelength_um, double n_z);

/// Solves for the guided mode of the given order. The root is searched on
/// the branch x in [order*pi/2, (order+1)*pi/2) so that the returned
/// solution has exactly `order` transverse nodes. Throws CutoffError when
/// the branch holds no sign change.
[[nodiscard]] ModeSolution solve_mode(const SlabGeometry& geometry, int order,
                                      double wavelength_um);

[[nodiscard]] std::optional<ModeSolution> try_solve_mode(const SlabGeometry& geometry,
                                                         int order, double wavelength_um);

/// Longest guided wavelength of the mode, 2 H NA / order. Infinite for the
/// fundamental mode of a symmetric slab.
[[nodiscard]] double cutoff_wavelength(const SlabGeometry& geometry, int order);

class DispersionCurve {
public:
    DispersionCurve(SlabGeometry geometry, ModeIndex mode, std::vector<double> wavelengths,
                    std::vector<std::optional<ModeSolution>> samples);

    [[nodiscard]] const SlabGeometry& geometry() const { return geometry_; }
    [[nodiscard]] const ModeIndex& mode() const { return mode_; }
    [[nodiscard]] const std::vector<double>& wavelengths() const { return wavelengths_; }
    [[nodiscard]] const std::vector<std::optional<ModeSolution>>& samples() const
    {
        return samples_;
    }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }
    [[nodiscard]] std::size_t guided_count() const;
    [[nodiscard]] double min_wavelength() const { return wavelengths_.front(); }
    [[nodiscard]] double max_wavelength() const { return wavelengths_.back(); }

    // True when lambda lies in [min, max] and between two guided samples.
    [[nodiscard]] bool guides(double wavelength_um) const;

    // d^order beta / d omega^order at grid index i from the tabulated
    // samples (three-point non-uniform stencils). order is 1 or 2. Throws
    // StencilError when the required neighbours are absent.
    [[nodiscard]] double beta_derivative(std::size_t index, int order) const;

private:
    SlabGeometry geometry_;
    ModeIndex mode_;
    std::vector<double> wavelengths_;
    std::vector<std::optional<ModeSolution>> samples_;
};

/// Samples solve_mode on a uniform wavelength grid. Points past cut-off are
/// stored as std::nullopt. Throws EmptyCurveError if nothing is guided.
[[nodiscard]] DispersionCurve dispersion_curve(const SlabGeometry& geometry, ModeIndex mode,
                                               double min_wavelength_um,
                                               double max_wavelength_um,
                                               std::size_t samples);

// Second-order expansion of the phase mismatch around the degenerate point:
//   dbeta(Omega) = delta_beta0 + D Omega + B Omega^2
struct TaylorCoefficients {
    double delta_beta0 = 0.0;  // beta_s(w_p/2) + beta_i(w_p/2) - beta_p(w_p), rad/um
    double d = 0.0;            // beta_s' - beta_i', fs/um
    double b = 0.0;            // (beta_s'' + beta_i'') / 2, fs^2/um
};

/// Step used for the frequency derivatives, relative to w_p/2.
inline constexpr double kTaylorRelativeStep = 1e-3;

/// Expansion coefficients from freshly solved points on a five-point
/// central stencil around w_p/2 (step h = kTaylorRelativeStep * w_p/2).
/// The curves provide geometry and mode order; the pump wavelength must lie
/// inside curve_p and 2 lambda_p inside the subharmonic curves.
[[nodiscard]] TaylorCoefficients taylor_coefficients(const DispersionCurve& curve_p,
                                                     const DispersionCurve& curve_s,
                                                     const DispersionCurve& curve_i,
                                                     double pump_wavelength_um);

/// Same expansion with an explicit relative step; used to build Richardson
/// estimates.
[[nodiscard]] TaylorCoefficients taylor_coefficients(const DispersionCurve& curve_p,
                                                     const DispersionCurve& curve_s,
                                                     const DispersionCurve& curve_i,
                                                     double pump_wavelength_um,
                                                     double relative_step);

}  // namespace wgspdc
