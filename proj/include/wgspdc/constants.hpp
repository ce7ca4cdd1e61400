#pragma once

#include <numbers>

namespace wgspdc {

// Internal unit system: lengths in um, times in fs, angles in rad.
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 0.299792458;  // um / fs

// Exponent of the Gaussian that approximates sinc(x): exp(-gamma x^2).
inline constexpr double kSincGaussGamma = 0.189;

[[nodiscard]] constexpr double angular_frequency(double wavelength_um)
{
    return 2.0 * kPi * kSpeedOfLight / wavelength_um;
}

[[nodiscard]] constexpr double vacuum_wavelength(double omega_rad_per_fs)
{
    return 2.0 * kPi * kSpeedOfLight / omega_rad_per_fs;
}

}  // namespace wgspdc
