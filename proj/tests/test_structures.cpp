#include <doctest.h>

#include <cmath>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"
#include "wgspdc/structures.hpp"

using namespace wgspdc;

namespace {
const SlabGeometry kSlab{1.0, 3.6, 3.5, 1.0};
const TaylorCoefficients kCoeffs{-0.13952, 0.23079, 0.53110};
}  // namespace

TEST_CASE("aperiodic builder")
{
    const auto s = build_aperiodic(100.0, 0.5, 4, kSlab);
    CHECK(s.kind() == StructureKind::aperiodic_poled);
    CHECK(s.lengths() == std::vector<double>{100.0, 100.5, 101.0, 101.5});
    CHECK(s.chi_signs() == std::vector<int>{1, -1, 1, -1});
    CHECK(s.total_length() == doctest::Approx(403.0));
    CHECK_THROWS_AS((void)build_aperiodic(1.0, -1.0, 3, kSlab), InvalidLayerLength);
    CHECK_THROWS_AS((void)build_aperiodic(1.0, 0.0, 0, kSlab), InvalidLayerLength);

    const auto t = build_aperiodic_from_total(12000.0, 0.25, 100, kSlab);
    CHECK(t.total_length() == doctest::Approx(12000.0).epsilon(1e-13));
    CHECK(t.base_length() == doctest::Approx(120.0 - 0.25 * 99.0 / 2.0).epsilon(1e-14));

    const auto f = s.with_flipped_signs();
    CHECK(f.chi_signs() == std::vector<int>{-1, 1, -1, 1});
}

TEST_CASE("matched cladding keeps the numerical aperture")
{
    const double chirp = 1e-6;
    for (int m = 0; m < 10; ++m) {
        const double clad = matched_cladding_index(3.5, 3.6, chirp, m, 460.0);
        const double core = 3.6 + m * 460.0 * chirp;
        CHECK(core * core - clad * clad == doctest::Approx(3.6 * 3.6 - 3.5 * 3.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)matched_cladding_index(3.5, 3.6, -1e-2, 5, 100.0), GuidanceViolation);
}

TEST_CASE("photonic-crystal builder")
{
    const ChirpParameters chirp{2e-6, 0.0, 0.0, 0.0};
    const auto s = build_chirped_pc(460.0, 5, uniform_indices(kSlab), chirp);
    CHECK(s.kind() == StructureKind::chirped_photonic_crystal);
    CHECK(s.size() == 5);
    CHECK(s.chi_signs() == std::vector<int>{1, -1, 1, -1, 1});
    for (std::size_t m = 0; m < s.size(); ++m) {
        const auto& p = s.layers()[m].wave(Wave::pump);
        CHECK(p.n_core == doctest::Approx(3.6 + m * 460.0 * 2e-6));
        CHECK(s.layers()[m].wave(Wave::signal).n_core == 3.6);
    }
    CHECK_THROWS_AS((void)build_chirped_pc(0.0, 5, uniform_indices(kSlab), chirp),
                    InvalidLayerLength);
}

TEST_CASE("spatial chirp parameter")
{
    const double lp = 0.775;
    const double kp = 2.0 * kPi / lp;
    const ChirpParameters c{3e-6, 1e-6, 2e-6, 0.0};
    CHECK(spatial_chirp_alpha(lp, c) == doctest::Approx(kp * (3e-6 - 0.5e-6 - 1e-6)).epsilon(1e-14));
    const double pump = pump_chirp_for_alpha(2.6e-5, lp);
    CHECK(spatial_chirp_alpha(lp, {pump, 0.0, 0.0, 0.0}) == doctest::Approx(2.6e-5).epsilon(1e-14));
    CHECK(with_derived_alpha(lp, c).alpha_rad_per_um2 == spatial_chirp_alpha(lp, c));
}

TEST_CASE("phase mismatch profile")
{
    const auto a = build_aperiodic(100.0, 0.5, 3, kSlab);
    const double w = 0.01;
    const auto pa = phase_mismatch_profile(a, kCoeffs, w, 0.1);
    const double expect = kCoeffs.delta_beta0 - 0.1 + kCoeffs.d * w + kCoeffs.b * w * w;
    for (double v : pa) CHECK(v == doctest::Approx(expect).epsilon(1e-15));
    const auto lin = phase_mismatch_profile(a, kCoeffs, w, 0.1, Expansion::linear);
    CHECK(lin[0] == doctest::Approx(kCoeffs.delta_beta0 - 0.1 + kCoeffs.d * w).epsilon(1e-15));

    ChirpParameters chirp;
    chirp.alpha_rad_per_um2 = 2.6e-5;
    const auto pc = build_chirped_pc(460.0, 4, uniform_indices(kSlab), chirp);
    const auto pp = phase_mismatch_profile(pc, kCoeffs, w, 0.0);
    for (std::size_t m = 0; m < 4; ++m) {
        CHECK(pp[m] == doctest::Approx(kCoeffs.delta_beta0 + kCoeffs.d * w + 2.6e-5 * m * 460.0)
                           .epsilon(1e-14));
    }
}

TEST_CASE("matched QPM offset")
{
    const auto a = build_aperiodic(100.0, 1.0, 5, kSlab);
    const double off = matched_qpm_offset(a, kCoeffs, 3);
    CHECK(phase_mismatch_profile(a, kCoeffs, 0.0, off)[0] == doctest::Approx(kPi / 102.0));
    const auto single = build_aperiodic(100.0, 0.0, 1, kSlab);
    CHECK(matched_qpm_offset(single, kCoeffs, 1) == kCoeffs.delta_beta0);
    CHECK_THROWS_AS((void)matched_qpm_offset(a, kCoeffs, 0), IndexOutOfRange);
    CHECK_THROWS_AS((void)matched_qpm_offset(a, kCoeffs, 6), IndexOutOfRange);

    ChirpParameters chirp;
    chirp.alpha_rad_per_um2 = 2.6e-5;
    const auto pc = build_chirped_pc(460.0, 5, uniform_indices(kSlab), chirp);
    for (int n = 1; n <= 5; ++n) {
        const auto p = phase_mismatch_profile(pc, kCoeffs, 0.0, matched_qpm_offset(pc, kCoeffs, n));
        CHECK(std::abs(p[static_cast<std::size_t>(n - 1)]) < 1e-15);
    }
}

TEST_CASE("detuning and signal wavelength")
{
    const double lp = 0.775;
    CHECK(std::abs(detuning_from_signal_wavelength(2 * lp, lp)) < 1e-15);
    for (double w : {-0.1, -0.01, 0.0, 0.02, 0.1}) {
        const double ls = signal_wavelength_from_detuning(w, lp);
        CHECK(detuning_from_signal_wavelength(ls, lp) == doctest::Approx(w).epsilon(1e-12));
    }
    CHECK(signal_wavelength_from_detuning(0.05, lp) < 2 * lp);
}
