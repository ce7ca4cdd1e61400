#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "wgspdc/constants.hpp"
#include "wgspdc/errors.hpp"
#include "wgspdc/quadrature.hpp"
#include "wgspdc/spectrum.hpp"

using namespace wgspdc;

namespace {

const SlabGeometry kSlab{1.0, 3.6, 3.5, 1.0};
const TaylorCoefficients kCoeffs{-0.13951753665077432, 0.23079142972846343, 0.53109699288630377};

// (2/H) * trapezoid of the triple product over the core.
double trapezoid_overlap(const TriModeChannel& c, double kp, double ks, double ki, double h,
                         int points)
{
    const auto u = [](int mu, double k, double z) {
        return mu % 2 == 0 ? std::cos(k * z) : std::sin(k * z);
    };
    const double dz = h / (points - 1);
    double sum = 0.0;
    for (int j = 0; j < points; ++j) {
        const double z = -h / 2.0 + j * dz;
        const double f = u(c.pump, kp, z) * u(c.signal, ks, z) * u(c.idler, ki, z);
        sum += (j == 0 || j == points - 1) ? 0.5 * f : f;
    }
    return 2.0 / h * sum * dz;
}

// Independent coherent sum: each layer integrated by composite Simpson with
// the phase accumulated on the fly.
std::complex<double> simpson_structure(const std::vector<double>& profile,
                                       const std::vector<double>& lengths,
                                       const std::vector<int>& signs, double a)
{
    std::complex<double> total = 0.0;
    double phase = 0.0;
    for (std::size_t m = 0; m < profile.size(); ++m) {
        const int n = 4000;
        const double h = lengths[m] / n;
        std::complex<double> s = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            s += w * std::polar(1.0, -(phase + profile[m] * j * h));
        }
        total += static_cast<double>(signs[m]) * a * s * h / 3.0;
        phase += profile[m] * lengths[m];
    }
    return total;
}

double rel(double a, double b)
{
    const double d = std::max(std::abs(a), std::abs(b));
    return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

}  // namespace

TEST_CASE("channel parity and labels")
{
    CHECK(parity_allowed({0, 0, 0}));
    CHECK(parity_allowed({1, 0, 1}));
    CHECK_FALSE(parity_allowed({1, 0, 0}));
    CHECK_FALSE(parity_allowed({1, 1, 1}));
    CHECK(parity_allowed({2, 1, 1}));
    CHECK(TriModeChannel{1, 0, 1}.label() == "p1s0i1");
}

TEST_CASE("sinc")
{
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(kPi) == doctest::Approx(0.0).epsilon(1e-15));
    for (double x : {5e-5, 9.99e-5, 1.001e-4, 1e-3}) {
        CHECK(sinc(x) == doctest::Approx(std::sin(x) / x).epsilon(1e-15));
    }
}

TEST_CASE("spatial amplitude at the degenerate point matches frozen quadrature")
{
    // mpmath quadrature of the triple product, 30 digits (H = 1 um, lambda_p = 0.775 um)
    const std::array<double, 8> reference{1.2300889554835331, 0.0, 0.0, 0.69361790725724385,
                                          0.0, 0.88321576594498143, 0.88321576594498143, 0.0};
    for (int k = 0; k < 8; ++k) {
        const TriModeChannel c{k >> 2 & 1, k >> 1 & 1, k & 1};
        const auto a = channel_spatial_amplitude(kSlab, c, 0.775);
        if (reference[k] == 0.0) {
            CHECK(a.value == 0.0);
        } else {
            CHECK(a.value == doctest::Approx(reference[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("spatial amplitude against direct trapezoid quadrature")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> k(0.5, 6.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double kp = k(rng);
        const double ks = k(rng);
        const TriModeChannel c{1, 0, 1};
        const double a = spatial_amplitude(kSlab, c, kp, ks, kp).value;
        CHECK(a == doctest::Approx(trapezoid_overlap(c, kp, ks, kp, 1.0, 1000001)).epsilon(1e-9));
    }
    for (int ch = 0; ch < 8; ++ch) {
        const TriModeChannel c{ch >> 2 & 1, ch >> 1 & 1, ch & 1};
        const double kp = k(rng), ks = k(rng), ki = k(rng);
        const double a = spatial_amplitude(kSlab, c, kp, ks, ki).value;
        const double ref = trapezoid_overlap(c, kp, ks, ki, 1.0, 200001);
        if (parity_allowed(c)) {
            CHECK(a == doctest::Approx(ref).epsilon(1e-8));
        } else {
            CHECK(a == 0.0);
            CHECK(std::abs(ref) < 1e-12);
        }
    }
    const double kz = 1e-4;
    CHECK(spatial_amplitude(kSlab, {0, 0, 0}, kz, kz, kz).value ==
          doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("layer amplitude")
{
    const auto phi = layer_amplitude(0.0, 12.5, 0.0, -1, 0.8);
    CHECK(phi.real() == -12.5 * 0.8);
    CHECK(phi.imag() == 0.0);
    CHECK(std::abs(layer_amplitude(2.0 * kPi / 10.0, 10.0, 0.3, 1, 1.0)) < 1e-15);

    // direct quadrature of chi A exp(-i(phase + dbeta x)) over the layer
    const double db = 0.0713, l = 37.0, ph = 1.1;
    const auto direct = simpson_structure({db}, {l}, {1}, 0.6) * std::polar(1.0, -ph);
    CHECK(std::abs(layer_amplitude(db, l, ph, 1, 0.6) - direct) < 1e-10);
}

TEST_CASE("accumulated phase")
{
    const std::vector<double> prof{0.1, -0.2, 0.05, 0.3};
    const std::vector<double> len{10.0, 11.0, 12.0, 13.0};
    CHECK(accumulated_phase(prof, len, 1) == 0.0);
    double run = 0.0;
    for (std::size_t m = 1; m <= 4; ++m) {
        CHECK(accumulated_phase(prof, len, m) == doctest::Approx(run).epsilon(1e-12));
        run += prof[m - 1] * len[m - 1];
    }
    const std::vector<double> uni(5, 0.25), ul(5, 4.0);
    CHECK(accumulated_phase(uni, ul, 4) == doctest::Approx(3 * 0.25 * 4.0));
    CHECK_THROWS_AS((void)accumulated_phase(prof, len, 0), IndexOutOfRange);
}

TEST_CASE("Gauss-Kronrod rule")
{
    // exact for polynomials through degree 22 (K15) and 13 (G7)
    for (int deg = 0; deg <= 22; ++deg) {
        const auto est = gauss_kronrod15([deg](double x) { return std::pow(x, deg); }, -1.0, 1.0);
        const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
        CHECK(std::abs(est.kronrod.real() - exact) < 1e-14);
        if (deg <= 13) CHECK(std::abs(est.gauss.real() - exact) < 1e-14);
    }
    const auto e = integrate_adaptive([](double x) { return std::polar(1.0, 3.0 * x); }, 0.0, 2.0,
                                      1e-14);
    CHECK(std::abs(e - (std::polar(1.0, 6.0) - 1.0) / std::complex<double>(0.0, 3.0)) < 1e-13);
    CHECK_THROWS_AS(
        (void)integrate_adaptive([](double x) { return x < 1.0 / 3.0 ? 0.0 : 1.0; }, 0.0, 1.0,
                                 1e-15),
        QuadratureNonConvergence);
}

TEST_CASE("oracle special cases")
{
    const auto one = build_aperiodic(50.0, 0.0, 1, kSlab);
    const auto v = oracle_direct_integration(one, std::vector<double>{0.0}, 0.7);
    CHECK(std::abs(v - std::complex<double>(35.0, 0.0)) < 1e-12);

    // two opposite domains at dbeta l = pi add constructively
    const double l = 20.0;
    const auto two = build_aperiodic(l, 0.0, 2, kSlab);
    const std::vector<double> prof(2, kPi / l);
    const auto pair = oracle_direct_integration(two, prof, 1.0);
    const auto one_layer = oracle_direct_integration(build_aperiodic(l, 0.0, 1, kSlab),
                                                     std::vector<double>{kPi / l}, 1.0);
    CHECK(std::abs(pair) == doctest::Approx(2.0 * std::abs(one_layer)).epsilon(1e-12));
    const auto flipped = oracle_direct_integration(two.with_flipped_signs(), prof, 1.0);
    CHECK(std::abs(flipped + pair) < 1e-12);
}

TEST_CASE("closed forms, layer sum, oracle and Simpson agree")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(u01(rng) * 20);
        const double l0 = 20.0 + 200.0 * u01(rng);
        const double chirp = -0.5 + 1.5 * u01(rng);
        const double a = 0.2 + u01(rng);
        const double db = (u01(rng) - 0.5) * 0.4;
        const auto s = build_aperiodic(l0, chirp, n, kSlab);
        const std::vector<double> prof(s.size(), db);
        const double cf = closed_form_aperiodic(l0, chirp, n, a, db);
        const double ls = std::norm(layer_sum(prof, s.lengths(), s.chi_signs(), a));
        const double orc = std::norm(oracle_direct_integration(s, prof, a));
        CHECK(rel(cf, ls) < 1e-9);
        CHECK(rel(orc, ls) < 1e-9);
        if (trial < 5) {
            const double simp = std::norm(simpson_structure(prof, s.lengths(), s.chi_signs(), a));
            CHECK(rel(simp, ls) < 1e-8);
        }
    }
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(u01(rng) * 20);
        const double l = 20.0 + 500.0 * u01(rng);
        ChirpParameters chirp;
        chirp.alpha_rad_per_um2 = (u01(rng) - 0.3) * 1e-4;
        const auto s = build_chirped_pc(l, n, uniform_indices(kSlab), chirp);
        const double w = (u01(rng) - 0.5) * 0.2;
        const double a = 0.2 + u01(rng);
        const auto prof = phase_mismatch_profile(s, kCoeffs, w, kCoeffs.delta_beta0);
        const double cf = closed_form_pc(l, n, chirp.alpha_rad_per_um2, kCoeffs.d, a, w);
        const double ls = std::norm(layer_sum(prof, s.lengths(), kernel_signs(s), a));
        const double orc = std::norm(oracle_direct_integration(s, prof, a));
        CHECK(rel(cf, ls) < 1e-9);
        CHECK(rel(orc, ls) < 1e-9);
        CHECK(rel(closed_form_power(s, prof, a), ls) < 1e-9);
    }
}

TEST_CASE("closed-form limits and symmetries")
{
    SUBCASE("aperiodic single layer")
    {
        const double l0 = 80.0, a = 0.9, db = 0.031;
        const double s = std::sin(db * l0 / 2.0);
        CHECK(closed_form_aperiodic(l0, 0.0, 1, a, db) ==
              doctest::Approx(4.0 * a * a * s * s / (db * db)).epsilon(1e-14));
        CHECK(closed_form_aperiodic(l0, 0.0, 1, a, db) ==
              doctest::Approx(a * a * l0 * l0 * std::pow(sinc(db * l0 / 2), 2)).epsilon(1e-12));
    }
    SUBCASE("vanishing mismatch falls back to the layer sum")
    {
        const double v = closed_form_aperiodic(10.0, 1.0, 3, 1.0, 0.0);
        CHECK(v == doctest::Approx(std::pow(10.0 - 11.0 + 12.0, 2)).epsilon(1e-14));
        CHECK(closed_form_aperiodic(10.0, 1.0, 3, 1.0, 5e-9) == doctest::Approx(v).epsilon(1e-9));
        CHECK(closed_form_aperiodic(10.0, 1.0, 3, 1.0, 2e-8) == doctest::Approx(v).epsilon(1e-9));
    }
    SUBCASE("photonic crystal single layer")
    {
        const double l = 96.0, a = 0.8, w = 0.013;
        CHECK(closed_form_pc(l, 1, 2.6e-5, kCoeffs.d, a, w) ==
              doctest::Approx(a * a * l * l * std::pow(sinc(kCoeffs.d * w * l / 2), 2))
                  .epsilon(1e-14));
    }
    SUBCASE("layer reversal with opposite chirp")
    {
        const double l = 300.0, alpha = 3e-5, first = 0.004;
        const int n = 7;
        const double fwd = closed_form_pc_mismatch(l, n, alpha, first, 1.0);
        const double rev = closed_form_pc_mismatch(l, n, -alpha, first + alpha * (n - 1) * l, 1.0);
        CHECK(rev == doctest::Approx(fwd).epsilon(1e-12));
        // Omega -> -Omega with alpha -> -alpha mirrors the reversed structure
        const double w = 0.02;
        const double a1 = closed_form_pc(l, n, alpha, kCoeffs.d, 1.0, w);
        const double a2 = closed_form_pc_mismatch(l, n, -alpha, -kCoeffs.d * w, 1.0);
        CHECK(a2 == doctest::Approx(a1).epsilon(1e-12));
    }
}

TEST_CASE("mismatch model and band")
{
    const auto a = build_aperiodic(100.0, 0.5, 3, kSlab);
    const double off = matched_qpm_offset(a, kCoeffs, 2);
    const auto model = mismatch_model(a, kCoeffs, off);
    CHECK(model.quadratic == kCoeffs.b);
    for (std::size_t m = 0; m < 3; ++m) {
        const auto c = model.lobe_center(m);
        REQUIRE(c);
        CHECK(model.at(m, *c) == doctest::Approx(kPi / a.lengths()[m]).epsilon(1e-12));
    }
    CHECK(std::abs(*model.lobe_center(1)) < 1e-12);
    const auto [lo, hi] = detuning_band(model);
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);

    const auto flat = mismatch_model(a, TaylorCoefficients{0.1, 0.0, 0.0}, 0.0);
    CHECK_THROWS_AS((void)detuning_band(flat), DomainError);

    ChirpParameters chirp;
    chirp.alpha_rad_per_um2 = 2.6e-5;
    const auto pc = build_chirped_pc(460.0, 5, uniform_indices(kSlab), chirp);
    const auto pm = mismatch_model(pc, kCoeffs, matched_qpm_offset(pc, kCoeffs, 1));
    CHECK(pm.quadratic == 0.0);
    CHECK(pm.lobe_width == doctest::Approx(4.0 * kPi / 460.0));
    for (std::size_t m = 0; m < 5; ++m) {
        CHECK(*pm.lobe_center(m) ==
              doctest::Approx(-2.6e-5 * static_cast<double>(m) * 460.0 / kCoeffs.d).epsilon(1e-12));
    }
}

TEST_CASE("uniform grid")
{
    const auto g = uniform_grid(-1.0, 1.0, 5);
    CHECK(g == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
    CHECK_THROWS_AS((void)uniform_grid(1.0, 1.0, 5), DomainError);
    CHECK_THROWS_AS((void)uniform_grid(0.0, 1.0, 1), DomainError);
}

TEST_CASE("total spectrum")
{
    const double lp = 0.775;
    const auto s = build_aperiodic_from_total(3000.0, 0.3, 20, kSlab);
    const double off = matched_qpm_offset(s, kCoeffs, 10);
    const auto grid = uniform_grid(-0.05, 0.05, 301);
    const auto r = total_spectrum(s, {1, 0, 1}, kCoeffs, grid, kSlab, lp, off);
    CHECK(r.amplitude.size() == grid.size());
    CHECK(r.signal_wavelength.size() == grid.size());
    CHECK_FALSE(r.forbidden);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto prof = phase_mismatch_profile(s, kCoeffs, grid[i], off);
        const double cf = closed_form_power(s, prof, r.spatial_amplitude);
        CHECK(rel(std::norm(r.amplitude[i]), cf) < 1e-9);
        CHECK(std::isfinite(std::norm(r.amplitude[i])));
    }

    SUBCASE("forbidden channel")
    {
        const auto z = total_spectrum(s, {1, 0, 0}, kCoeffs, grid, kSlab, lp, off);
        CHECK(z.forbidden);
        for (const auto& v : z.amplitude) CHECK(v == std::complex<double>(0.0, 0.0));
    }
    SUBCASE("global sign flip")
    {
        const auto f = total_spectrum(s.with_flipped_signs(), {1, 0, 1}, kCoeffs, grid, kSlab, lp,
                                      off);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(std::norm(f.amplitude[i]) == doctest::Approx(std::norm(r.amplitude[i])).epsilon(1e-14));
        }
    }
    SUBCASE("single layer ratio to sinc^2 is constant")
    {
        const auto one = build_aperiodic(400.0, 0.0, 1, kSlab);
        const auto g1 = total_spectrum(one, {1, 0, 1}, kCoeffs, grid, kSlab, lp, 0.0);
        const double ref = std::norm(g1.amplitude[150]) /
                           std::pow(sinc(phase_mismatch_profile(one, kCoeffs, grid[150], 0.0)[0] * 200.0), 2);
        for (std::size_t i = 0; i < grid.size(); i += 7) {
            const double sn = sinc(phase_mismatch_profile(one, kCoeffs, grid[i], 0.0)[0] * 200.0);
            if (sn * sn < 1e-6) continue;
            CHECK(std::norm(g1.amplitude[i]) / (sn * sn) == doctest::Approx(ref).epsilon(1e-9));
        }
    }
    SUBCASE("empty grid")
    {
        CHECK_THROWS_AS((void)total_spectrum(s, {1, 0, 1}, kCoeffs, std::vector<double>{}, kSlab,
                                             lp, off),
                        DomainError);
    }
}

TEST_CASE("spatial amplitude is the same in every matched photonic-crystal layer")
{
    const double lp = 0.775;
    const ChirpParameters chirp{pump_chirp_for_alpha(2.6e-5, lp), 1e-6, -1e-6, 0.0};
    const auto pc = build_chirped_pc(460.0, 10, uniform_indices(kSlab), chirp);
    const TriModeChannel c{1, 0, 1};
    double first = 0.0;
    for (std::size_t m = 0; m < pc.size(); ++m) {
        const auto& layer = pc.layers()[m];
        const auto geo = [&](Wave w) {
            return SlabGeometry{kSlab.height_um, layer.wave(w).n_core, layer.wave(w).n_clad, 1.0};
        };
        const double kp = solve_mode(geo(Wave::pump), c.pump, lp).k_z;
        const double ks = solve_mode(geo(Wave::signal), c.signal, 2 * lp).k_z;
        const double ki = solve_mode(geo(Wave::idler), c.idler, 2 * lp).k_z;
        const double a = spatial_amplitude(kSlab, c, kp, ks, ki).value;
        if (m == 0) first = a;
        CHECK(a == doctest::Approx(first).epsilon(1e-9));
    }
}
