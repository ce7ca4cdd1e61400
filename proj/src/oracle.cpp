#include <array>
#include <cmath>
#include <complex>

#include "wgspdc/errors.hpp"
#include "wgspdc/quadrature.hpp"
#include "wgspdc/spectrum.hpp"

namespace wgspdc {

namespace {

// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK).
constexpr std::array<double, 8> kNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

using Complex = std::complex<double>;

Complex adaptive(const ComplexIntegrand& f, double a, double b, double tolerance, int depth)
{
    const auto [k, g] = gauss_kronrod15(f, a, b);
    if (std::abs(k - g) <= tolerance) {
        return k;
    }
    if (depth >= kMaxQuadratureDepth) {
        throw QuadratureNonConvergence("adaptive quadrature exceeded refinement depth 30");
    }
    const double mid = 0.5 * (a + b);
    return adaptive(f, a, mid, 0.5 * tolerance, depth + 1) +
           adaptive(f, mid, b, 0.5 * tolerance, depth + 1);
}

}  // namespace

KronrodEstimate gauss_kronrod15(const ComplexIntegrand& f, double a, double b)
{
    Complex kronrod_sum;
    Complex gauss_sum;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    kronrod_sum = kKronrodWeights[7] * f(center);
    gauss_sum = kGaussWeights[3] * f(center);
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        const Complex pair = f(center - dx) + f(center + dx);
        kronrod_sum += kKronrodWeights[j] * pair;
        if (j % 2 == 1) gauss_sum += kGaussWeights[j / 2] * pair;
    }
    kronrod_sum *= half;
    gauss_sum *= half;
    return {kronrod_sum, gauss_sum};
}

std::complex<double> integrate_adaptive(const ComplexIntegrand& f, double a, double b,
                                        double tolerance)
{
    return adaptive(f, a, b, tolerance, 0);
}

std::complex<double> oracle_direct_integration(const LayeredStructure& structure,
                                               std::span<const double> profile, double spatial)
{
    if (profile.size() != structure.size()) {
        throw DomainError("oracle: profile size does not match the structure");
    }
    const auto signs = kernel_signs(structure);
    Complex total{0.0, 0.0};
    double entry_phase = 0.0;
    for (std::size_t m = 0; m < structure.size(); ++m) {
        const double length = structure.layers()[m].length_um;
        const double mismatch = profile[m];
        const double phase0 = entry_phase;
        const auto integrand = [mismatch, phase0](double x) {
            return std::polar(1.0, -(phase0 + mismatch * x));
        };
        const Complex integral = integrate_adaptive(integrand, 0.0, length, 1e-13 * length);
        total += static_cast<double>(signs[m]) * spatial * integral;
        entry_phase += mismatch * length;
    }
    return total;
}

}  // namespace wgspdc
