#pragma once

#include <complex>
#include <functional>

namespace wgspdc {

using ComplexIntegrand = std::function<std::complex<double>(double)>;

struct KronrodEstimate {
    std::complex<double> kronrod;
    std::complex<double> gauss;  // embedded 7-point rule
};

/// 15-point Gauss-Kronrod rule on [a, b].
[[nodiscard]] KronrodEstimate gauss_kronrod15(const ComplexIntegrand& f, double a, double b);

inline constexpr int kMaxQuadratureDepth = 30;

/// Recursive bisection until |K15 - G7| <= tolerance on every piece (the
/// tolerance is halved with each split). Throws QuadratureNonConvergence
/// past depth 30.
[[nodiscard]] std::complex<double> integrate_adaptive(const ComplexIntegrand& f, double a,
                                                      double b, double tolerance);

}  // namespace wgspdc
