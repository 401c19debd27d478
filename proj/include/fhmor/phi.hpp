#pragma once

#include <fhmor/types.hpp>

namespace fhmor {

// Moment kernels of the finite-horizon inner products:
//   phi1(x, tf) = ∫_0^tf e^{xt} dt   = (e^{x·tf} − 1)/x
//   phi2(x, tf) = ∫_0^tf t·e^{xt} dt = ((x·tf − 1)·e^{x·tf} + 1)/x²
// phi2 is also ∂phi1/∂x. The removable singularity at x = 0 (phi1 → tf,
// phi2 → tf²/2) is handled by a truncated series below |x·tf| = 1e-3; the
// degree-8 truncation keeps the relative error under 1e-16 there.

namespace detail {

inline constexpr double kPhiSeriesSwitch = 1e-3;
inline constexpr double kPhiOverflowLimit = 700.0;  // exp() overflow bound

inline void check_phi_overflow(Complex x, double tf) {
    if (x.real() * tf > kPhiOverflowLimit)
        throw OverflowError("phi kernel: exp(" + std::to_string(x.real() * tf) +
                            ") exceeds double range");
}

}  // namespace detail

inline Complex phi1(Complex x, double tf) {
    detail::check_phi_overflow(x, tf);
    const Complex z = x * tf;
    if (std::abs(z) < detail::kPhiSeriesSwitch) {
        // tf · Σ_{k=0..8} z^k/(k+1)!
        static constexpr double c[9] = {1.0,
                                        1.0 / 2.0,
                                        1.0 / 6.0,
                                        1.0 / 24.0,
                                        1.0 / 120.0,
                                        1.0 / 720.0,
                                        1.0 / 5040.0,
                                        1.0 / 40320.0,
                                        1.0 / 362880.0};
        Complex acc(c[8], 0.0);
        for (int k = 7; k >= 0; --k) acc = acc * z + c[k];
        return tf * acc;
    }
    return (std::exp(z) - 1.0) / x;
}

inline Complex phi2(Complex x, double tf) {
    detail::check_phi_overflow(x, tf);
    const Complex z = x * tf;
    if (std::abs(z) < detail::kPhiSeriesSwitch) {
        // tf² · Σ_{k=0..8} (k+1)·z^k/(k+2)!
        static constexpr double c[9] = {1.0 / 2.0,
                                        2.0 / 6.0,
                                        3.0 / 24.0,
                                        4.0 / 120.0,
                                        5.0 / 720.0,
                                        6.0 / 5040.0,
                                        7.0 / 40320.0,
                                        8.0 / 362880.0,
                                        9.0 / 3628800.0};
        Complex acc(c[8], 0.0);
        for (int k = 7; k >= 0; --k) acc = acc * z + c[k];
        return tf * tf * acc;
    }
    return ((z - 1.0) * std::exp(z) + 1.0) / (x * x);
}

}  // namespace fhmor
