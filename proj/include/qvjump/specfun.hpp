#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "qvjump/error.hpp"

namespace qvjump {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// Principal square root. A signed zero imaginary part is treated as +0 so that
// values on the negative real axis always map to +i*sqrt(|a|).
inline cplx csqrt(cplx a)
{
    if (a.imag() == 0.0) a = cplx(a.real(), 0.0);
    return std::sqrt(a);
}

namespace detail {

// 15-point Kronrod abscissae/weights on [-1, 1] (non-negative half).
inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kGkWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// 7-point Gauss weights at kGkNodes[1], [3], [5], [7].
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr double kTwoOverSqrtPi = 1.1283791670955125738961589031215;

inline cplx erf_taylor(cplx z)
{
    const cplx z2 = z * z;
    cplx term = z;
    cplx sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z2 / double(n);
        const cplx add = term / double(2 * n + 1);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return kTwoOverSqrtPi * sum;
}

// erfcx(z) = exp(z^2) erfc(z) for Re z >= 0 via the Laplace continued fraction.
inline cplx erfcx_cf(cplx z)
{
    constexpr double tiny = 1e-300;
    cplx f = z, c = z, d = 0.0;
    for (int n = 1; n < 5000; ++n) {
        const double a = 0.5 * n;
        d = z + a * d;
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        c = z + a / c;
        if (std::abs(c) < tiny) c = tiny;
        const cplx delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return kTwoOverSqrtPi / (2.0 * f);
}

// erfcx(z) = (2/sqrt(pi)) * int_0^inf exp(-t^2 - 2 z t) dt for Re z >= 0.
inline cplx erfcx_integral(cplx z)
{
    constexpr double width = 0.25;
    constexpr int panels = 28;
    cplx sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double c = (p + 0.5) * width;
        const double h = 0.5 * width;
        for (int k = 0; k < 8; ++k) {
            const double w = kGkWeights[k] * h;
            const double t1 = c + h * kGkNodes[k];
            sum += w * std::exp(-t1 * t1 - 2.0 * z * t1);
            if (k < 7) {
                const double t2 = c - h * kGkNodes[k];
                sum += w * std::exp(-t2 * t2 - 2.0 * z * t2);
            }
        }
    }
    return kTwoOverSqrtPi * sum;
}

} // namespace detail

// Scaled complementary error function exp(z^2) erfc(z), for Re z >= 0.
inline cplx erfcx_right(cplx z)
{
    if (z.real() < 0.0) throw Error("domain", "erfcx_right requires Re z >= 0");
    if (std::abs(z) >= 6.0) return detail::erfcx_cf(z);
    return detail::erfcx_integral(z);
}

inline cplx erf_complex(cplx z)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error("domain", "erf_complex: non-finite argument");
    if (z.real() < 0.0) return -erf_complex(-z);
    if (std::abs(z) <= 1.5) return detail::erf_taylor(z);
    const cplx mz2 = -z * z;
    if (mz2.real() > 700.0) throw Error("overflow", "erf_complex: exp(-z^2) overflows");
    return 1.0 - std::exp(mz2) * erfcx_right(z);
}

inline double gamma_real(double x)
{
    if (!(x > 0.0)) throw Error("domain", "gamma_real requires x > 0");
    return std::tgamma(x);
}

} // namespace qvjump
