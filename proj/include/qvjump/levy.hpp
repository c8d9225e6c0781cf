#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qvjump/quadrature.hpp"

namespace qvjump {

struct DiracSum {
    // (weight per unit time, log-jump location)
    std::vector<std::pair<double, double>> atoms;
};

// Constant density lambda on [m1, m2].
struct Uniform {
    double lambda, m1, m2;
};

// Density lambda * exp(-alpha |z|) on (-m, m).
struct TruncExp {
    double lambda, alpha, m;
};

using LevyMeasure = std::variant<DiracSum, Uniform, TruncExp>;

struct JumpEvent {
    double time;
    double size;
};

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

inline void validate(const LevyMeasure& nu)
{
    std::visit(overloaded{
                   [](const DiracSum& d) {
                       require(!d.atoms.empty(), "measure", "DiracSum needs at least one atom");
                       for (auto [w, m] : d.atoms) {
                           require(w > 0.0 && std::isfinite(w), "measure", "DiracSum weights must be positive");
                           require(std::isfinite(m), "measure", "DiracSum locations must be finite");
                       }
                   },
                   [](const Uniform& u) {
                       require(u.lambda > 0.0 && std::isfinite(u.lambda), "measure", "Uniform lambda must be positive");
                       require(std::isfinite(u.m1) && std::isfinite(u.m2) && u.m1 < u.m2, "measure",
                               "Uniform requires finite m1 < m2");
                   },
                   [](const TruncExp& t) {
                       require(t.lambda > 0.0 && std::isfinite(t.lambda), "measure", "TruncExp lambda must be positive");
                       require(t.alpha > 0.0 && std::isfinite(t.alpha), "measure", "TruncExp alpha must be positive");
                       require(t.m > 0.0 && std::isfinite(t.m), "measure", "TruncExp cutoff must be positive");
                   },
               },
               nu);
}

inline double total_mass(const LevyMeasure& nu)
{
    return std::visit(overloaded{
                          [](const DiracSum& d) {
                              double s = 0.0;
                              for (auto [w, m] : d.atoms) s += w;
                              return s;
                          },
                          [](const Uniform& u) { return u.lambda * (u.m2 - u.m1); },
                          [](const TruncExp& t) { return -2.0 * t.lambda * std::expm1(-t.alpha * t.m) / t.alpha; },
                      },
                      nu);
}

inline double support_bound(const LevyMeasure& nu)
{
    return std::visit(overloaded{
                          [](const DiracSum& d) {
                              double c = 0.0;
                              for (auto [w, m] : d.atoms) c = std::max(c, std::abs(m));
                              return c;
                          },
                          [](const Uniform& u) { return std::max(std::abs(u.m1), std::abs(u.m2)); },
                          [](const TruncExp& t) { return t.m; },
                      },
                      nu);
}

// Integral of f against nu. Atoms are summed; densities go through adaptive
// quadrature with the given absolute tolerance.
template <class F>
cplx levy_integral(const LevyMeasure& nu, F&& f, double tol = 1e-13)
{
    QuadOptions opt;
    opt.rel_tol = 1e-14;
    return std::visit(overloaded{
                          [&](const DiracSum& d) {
                              cplx s = 0.0;
                              for (auto [w, m] : d.atoms) s += w * cplx(f(m));
                              return s;
                          },
                          [&](const Uniform& u) {
                              auto g = [&](double z) { return cplx(f(z)); };
                              return u.lambda * integrate_finite(g, u.m1, u.m2, tol / u.lambda, opt).value;
                          },
                          [&](const TruncExp& t) {
                              auto neg = [&](double z) { return cplx(f(z)) * std::exp(t.alpha * z); };
                              auto pos = [&](double z) { return cplx(f(z)) * std::exp(-t.alpha * z); };
                              const double h = 0.5 * tol / t.lambda;
                              return t.lambda * (integrate_finite(neg, -t.m, 0.0, h, opt).value +
                                                 integrate_finite(pos, 0.0, t.m, h, opt).value);
                          },
                      },
                      nu);
}

namespace detail {

// (e^x - 1) / x, accurate near 0.
inline cplx exprel(cplx x)
{
    if (std::abs(x) < 1e-3) return 1.0 + x * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x / 120.0)));
    return (std::exp(x) - 1.0) / x;
}

// int_0^m e^{c z} dz
inline cplx exp_segment(cplx c, double m) { return m * exprel(c * m); }

// int_lo^hi exp(i eta z^2 + i omega z) dz for eta != 0, written with erfcx so
// that no exponentially large factor is formed unless the result needs it.
inline cplx gauss_segment(cplx omega, cplx eta, double lo, double hi)
{
    const cplx a = -I * eta;
    const cplx s = csqrt(a);
    const cplx b = omega / (2.0 * eta);
    const cplx z1 = s * (lo + b), z2 = s * (hi + b);
    const cplx e1 = std::exp(I * eta * lo * lo + I * omega * lo);
    const cplx e2 = std::exp(I * eta * hi * hi + I * omega * hi);
    const cplx pref = std::sqrt(std::numbers::pi) / (2.0 * s);
    const bool r1 = z1.real() >= 0.0, r2 = z2.real() >= 0.0;
    if (r1 && r2) return pref * (e1 * erfcx_right(z1) - e2 * erfcx_right(z2));
    if (!r1 && !r2) return pref * (e2 * erfcx_right(-z2) - e1 * erfcx_right(-z1));
    const cplx g = a * b * b;
    if (g.real() > 700.0) throw Error("overflow", "gauss_segment: result exceeds double range");
    if (!r1) return pref * (2.0 * std::exp(g) - e2 * erfcx_right(z2) - e1 * erfcx_right(-z1));
    return pref * (-2.0 * std::exp(g) + e2 * erfcx_right(-z2) + e1 * erfcx_right(z1));
}

// int (e^z - 1) nu(dz) for the density families.
inline double uniform_exp_minus_one(const Uniform& u)
{
    return u.lambda * (std::exp(u.m2) - std::exp(u.m1) - (u.m2 - u.m1));
}

inline double truncexp_exp_minus_one(const TruncExp& t)
{
    const double m = t.m, al = t.alpha;
    const double v = exp_segment(1.0 - al, m).real() + exp_segment(-1.0 - al, m).real() -
                     2.0 * exp_segment(-al, m).real();
    return t.lambda * v;
}

inline constexpr double kEtaSwitch = 1e-6;

} // namespace detail

// Direct quadrature of int (e^{i w z + i eta z^2} - 1 - i w (e^z - 1)) nu(dz).
inline cplx psi_quadrature(const LevyMeasure& nu, cplx omega, cplx eta)
{
    return levy_integral(
        nu,
        [&](double z) { return std::exp(I * omega * z + I * eta * z * z) - 1.0 - I * omega * std::expm1(z); },
        1e-12);
}

inline cplx psi(const LevyMeasure& nu, cplx omega, cplx eta)
{
    using detail::exp_segment;
    using detail::gauss_segment;
    return std::visit(
        overloaded{
            [&](const DiracSum& d) {
                cplx s = 0.0;
                for (auto [w, m] : d.atoms)
                    s += w * (std::exp(I * omega * m + I * eta * m * m) - 1.0 - I * omega * std::expm1(m));
                return s;
            },
            [&](const Uniform& u) -> cplx {
                cplx j;
                if (eta == 0.0)
                    j = std::exp(I * omega * u.m1) * exp_segment(I * omega, u.m2 - u.m1);
                else if (std::abs(eta) < detail::kEtaSwitch)
                    return psi_quadrature(nu, omega, eta);
                else
                    j = gauss_segment(omega, eta, u.m1, u.m2);
                return u.lambda * (j - (u.m2 - u.m1)) - I * omega * detail::uniform_exp_minus_one(u);
            },
            [&](const TruncExp& t) -> cplx {
                cplx j;
                if (eta == 0.0)
                    j = exp_segment(I * omega - t.alpha, t.m) + exp_segment(-I * omega - t.alpha, t.m);
                else if (std::abs(eta) < detail::kEtaSwitch)
                    return psi_quadrature(nu, omega, eta);
                else
                    j = gauss_segment(omega - I * t.alpha, eta, -t.m, 0.0) +
                        gauss_segment(omega + I * t.alpha, eta, 0.0, t.m);
                return t.lambda * j - total_mass(nu) - I * omega * detail::truncexp_exp_minus_one(t);
            },
        },
        nu);
}

// d psi / d omega
inline cplx psi_domega(const LevyMeasure& nu, cplx omega, cplx eta)
{
    return levy_integral(
        nu, [&](double z) { return I * z * std::exp(I * omega * z + I * eta * z * z) - I * std::expm1(z); }, 1e-12);
}

// d psi / d eta
inline cplx psi_deta(const LevyMeasure& nu, cplx omega, cplx eta)
{
    return levy_integral(nu, [&](double z) { return I * z * z * std::exp(I * omega * z + I * eta * z * z); }, 1e-12);
}

// Enforces beta (e^z - 1) + 1 > 0 on the support.
inline void check_assumption2(const LevyMeasure& nu, double beta)
{
    auto ok = [beta](double z) { return beta * std::expm1(z) + 1.0 > 0.0; };
    const bool good = std::visit(overloaded{
                                     [&](const DiracSum& d) {
                                         return std::all_of(d.atoms.begin(), d.atoms.end(),
                                                            [&](auto a) { return ok(a.second); });
                                     },
                                     [&](const Uniform& u) { return ok(u.m1) && ok(u.m2); },
                                     [&](const TruncExp& t) { return ok(-t.m) && ok(t.m); },
                                 },
                                 nu);
    if (!good)
        throw Error("assumption2", "leveraged jump beta(e^z-1)+1 is not positive on the support for beta=" +
                                       std::to_string(beta));
}

inline cplx chi(const LevyMeasure& nu, double beta, cplx q)
{
    check_assumption2(nu, beta);
    return levy_integral(
        nu,
        [&](double z) {
            const double lev = beta * std::expm1(z);
            return std::exp(I * q * std::log1p(lev)) - 1.0 - I * q * lev;
        },
        1e-12);
}

inline double exp_compensator(const LevyMeasure& nu)
{
    return std::visit(overloaded{
                          [](const DiracSum& d) {
                              double s = 0.0;
                              for (auto [w, m] : d.atoms) s += w * (std::expm1(m) - m);
                              return s;
                          },
                          [](const Uniform& u) {
                              return detail::uniform_exp_minus_one(u) -
                                     u.lambda * 0.5 * (u.m2 * u.m2 - u.m1 * u.m1);
                          },
                          [](const TruncExp& t) { return detail::truncexp_exp_minus_one(t); },
                      },
                      nu);
}

inline double letf_compensator(const LevyMeasure& nu, double beta)
{
    check_assumption2(nu, beta);
    return levy_integral(nu, [&](double z) {
               const double lev = beta * std::expm1(z);
               return cplx(lev - std::log1p(lev));
           }).real();
}

enum class Moment { One, Z, Z2, ExpZ, ZExpZ };

// <f(dX)> = int f(z) nu(dz) for the five moments used by the variance swap.
inline double levy_moment(const LevyMeasure& nu, Moment f)
{
    auto eval = [f](double z) {
        switch (f) {
        case Moment::One: return 1.0;
        case Moment::Z: return z;
        case Moment::Z2: return z * z;
        case Moment::ExpZ: return std::exp(z);
        case Moment::ZExpZ: return z * std::exp(z);
        }
        return 0.0;
    };
    if (const auto* u = std::get_if<Uniform>(&nu)) {
        auto anti = [f](double z) {
            switch (f) {
            case Moment::One: return z;
            case Moment::Z: return 0.5 * z * z;
            case Moment::Z2: return z * z * z / 3.0;
            case Moment::ExpZ: return std::exp(z);
            case Moment::ZExpZ: return (z - 1.0) * std::exp(z);
            }
            return 0.0;
        };
        return u->lambda * (anti(u->m2) - anti(u->m1));
    }
    return levy_integral(nu, [&](double z) { return cplx(eval(z)); }).real();
}

// Compound-Poisson realization on [0, horizon], sorted by time.
template <class Rng>
std::vector<JumpEvent> sample_jumps(const LevyMeasure& nu, double horizon, Rng& rng)
{
    if (!(horizon > 0.0)) throw Error("domain", "sample_jumps: horizon must be positive");
    std::poisson_distribution<long> count(total_mass(nu) * horizon);
    const long n = count(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<JumpEvent> out(n);
    for (auto& e : out) e.time = horizon * unif(rng);
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.time < b.time; });

    std::visit(overloaded{
                   [&](const DiracSum& d) {
                       std::vector<double> w;
                       for (auto [wt, m] : d.atoms) w.push_back(wt);
                       std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
                       for (auto& e : out) e.size = d.atoms[pick(rng)].second;
                   },
                   [&](const Uniform& u) {
                       for (auto& e : out) e.size = u.m1 + (u.m2 - u.m1) * unif(rng);
                   },
                   [&](const TruncExp& t) {
                       const double span = -std::expm1(-t.alpha * t.m);
                       for (auto& e : out) {
                           const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
                           const double mag = -std::log1p(-unif(rng) * span) / t.alpha;
                           e.size = sign * std::min(mag, t.m);
                       }
                   },
               },
               nu);
    return out;
}

} // namespace qvjump
