#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "qvjump/charfun.hpp"
#include "qvjump/spectral.hpp"

namespace qvjump {

// Payoff X_T^n [X]_T^m exp(i w X_T + i eta [X]_T).
struct PowerExponential {
    int n = 0, m = 0;
    cplx omega = 0.0, eta = 0.0;
};
// Payoff [X]_T.
struct VarianceSwap {};
// Payoff [X]_T^r, 0 < r < 1.
struct FractionalPower {
    double r = 0.5;
};
// Payoff X_T exp(i p X_T) / ([X]_T + eps)^r, 0 < r < 1.
struct RatioI {
    cplx p = 0.0;
    double r = 0.5, eps = 1e-3;
};
// Payoff exp(i p X_T) / ([X]_T + eps)^r, r > 0.
struct RatioII {
    cplx p = 0.0;
    double r = 0.7, eps = 1e-3;
};
// Payoff (exp(Y_T) - exp(k))^+ on the LETF log price Y.
struct LetfCall {
    double beta = 1.0, k = 0.0;
};

using Claim = std::variant<PowerExponential, VarianceSwap, FractionalPower, RatioI, RatioII, LetfCall>;

inline std::string claim_name(const Claim& c)
{
    static const char* names[] = {"power_exp", "variance_swap", "frac_power", "ratio_1", "ratio_2", "letf_call"};
    return names[c.index()];
}

inline void validate(const Claim& c)
{
    std::visit(overloaded{
                   [](const PowerExponential& p) {
                       require(p.n >= 0 && p.m >= 0, "claim", "power exponents must be >= 0");
                       require(p.n + p.m <= ExpPolySum::kMaxDegree, "claim", "n + m must be <= 4");
                   },
                   [](const VarianceSwap&) {},
                   [](const FractionalPower& f) { require(f.r > 0.0 && f.r < 1.0, "claim", "r must lie in (0,1)"); },
                   [](const RatioI& q) {
                       require(q.r > 0.0 && q.r < 1.0, "claim", "r must lie in (0,1)");
                       require(q.eps > 0.0, "claim", "eps must be positive");
                   },
                   [](const RatioII& q) {
                       require(q.r > 0.0, "claim", "r must be positive");
                       require(q.eps > 0.0, "claim", "eps must be positive");
                   },
                   [](const LetfCall& l) {
                       require(std::isfinite(l.beta) && l.beta != 0.0, "claim", "leverage beta must be nonzero");
                       require(std::isfinite(l.k), "claim", "strike k must be finite");
                   },
               },
               c);
}

// phi(X_T, [X]_T) or, for the LETF call, phi(Y_T).
inline cplx claim_payoff(const Claim& c, double x, double qv, double y = 0.0)
{
    return std::visit(overloaded{
                          [&](const PowerExponential& p) {
                              return std::pow(x, p.n) * std::pow(qv, p.m) * std::exp(I * p.omega * x + I * p.eta * qv);
                          },
                          [&](const VarianceSwap&) { return cplx(qv); },
                          [&](const FractionalPower& f) { return cplx(std::pow(qv, f.r)); },
                          [&](const RatioI& q) { return x * std::exp(I * q.p * x) / std::pow(qv + q.eps, q.r); },
                          [&](const RatioII& q) { return std::exp(I * q.p * x) / std::pow(qv + q.eps, q.r); },
                          [&](const LetfCall& l) { return cplx(std::max(std::exp(y) - std::exp(l.k), 0.0)); },
                      },
                      c);
}

struct Conditioning {
    double t = 0.0;
    double x_t = 0.0;
    double qv_t = 0.0;
    double y_t = 0.0;
};

struct SpectralOptions {
    double x_lo = -3.0, x_hi = 3.0; // range the node set is refined for
    double tol = 1e-9;
    double cutoff = 0.0; // upper integration limit; 0 picks it from the model
};

// European payoff g with E phi = E g(X_T).
struct PayoffFn {
    ExpPolySum rep;
    Branch branch = Branch::Plus;
    Claim claim;
    Conditioning conditioning;
    double x_lo = -INFINITY, x_hi = INFINITY; // accuracy range of rep
    double quad_error = 0.0;
    double cutoff = INFINITY;

    cplx operator()(double x) const { return rep(x); }
};

namespace detail {

inline void require_origin(const ModelSpec& m)
{
    require(m.x0 == 0.0 && m.qv0 == 0.0, "model", "payoff generators assume X_0 = 0 and [X]_0 = 0");
}

inline double binom(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// d^a/dw^a d^b/deta^b f at (w0, e0) by tensor central differences with two
// Richardson refinements; throws when the last two estimates disagree beyond
// 1e-6 relative to max(|result|, scale), scale being the size of f itself.
template <class F>
cplx richardson_mixed(F&& f, cplx w0, cplx e0, int a, int b, double h, double scale)
{
    auto central = [&](double s) {
        cplx acc = 0.0;
        for (int j = 0; j <= a; ++j)
            for (int l = 0; l <= b; ++l) {
                const double sign = ((j + l) % 2) ? -1.0 : 1.0;
                acc += sign * binom(a, j) * binom(b, l) * f(w0 + (0.5 * a - j) * s, e0 + (0.5 * b - l) * s);
            }
        return acc / std::pow(s, a + b);
    };
    const cplx d0 = central(h), d1 = central(0.5 * h), d2 = central(0.25 * h);
    const cplx r1a = (4.0 * d1 - d0) / 3.0, r1b = (4.0 * d2 - d1) / 3.0;
    const cplx r2 = (16.0 * r1b - r1a) / 15.0;
    if (std::abs(r2 - r1b) > 1e-6 * std::max(std::abs(r2), scale))
        throw Error("derivative", "Richardson estimates disagree beyond 1e-6 relative");
    return r2;
}

} // namespace detail

// Step used for an order-k mixed difference around (w, eta): grows with the
// order to control round-off and stays well inside the distance to the
// branch point.
inline double fd_step(cplx omega, cplx eta, int order)
{
    static constexpr double grow[] = {1.0, 10.0, 100.0, 300.0, 400.0};
    double h = 1e-4 * std::max({1.0, std::abs(omega), std::abs(eta)}) * grow[std::min(order, 4)];
    const double dist = std::abs(branch_radicand(omega, eta)) / std::max(std::abs(2.0 * omega + I), 2.0);
    return std::min(h, dist / (2.0 * std::max(order, 1)));
}

// Mixed derivative (-i d_w)^a (-i d_eta)^b of the transfer factor at t = 0.
inline cplx transfer_factor_derivative(cplx omega, cplx eta, int a, int b, const ModelSpec& model, Branch br)
{
    const cplx u0 = u_branch(omega, eta, br);
    const double T = model.T;
    const cplx A = transfer_factor_at(omega, eta, u0, T, model.x0, model.qv0, model.nu);
    if (a + b == 0) return A;
    const cplx s = 2.0 * u0 + I;
    if (a + b == 1) {
        const cplx psi_u = psi_domega(model.nu, u0, 0.0);
        if (a == 1) {
            const cplx uw = (2.0 * omega + I) / s;
            return -I * A * (T * (psi_domega(model.nu, omega, eta) - psi_u * uw) + I * (1.0 - uw) * model.x0);
        }
        const cplx ue = -2.0 * I / s;
        return -I * A *
               (T * (psi_deta(model.nu, omega, eta) - psi_u * ue) - I * ue * model.x0 + I * model.qv0);
    }
    auto f = [&](cplx w, cplx e) {
        return transfer_factor_at(w, e, u_nearest(w, e, u0), T, model.x0, model.qv0, model.nu);
    };
    return std::pow(-I, a + b) *
           detail::richardson_mixed(f, omega, eta, a, b, fd_step(omega, eta, a + b), std::abs(A));
}

namespace detail {

// Bivariate Taylor coefficients in (dw, deta), truncated at total degree 4.
using Series2 = std::array<std::array<cplx, 5>, 5>;

inline Series2 series_mul(const Series2& x, const Series2& y)
{
    Series2 r{};
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j)
            for (int p = 0; p <= i; ++p)
                for (int q = 0; q <= j; ++q) r[i][j] += x[p][q] * y[i - p][j - q];
    return r;
}

// Taylor series of u(w0 + dw, eta0 + deta) - u0 from the exact expansion of
// the square root of the quadratic radicand.
inline Series2 u_increment_series(cplx omega, cplx eta, Branch br)
{
    const cplx d0 = branch_radicand(omega, eta);
    Series2 t{}; // (D - D0) / D0
    t[1][0] = (-2.0 * omega - I) / d0;
    t[0][1] = 2.0 * I / d0;
    t[2][0] = -1.0 / d0;
    Series2 sum{}, pw = t;
    double c = 1.0;
    for (int k = 1; k <= 4; ++k) {
        c *= (1.5 - k) / k; // binom(1/2, k)
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; i + j <= 4; ++j) sum[i][j] += c * pw[i][j];
        pw = series_mul(pw, t);
    }
    const cplx scale = I * branch_sign(br) * csqrt(d0);
    for (auto& row : sum)
        for (auto& v : row) v *= scale;
    return sum;
}

} // namespace detail

// Coefficients e_l with (-i d_w)^a (-i d_eta)^b exp(i u x) = exp(i u0 x) sum_l e_l x^l.
inline std::array<cplx, ExpPolySum::kMaxDegree + 1> exp_factor_derivative(cplx omega, cplx eta, int a, int b,
                                                                          Branch br)
{
    std::array<cplx, ExpPolySum::kMaxDegree + 1> e{};
    const int k = a + b;
    if (k == 0) {
        e[0] = 1.0;
        return e;
    }
    const detail::Series2 du = detail::u_increment_series(omega, eta, br);
    detail::Series2 pw = du;
    const double fa = detail::factorial(a) * detail::factorial(b);
    for (int l = 1; l <= k; ++l) {
        e[l] = std::pow(I, l) / detail::factorial(l) * std::pow(-I, k) * fa * pw[a][b];
        pw = detail::series_mul(pw, du);
    }
    return e;
}

inline PayoffFn g_power_exp(const PowerExponential& c, const ModelSpec& model, Branch br)
{
    validate(Claim{c});
    validate(model);
    detail::require_origin(model);
    if (near_branch_point(c.omega, c.eta))
        throw Error("branch_point", "power-exponential claim sits on the branch point of u");
    const cplx u0 = u_branch(c.omega, c.eta, br);
    std::array<cplx, ExpPolySum::kMaxDegree + 1> poly{};
    for (int j = 0; j <= c.n; ++j)
        for (int k = 0; k <= c.m; ++k) {
            const cplx da = transfer_factor_derivative(c.omega, c.eta, j, k, model, br);
            const auto de = exp_factor_derivative(c.omega, c.eta, c.n - j, c.m - k, br);
            const double w = detail::binom(c.n, j) * detail::binom(c.m, k);
            for (int l = 0; l <= ExpPolySum::kMaxDegree; ++l) poly[l] += w * da * de[l];
        }
    PayoffFn g;
    g.rep.terms.push_back({u0, poly});
    g.branch = br;
    g.claim = c;
    return g;
}

inline PayoffFn g_variance_swap(const ModelSpec& model, Branch br)
{
    validate(model);
    detail::require_origin(model);
    const auto& nu = model.nu;
    const double one = levy_moment(nu, Moment::One), z = levy_moment(nu, Moment::Z);
    const double z2 = levy_moment(nu, Moment::Z2), ez = levy_moment(nu, Moment::ExpZ);
    PayoffFn g;
    if (br == Branch::Plus) {
        g.rep.add(0.0, model.T * (-2.0 * ez + z2 + 2.0 * z + 2.0 * one), -2.0);
    } else {
        const double zez = levy_moment(nu, Moment::ZExpZ);
        g.rep.add(-I, model.T * (-2.0 * zez + 2.0 * ez + z2 - 2.0 * one), 2.0);
    }
    g.branch = br;
    g.claim = VarianceSwap{};
    return g;
}

namespace detail {

inline double auto_cutoff(double decay_rate, double lo, double hi)
{
    return std::clamp(32.0 / decay_rate, lo, hi);
}

inline PayoffFn finish(SpectralBuilder& b, const SpectralOptions& o, Branch br, Claim c, double cutoff)
{
    if (!b.converged()) throw Error("quadrature", "payoff integral did not reach tolerance");
    PayoffFn g;
    g.rep = b.finish();
    g.branch = br;
    g.claim = std::move(c);
    g.x_lo = o.x_lo;
    g.x_hi = o.x_hi;
    g.quad_error = b.error();
    g.cutoff = cutoff;
    return g;
}

// Segments shared by the integral representations in the variable z of
// u(p, i z): [0, c/2] (power map for z^(-alpha)), [c/2, c] (square-root map
// toward the branch point c) and z = c + s^2 beyond, up to z_max.
template <class AtomFn>
void add_branch_segments(SpectralBuilder& b, AtomFn&& atom, double c, double left_alpha, double z_max)
{
    const double half = 0.5 * c;
    if (left_alpha > 0.0) {
        const double pw = 1.0 / (1.0 - left_alpha);
        b.add_segment([&](double t) {
            const double tp = std::pow(t, pw);
            NodeAtom n = atom(half * tp);
            const double jac = half * pw * tp / t;
            n.fixed *= jac, n.c0 *= jac, n.c1 *= jac;
            return n;
        }, 0.0, 1.0, 0.3);
    } else {
        b.add_segment(atom, 0.0, half, 0.3);
    }
    b.add_segment([&](double t) {
        NodeAtom n = atom(c - half * t * t);
        const double jac = 2.0 * half * t;
        n.fixed *= jac, n.c0 *= jac, n.c1 *= jac;
        return n;
    }, 0.0, 1.0, 0.2);
    const double s_max = std::sqrt(std::max(z_max - c, 1.0));
    b.add_segment([&](double s) {
        NodeAtom n = atom(c + s * s);
        const double jac = 2.0 * s;
        n.fixed *= jac, n.c0 *= jac, n.c1 *= jac;
        return n;
    }, 0.0, s_max, 0.5);
}

} // namespace detail

// g(x) = r/Gamma(1-r) int_0^inf z^(-r-1) (e^{i u(0,0) x} - F(z) e^{i u(0,iz) x}) dz,
// integrated by parts into 1/Gamma(1-r) int_0^inf z^(-r) (-i d_eta)[F e^{iux}] dz
// so that no two large terms cancel near z = 0.
inline PayoffFn g_frac_power(double r, const ModelSpec& model, Branch br, const SpectralOptions& o = {})
{
    validate(Claim{FractionalPower{r}});
    validate(model);
    detail::require_origin(model);
    const double T = model.T;
    const auto& nu = model.nu;
    const double C = 1.0 / gamma_real(1.0 - r);
    const double c = 0.125;
    const double z_max = o.cutoff > 0 ? o.cutoff : detail::auto_cutoff(variance_floor(model), 10.0, 1e7);

    SpectralBuilder b(0.0, o.x_lo, o.x_hi, o.tol);
    auto atom = [&](double z) {
        const cplx eta = I * z;
        const cplx u = u_branch(0.0, eta, br);
        const cplx ue = -2.0 * I / (2.0 * u + I);
        const cplx F = std::exp(T * (psi(nu, 0.0, eta) - psi(nu, u, 0.0)));
        const cplx wF = C * std::pow(z, -r) * F;
        return NodeAtom{0.0, u, -I * wF * T * (psi_deta(nu, 0.0, eta) - psi_domega(nu, u, 0.0) * ue), wF * ue};
    };
    detail::add_branch_segments(b, atom, c, r, z_max);
    return detail::finish(b, o, br, FractionalPower{r}, z_max);
}

// Shared body of the two ratio claims in the variable zeta = z^(1/r):
// g(x) = 1/Gamma(r) int zeta^(r-1) e^{-eps zeta} K(zeta, x) d zeta.
template <bool WithX>
PayoffFn g_ratio(cplx p, double r, double eps, const ModelSpec& model, Branch br, const SpectralOptions& o,
                 Claim claim)
{
    validate(claim);
    validate(model);
    detail::require_origin(model);
    const double T = model.T;
    const auto& nu = model.nu;
    const double norm = 1.0 / gamma_real(r);
    const cplx zstar = (1.0 - 4.0 * p * p - 4.0 * I * p) / 8.0;
    const double c = zstar.real() > 1e-3 ? zstar.real() : 0.125;
    const double z_max =
        o.cutoff > 0 ? o.cutoff : detail::auto_cutoff(variance_floor(model) + eps, 10.0 * c, 1e7);

    SpectralBuilder b(0.0, o.x_lo, o.x_hi, o.tol);
    auto atom = [&](double z) {
        const cplx u = u_branch(p, I * z, br);
        const cplx F = std::exp(T * (psi(nu, p, I * z) - psi(nu, u, 0.0)));
        const double w = norm * std::pow(z, r - 1.0) * std::exp(-eps * z);
        if constexpr (WithX) {
            const cplx up = du_dp(p, z, br);
            const cplx fp = T * (psi_domega(nu, p, I * z) - psi_domega(nu, u, 0.0) * up);
            return NodeAtom{0.0, u, -I * w * F * fp, w * F * up};
        } else {
            return NodeAtom{0.0, u, w * F, 0.0};
        }
    };
    detail::add_branch_segments(b, atom, c, 1.0 - r, z_max);
    return detail::finish(b, o, br, std::move(claim), z_max);
}

inline PayoffFn g_ratio_I(cplx p, double r, double eps, const ModelSpec& model, Branch br,
                          const SpectralOptions& o = {})
{
    return g_ratio<true>(p, r, eps, model, br, o, RatioI{p, r, eps});
}

inline PayoffFn g_ratio_II(cplx p, double r, double eps, const ModelSpec& model, Branch br,
                           const SpectralOptions& o = {})
{
    return g_ratio<false>(p, r, eps, model, br, o, RatioII{p, r, eps});
}

struct LetfFactor {
    cplx factor; // exp(tau chi(q)) / exp(tau psi(u, 0))
    cplx u;
};

// E_t exp(i q (Y_T - Y_t)) = factor * E_t exp(i u (X_T - X_t)).
inline LetfFactor letf_cf(double beta, cplx q, double tau, const ModelSpec& model, Branch br)
{
    const cplx u = u_branch(q * beta, q * beta * (1.0 - beta) / 2.0, br);
    return {std::exp(tau * (chi(model.nu, beta, q) - psi(model.nu, u, 0.0))), u};
}

// g(x; X_t, Y_t) = int phi_hat(q) e^{i q Y_t} factor(q) e^{i u (x - X_t)} dq_r on Im q = contour.
inline PayoffFn g_letf_call(double beta, double k, const ModelSpec& model, Branch br, double contour = -1.5,
                            const SpectralOptions& o = {}, Conditioning cond = {})
{
    validate(Claim{LetfCall{beta, k}});
    validate(model);
    require(contour < -1.0, "contour", "LETF contour must satisfy Im q < -1");
    check_assumption2(model.nu, beta);
    if (cond.t == 0.0) {
        cond.x_t = model.x0;
        cond.y_t = model.y0;
        cond.qv_t = model.qv0;
    }
    const double tau = model.T - cond.t;
    require(tau >= 0.0, "model", "conditioning time beyond the horizon");
    const double q_max = o.cutoff > 0
                             ? o.cutoff
                             : std::clamp(std::sqrt(64.0 / (beta * beta * std::max(tau, 1e-12) *
                                                            std::pow(min_level(model.vol), 2))),
                                          20.0, 2000.0);
    const double two_pi = 2.0 * std::numbers::pi;

    SpectralBuilder b(0.0, o.x_lo, o.x_hi, o.tol);
    auto atom = [&](double qr) {
        const cplx q(qr, contour);
        const cplx phat = -std::exp(k - I * k * q) / (two_pi * (q * q + I * q));
        const LetfFactor f = letf_cf(beta, q, tau, model, br);
        return NodeAtom{0.0, f.u, phat * std::exp(I * q * cond.y_t) * f.factor * std::exp(-I * f.u * cond.x_t), 0.0};
    };
    b.add_segment(atom, -q_max, 0.0, 0.5);
    b.add_segment(atom, 0.0, q_max, 0.5);
    PayoffFn g = detail::finish(b, o, br, LetfCall{beta, k}, q_max);
    g.conditioning = cond;
    return g;
}

// Dispatches on the claim type.
inline PayoffFn make_payoff(const Claim& c, const ModelSpec& model, Branch br, const SpectralOptions& o = {},
                            double letf_contour = -1.5)
{
    return std::visit(overloaded{
                          [&](const PowerExponential& p) { return g_power_exp(p, model, br); },
                          [&](const VarianceSwap&) { return g_variance_swap(model, br); },
                          [&](const FractionalPower& f) { return g_frac_power(f.r, model, br, o); },
                          [&](const RatioI& q) { return g_ratio_I(q.p, q.r, q.eps, model, br, o); },
                          [&](const RatioII& q) { return g_ratio_II(q.p, q.r, q.eps, model, br, o); },
                          [&](const LetfCall& l) { return g_letf_call(l.beta, l.k, model, br, letf_contour, o); },
                      },
                      c);
}

struct StaticWeights {
    double bond_units = 0.0;
    std::vector<double> strike_grid;
    std::vector<double> put_density;  // nonzero only below spot
    std::vector<double> call_density; // nonzero only at or above spot
};

// Carr-Madan weights for f(S) = Re g(log S): bond f(spot) plus f''(K) dK in
// out-of-the-money puts and calls.
inline StaticWeights static_weights(const PayoffFn& g, double spot, const std::vector<double>& strikes)
{
    require(spot > 0.0, "domain", "spot must be positive");
    require(strikes.size() >= 3, "domain", "strike grid needs at least three strikes");
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        require(strikes[i] > 0.0, "domain", "strikes must be positive");
        if (i) require(strikes[i] > strikes[i - 1], "domain", "strikes must be ascending");
    }
    require(strikes.front() < spot && spot < strikes.back(), "domain", "strike grid does not bracket spot");
    const std::size_t n = strikes.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = g(std::log(strikes[i])).real();

    StaticWeights w;
    w.bond_units = g(std::log(spot)).real();
    w.strike_grid = strikes;
    w.put_density.assign(n, 0.0);
    w.call_density.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = strikes[i] - strikes[i - 1], hr = strikes[i + 1] - strikes[i];
        const double f2 = 2.0 * ((f[i + 1] - f[i]) / hr - (f[i] - f[i - 1]) / hl) / (hl + hr);
        const double wt = f2 * 0.5 * (hl + hr);
        (strikes[i] < spot ? w.put_density : w.call_density)[i] = wt;
    }
    return w;
}

struct PayoffRow {
    double s;
    double re_g;
    double im_g;
};

inline std::vector<PayoffRow> payoff_table(const PayoffFn& g, const std::vector<double>& s_grid)
{
    std::vector<PayoffRow> rows;
    rows.reserve(s_grid.size());
    for (double s : s_grid) {
        require(s > 0.0, "domain", "payoff table grid must be positive");
        const cplx v = g(std::log(s));
        rows.push_back({s, v.real(), v.imag()});
    }
    return rows;
}

inline void write_payoff_csv(std::ostream& os, const std::vector<PayoffRow>& rows)
{
    char buf[96];
    os << "S,Re_g,Im_g\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.s, r.re_g, r.im_g);
        os << buf;
    }
}

} // namespace qvjump
