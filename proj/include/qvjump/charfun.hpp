#pragma once

#include <cmath>

#include "qvjump/levy.hpp"
#include "qvjump/model.hpp"

namespace qvjump {

enum class Branch { Plus, Minus };

inline const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

inline double branch_sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

// 1/4 - w^2 - i w + 2 i eta; u is singular in its derivatives where this vanishes.
inline cplx branch_radicand(cplx omega, cplx eta)
{
    return 0.25 - omega * omega - I * omega + 2.0 * I * eta;
}

inline bool near_branch_point(cplx omega, cplx eta)
{
    return std::abs(branch_radicand(omega, eta)) < 1e-12;
}

// Root of u^2 + i u = w^2 + i w - 2 i eta selected by the branch.
inline cplx u_branch(cplx omega, cplx eta, Branch b)
{
    return I * (-0.5 + branch_sign(b) * csqrt(branch_radicand(omega, eta)));
}

// The root of the same quadratic that lies closest to `ref`; used to follow a
// branch continuously across the cut of the principal square root.
inline cplx u_nearest(cplx omega, cplx eta, cplx ref)
{
    const cplx up = u_branch(omega, eta, Branch::Plus);
    const cplx um = -I - up;
    return std::abs(up - ref) <= std::abs(um - ref) ? up : um;
}

// d/dp of u_branch(p, i*eta): (1 - 2ip) / sqrt(1 - 4p^2 - 4ip - 8 eta) on the
// plus branch and its negative on the minus branch.
inline cplx du_dp(cplx p, cplx eta, Branch b = Branch::Plus)
{
    const cplx rad = 1.0 - 4.0 * p * p - 4.0 * I * p - 8.0 * eta;
    if (std::abs(rad) < 1e-14) throw Error("branch_point", "du_dp: radicand vanishes");
    return branch_sign(b) * (1.0 - 2.0 * I * p) / csqrt(rad);
}

// A such that E_t exp(i w X_T + i eta [X]_T) = A * E_t exp(i u X_T).
inline cplx transfer_factor(cplx omega, cplx eta, double tau, double x, double qv, const LevyMeasure& nu,
                            Branch b)
{
    const cplx u = u_branch(omega, eta, b);
    return std::exp(tau * (psi(nu, omega, eta) - psi(nu, u, 0.0)) + I * (omega - u) * x + I * eta * qv);
}

// Same factor with the root u supplied by the caller.
inline cplx transfer_factor_at(cplx omega, cplx eta, cplx u, double tau, double x, double qv,
                               const LevyMeasure& nu)
{
    return std::exp(tau * (psi(nu, omega, eta) - psi(nu, u, 0.0)) + I * (omega - u) * x + I * eta * qv);
}

inline cplx a_process(cplx omega, cplx eta, double t, double x, double qv, const LevyMeasure& nu, double T,
                      Branch b)
{
    return transfer_factor(omega, eta, T - t, x, qv, nu, b);
}

// Q_t^(q) = E_t exp(i q X_T) under constant volatility.
inline cplx q_closed(const ClosedFormScenario& s, cplx q, double t, double x)
{
    const double tau = s.T - t;
    const double v = s.sigma_bar * s.sigma_bar;
    return std::exp(I * q * x + tau * (-0.5 * v * (q * q + I * q) + psi(s.nu, q, 0.0)));
}

inline cplx r_process(cplx q, double t, double x, const LevyMeasure& nu, double T)
{
    return std::exp(-I * q * x + (T - t) * psi(nu, -I - q, 0.0));
}

} // namespace qvjump
