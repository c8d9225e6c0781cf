#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "qvjump/charfun.hpp"

namespace qvjump {

using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

// Tracking error per unit of A Q^(u) of the naive hedge at a jump of size z.
inline cplx f_jump(double z, cplx omega, cplx eta, cplx u)
{
    return std::exp(I * omega * z + I * eta * z * z) - std::exp(I * u * z) - I * (omega - u) * std::expm1(z);
}

// Jump P&L per unit of R^(q) Q^(q) of the collar (q, -i-q).
inline cplx g_jump(double z, cplx q)
{
    return -std::exp(I * q * z) + std::exp((1.0 - I * q) * z) - (1.0 - 2.0 * I * q) * std::expm1(z);
}

inline std::vector<double> atoms_of(const LevyMeasure& nu)
{
    const auto* d = std::get_if<DiracSum>(&nu);
    if (!d) throw Error("measure", "replication requires a DiracSum Levy measure");
    std::vector<double> z;
    for (auto [w, m] : d->atoms)
        if (w > 0.0) z.push_back(m);
    return z;
}

inline VectorXc build_K(cplx omega, cplx eta, cplx u, cplx aq, const std::vector<double>& atoms)
{
    VectorXc k(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) k(i) = aq * f_jump(atoms[i], omega, eta, u);
    return k;
}

// rq[j] is R^(q_j) Q^(q_j) just before the jump.
inline MatrixXc build_L(const std::vector<cplx>& q_list, const std::vector<cplx>& rq,
                        const std::vector<double>& atoms)
{
    MatrixXc l(atoms.size(), q_list.size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = 0; j < q_list.size(); ++j) l(i, j) = rq[j] * g_jump(atoms[i], q_list[j]);
    return l;
}

struct HedgeSolve {
    VectorXc h;
    double residual = 0.0;
    double condition = 0.0;
};

// Solves L H = K; the minimum-norm solution when L is wide.
inline HedgeSolve solve_hedge(const VectorXc& k, const MatrixXc& l)
{
    require(l.rows() == k.size(), "dimension", "K and L row counts differ");
    require(l.cols() >= l.rows(), "dimension", "need at least as many collars as atoms");
    Eigen::JacobiSVD<MatrixXc> svd(l);
    const auto& sv = svd.singularValues();
    HedgeSolve out;
    out.condition = sv.size() ? sv(0) / sv(sv.size() - 1) : 0.0;
    if (!(sv.size() && sv(sv.size() - 1) > 1e-13 * sv(0)))
        throw Error("rank", "collar matrix L is rank deficient (condition number " +
                                std::to_string(out.condition) + ")");
    if (l.rows() == l.cols())
        out.h = l.partialPivLu().solve(k);
    else
        out.h = l.completeOrthogonalDecomposition().solve(k);
    out.residual = (l * out.h - k).norm();
    return out;
}

struct CollarSpec {
    std::vector<cplx> q_list;
};

inline void validate(const CollarSpec& c)
{
    require(!c.q_list.empty(), "collar", "collar list is empty");
    for (cplx q : c.q_list)
        for (cplx bad : {cplx(0.0), -0.5 * I, -I})
            require(std::abs(q - bad) > 1e-12, "collar", "collar parameter q must avoid 0, -i/2 and -i");
}

// q1 = i and the first q2 = +-ik, k Fibonacci in [2, 100], with |D(q2)| above
// 1e-6 of the size of its two products.
inline std::pair<cplx, cplx> choose_collar_params(double z1, double z2)
{
    require(z1 * z2 * (z1 - z2) != 0.0, "collar", "need distinct nonzero jump sizes");
    const cplx q1 = I;
    for (int a = 2, b = 3; a <= 100; std::tie(a, b) = std::pair{b, a + b}) {
        for (double sign : {1.0, -1.0}) {
            const cplx q2 = sign * a * I;
            const cplx p = g_jump(z1, q1) * g_jump(z2, q2), m = g_jump(z1, q2) * g_jump(z2, q1);
            const double scale = std::abs(p) + std::abs(m);
            if (std::abs(p - m) > 1e-6 * scale) return {q1, q2};
        }
    }
    throw Error("collar", "no admissible q2 found with |Im q2| <= 100");
}

inline CollarSpec default_collar(const LevyMeasure& nu)
{
    const auto z = atoms_of(nu);
    if (z.size() <= 1) return {{I}};
    require(z.size() == 2, "collar", "automatic collar selection covers at most two atoms");
    const auto [q1, q2] = choose_collar_params(z[0], z[1]);
    return {{q1, q2}};
}

// Positions of the replicating portfolio; collar legs are per q_j.
struct HedgeState {
    double t = 0.0;
    double x = 0.0;
    double qv = 0.0;
    cplx claim_u = 0.0;         // units of e^{iuX_T}
    cplx shares = 0.0;
    cplx bond = 0.0;
    std::vector<cplx> leg_q;    // units of e^{iq_j X_T}
    std::vector<cplx> leg_qbar; // units of e^{i(-i-q_j) X_T}
};

// Claim being replicated, with the model it is marked under.
struct HedgeProblem {
    ClosedFormScenario scenario;
    cplx omega = 0.0, eta = 0.0;
    Branch branch = Branch::Plus;
    CollarSpec collar;

    cplx u() const { return u_branch(omega, eta, branch); }
    cplx a(double t, double x, double qv) const
    {
        return a_process(omega, eta, t, x, qv, scenario.nu, scenario.T, branch);
    }
    cplx q(cplx k, double t, double x) const { return q_closed(scenario, k, t, x); }
    cplx r(cplx k, double t, double x) const { return r_process(k, t, x, scenario.nu, scenario.T); }
};

// Mark-to-market of the held positions at (t, x).
inline cplx portfolio_value(const HedgeProblem& p, const HedgeState& s, double t, double x)
{
    cplx v = s.bond + s.shares * std::exp(x) + s.claim_u * p.q(p.u(), t, x);
    for (std::size_t j = 0; j < s.leg_q.size(); ++j) {
        const cplx q = p.collar.q_list[j];
        v += s.leg_q[j] * p.q(q, t, x) + s.leg_qbar[j] * p.q(-I - q, t, x);
    }
    return v;
}

// Collar units H at state (t, x, qv): solves K = -L H.
inline VectorXc collar_units(const HedgeProblem& p, double t, double x, double qv)
{
    const auto atoms = atoms_of(p.scenario.nu);
    const cplx u = p.u();
    const cplx aq = p.a(t, x, qv) * p.q(u, t, x);
    std::vector<cplx> rq;
    for (cplx q : p.collar.q_list) rq.push_back(p.r(q, t, x) * p.q(q, t, x));
    return solve_hedge(-build_K(p.omega, p.eta, u, aq, atoms), build_L(p.collar.q_list, rq, atoms)).h;
}

// Resets the risky positions for state (t, x, qv); the bond absorbs the
// difference so that the portfolio keeps its value `value`. Without collars
// this is the naive hedge.
inline void rebalance(const HedgeProblem& p, HedgeState& s, cplx value, bool with_collars = true)
{
    const cplx u = p.u();
    const double S = std::exp(s.x);
    const cplx a = p.a(s.t, s.x, s.qv);
    const cplx aq = a * p.q(u, s.t, s.x);
    const std::size_t m = p.collar.q_list.size();
    const VectorXc h = with_collars ? collar_units(p, s.t, s.x, s.qv) : VectorXc::Zero(m);
    s.claim_u = a;
    s.shares = I * (p.omega - u) * aq / S;
    s.leg_q.assign(m, 0.0);
    s.leg_qbar.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const cplx q = p.collar.q_list[j];
        const cplx r = p.r(q, s.t, s.x);
        s.shares += h(j) * (1.0 - 2.0 * I * q) * r * p.q(q, s.t, s.x) / S;
        s.leg_q[j] = h(j) * r;
        s.leg_qbar[j] = -h(j) * p.r(-I - q, s.t, s.x);
    }
    s.bond = 0.0;
    s.bond = value - portfolio_value(p, s, s.t, s.x);
}

// Applies a jump of size z with positions held fixed. `mismatch` receives the
// portfolio change minus the change of A Q^(u); with `enforce` a mismatch
// beyond 1e-8 relative is an error.
inline HedgeState jump_update(const HedgeProblem& p, HedgeState s, double z, bool enforce = true,
                              cplx* mismatch = nullptr)
{
    if (mismatch) *mismatch = 0.0;
    if (z == 0.0) return s;
    const cplx u = p.u();
    const cplx pi0 = portfolio_value(p, s, s.t, s.x);
    const cplx aq0 = p.a(s.t, s.x, s.qv) * p.q(u, s.t, s.x);
    s.x += z;
    s.qv += z * z;
    const cplx d_pi = portfolio_value(p, s, s.t, s.x) - pi0;
    const cplx d_aq = p.a(s.t, s.x, s.qv) * p.q(u, s.t, s.x) - aq0;
    if (mismatch) *mismatch = d_pi - d_aq;
    if (enforce && std::abs(d_pi - d_aq) > 1e-8 * std::max({1.0, std::abs(aq0), std::abs(d_aq)}))
        throw Error("self_financing", "portfolio change differs from the change of A Q^(u) at a jump");
    return s;
}

// Jump residual of the hedge at state (t, x, qv) for jump z: the tracking
// error plus the collar P&L; zero when H solves K = -L H.
inline cplx jump_residual(const HedgeProblem& p, double t, double x, double qv, double z)
{
    const cplx u = p.u();
    const VectorXc h = collar_units(p, t, x, qv);
    cplx res = p.a(t, x, qv) * p.q(u, t, x) * f_jump(z, p.omega, p.eta, u);
    for (std::size_t j = 0; j < p.collar.q_list.size(); ++j) {
        const cplx q = p.collar.q_list[j];
        res += h(j) * p.r(q, t, x) * p.q(q, t, x) * g_jump(z, q);
    }
    return res;
}

struct HedgePath {
    cplx terminal_error = 0.0; // Pi_T - claim
    cplx claim = 0.0;
    int jumps = 0;
};

// One path of the discretely rebalanced hedge under constant volatility;
// rebalances on the uniform grid and at every jump time.
template <class Rng>
HedgePath simulate_hedge(const HedgeProblem& p, int n_steps, Rng& rng)
{
    require(n_steps >= 1, "domain", "n_steps must be >= 1");
    validate(p.scenario);
    validate(p.collar);
    const auto& sc = p.scenario;
    const double T = sc.T, v = sc.sigma_bar * sc.sigma_bar;
    const double drift = -0.5 * v - levy_moment(sc.nu, Moment::ExpZ) + levy_moment(sc.nu, Moment::One);
    auto jumps = sample_jumps(sc.nu, T, rng);
    std::normal_distribution<double> gauss;

    HedgeState s;
    rebalance(p, s, p.a(0.0, 0.0, 0.0) * p.q(p.u(), 0.0, 0.0));
    std::size_t next_jump = 0;
    HedgePath out;
    auto diffuse_to = [&](double t1) {
        const double dt = t1 - s.t;
        if (dt <= 0.0) return;
        s.x += drift * dt + sc.sigma_bar * std::sqrt(dt) * gauss(rng);
        s.qv += v * dt;
        s.t = t1;
    };
    for (int k = 1; k <= n_steps; ++k) {
        const double tk = (k == n_steps) ? T : T * k / n_steps;
        while (next_jump < jumps.size() && jumps[next_jump].time < tk) {
            diffuse_to(jumps[next_jump].time);
            rebalance(p, s, portfolio_value(p, s, s.t, s.x));
            s = jump_update(p, s, jumps[next_jump].size);
            ++out.jumps;
            ++next_jump;
            rebalance(p, s, portfolio_value(p, s, s.t, s.x));
        }
        diffuse_to(tk);
        if (k < n_steps) rebalance(p, s, portfolio_value(p, s, s.t, s.x));
    }
    out.claim = std::exp(I * p.omega * s.x + I * p.eta * s.qv);
    out.terminal_error = portfolio_value(p, s, T, s.x) - out.claim;
    return out;
}

} // namespace qvjump
