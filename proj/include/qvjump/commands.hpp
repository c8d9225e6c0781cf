#pragma once

#include <algorithm>
#include <sstream>
#include <string>

#include "qvjump/config.hpp"
#include "qvjump/mcengine.hpp"
#include "qvjump/replication.hpp"

namespace qvjump {

namespace detail {

inline const Claim& need_claim(const RunConfig& c)
{
    if (!c.claim) throw Error("config", "this command needs a 'claim' section");
    return *c.claim;
}

inline std::uint64_t need_seed(const RunConfig& c)
{
    if (!c.seed) throw Error("config", "randomized commands need an explicit seed (--seed or 'seed')");
    return *c.seed;
}

inline PayoffFn payoff_of(const RunConfig& c)
{
    return make_payoff(need_claim(c), c.model, c.branch, c.spectral, c.letf_contour);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace detail

// E g(X_T) by Monte Carlo, with g the payoff function for the configured branch.
inline std::string cmd_price(const RunConfig& c)
{
    const Claim& claim = detail::need_claim(c);
    const std::uint64_t seed = detail::need_seed(c);
    const PayoffFn g = detail::payoff_of(c);
    const auto paths = simulate_paths(c.model, std::nullopt, c.n_paths, seed);
    std::vector<double> xs(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) xs[i] = paths[i].x_T;
    const McResult r = summarize(evaluate_payoff(g, xs));
    json j;
    j["claim"] = claim_name(claim);
    j["branch"] = to_string(c.branch);
    j["price_re"] = r.mean.real();
    j["price_im"] = r.mean.imag();
    j["stderr_re"] = r.stderr_re;
    j["stderr_im"] = r.stderr_im;
    j["n_terms"] = g.rep.size();
    j["seed"] = seed;
    j["n_paths"] = c.n_paths;
    return detail::dump(j);
}

inline std::string cmd_payoff_table(const RunConfig& c)
{
    const PayoffFn g = detail::payoff_of(c);
    const int n = c.table.n_points;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i)
        grid[i] = n == 1 ? c.table.s_min : c.table.s_min + (c.table.s_max - c.table.s_min) * i / (n - 1);
    std::ostringstream os;
    write_payoff_csv(os, payoff_table(g, grid));
    return os.str();
}

inline std::string cmd_mc_check(const RunConfig& c)
{
    const IdentityReport r = check_pricing_identity(detail::need_claim(c), c.model, c.branch, c.n_paths,
                                                    detail::need_seed(c), c.spectral);
    json j;
    j["claim"] = r.claim;
    j["branch"] = to_string(r.branch);
    j["lhs_re"] = r.lhs.real();
    j["lhs_im"] = r.lhs.imag();
    j["rhs_re"] = r.rhs.real();
    j["rhs_im"] = r.rhs.imag();
    j["stderr"] = r.stderr;
    j["z"] = r.z;
    j["pass"] = r.pass;
    j["seed"] = r.seed;
    j["n_paths"] = r.n_paths;
    return detail::dump(j);
}

struct HedgeRow {
    int n_steps;
    std::size_t n_paths;
    double mean_abs_error, p95_abs_error, mean_jumps;
};

// Convergence study of the discretely rebalanced hedge. Every n_steps value
// reuses the same per-path streams.
inline std::vector<HedgeRow> hedge_study(const HedgeProblem& p, const std::vector<int>& n_steps, std::size_t n_paths,
                                         std::uint64_t seed)
{
    std::vector<HedgeRow> rows;
    for (int n : n_steps) {
        std::vector<double> err(n_paths);
        std::vector<double> jumps(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) {
            auto rng = stream_rng(seed, i, Stream::Brownian);
            const HedgePath h = simulate_hedge(p, n, rng);
            err[i] = std::abs(h.terminal_error);
            jumps[i] = h.jumps;
        }
        const double mean = pairwise_sum(err.data(), n_paths) / n_paths;
        const double mj = pairwise_sum(jumps.data(), n_paths) / n_paths;
        const std::size_t k = std::min(n_paths - 1, std::size_t(std::ceil(0.95 * n_paths)) - 1);
        std::nth_element(err.begin(), err.begin() + k, err.end());
        rows.push_back({n, n_paths, mean, err[k], mj});
    }
    return rows;
}

inline HedgeProblem hedge_problem(const RunConfig& c)
{
    const auto* vol = std::get_if<ConstantVol>(&c.model.vol);
    if (!vol) throw Error("config", "hedge-sim marks instruments under constant volatility only");
    const auto* pe = std::get_if<PowerExponential>(&detail::need_claim(c));
    if (!pe || pe->n != 0 || pe->m != 0) throw Error("config", "hedge-sim replicates power_exp claims with n = m = 0");
    HedgeProblem p;
    p.scenario = ClosedFormScenario{vol->sigma, c.model.nu, c.model.T};
    p.omega = pe->omega;
    p.eta = pe->eta;
    p.branch = c.branch;
    p.collar = c.hedge.collar.empty() ? default_collar(c.model.nu) : CollarSpec{c.hedge.collar};
    require(p.collar.q_list.size() >= atoms_of(c.model.nu).size(), "collar", "need at least one collar per atom");
    return p;
}

inline std::string cmd_hedge_sim(const RunConfig& c)
{
    const HedgeProblem p = hedge_problem(c);
    const auto rows = hedge_study(p, c.hedge.n_steps, c.hedge.n_paths, detail::need_seed(c));
    std::ostringstream os;
    os << "n_steps,n_paths,mean_abs_error,p95_abs_error,mean_jumps_per_path\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%.17g,%.17g,%.17g\n", r.n_steps, r.n_paths, r.mean_abs_error,
                      r.p95_abs_error, r.mean_jumps);
        os << buf;
    }
    return os.str();
}

inline std::string cmd_psi_eval(const RunConfig& c)
{
    const cplx a = psi(c.model.nu, c.psi_omega, c.psi_eta);
    const cplx b = psi_quadrature(c.model.nu, c.psi_omega, c.psi_eta);
    json j;
    j["omega"] = {c.psi_omega.real(), c.psi_omega.imag()};
    j["eta"] = {c.psi_eta.real(), c.psi_eta.imag()};
    j["psi_re"] = a.real();
    j["psi_im"] = a.imag();
    j["quad_re"] = b.real();
    j["quad_im"] = b.imag();
    j["abs_diff"] = std::abs(a - b);
    return detail::dump(j);
}

} // namespace qvjump
