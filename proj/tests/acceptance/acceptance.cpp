// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "qvjump/commands.hpp"

using namespace qvjump;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

cplx random_in_disc(std::mt19937_64& rng, double r)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(r * std::sqrt(u(rng)), 2 * std::numbers::pi * u(rng));
}

std::vector<LevyMeasure> families()
{
    return {DiracSum{{{1.0, 0.5}, {0.5, -0.4}}}, Uniform{1.0, -0.5, 0.5}, TruncExp{1.0, 2.0, 0.8}};
}

const RegimeSwitching kRegime{{0.1, 0.3}, {2.0, 2.0}, {0.5, 0.5}};

ModelSpec model(LevyMeasure nu, VolScenario vol, double T = 0.25)
{
    ModelSpec m;
    m.T = T;
    m.nu = std::move(nu);
    m.vol = std::move(vol);
    return m;
}

Outcome psi_closed_forms()
{
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (const auto& nu : families())
        for (int i = 0; i < 200; ++i) {
            const cplx w = random_in_disc(rng, 5.0), e = random_in_disc(rng, 5.0);
            worst = std::max(worst, std::abs(psi(nu, w, e) - psi_quadrature(nu, w, e)));
        }
    return {worst <= 1e-8, fmt("max |psi - quadrature| = %.3g over 3 x 200 points (tol 1e-8)", worst)};
}

Outcome branch_identity()
{
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const cplx w = random_in_disc(rng, 5.0), e = random_in_disc(rng, 5.0);
        for (Branch b : {Branch::Plus, Branch::Minus}) {
            const cplx u = u_branch(w, e, b);
            worst = std::max(worst, std::abs(u * u + I * u - (w * w + I * w - 2.0 * I * e)));
        }
    }
    const bool exact = u_branch(0.0, 0.0, Branch::Plus) == cplx(0.0) && u_branch(0.0, 0.0, Branch::Minus) == -I;
    return {worst <= 1e-12 && exact,
            fmt("max residual %.3g over 500 points (tol 1e-12); u(0,0) exact: %s", worst, exact ? "yes" : "no")};
}

Outcome closed_form_identity()
{
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (const auto& nu : families()) {
        const ClosedFormScenario s{0.2, nu, 0.25};
        const double v = s.sigma_bar * s.sigma_bar;
        for (int i = 0; i < 100; ++i) {
            const cplx w = random_in_disc(rng, 2.0), e = random_in_disc(rng, 2.0);
            const cplx lhs = std::exp(s.T * (I * e * v - 0.5 * (w * w + I * w) * v + psi(nu, w, e)));
            for (Branch b : {Branch::Plus, Branch::Minus}) {
                const cplx rhs = transfer_factor(w, e, s.T, 0.0, 0.0, nu, b) * q_closed(s, u_branch(w, e, b), 0.0, 0.0);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
            }
        }
    }
    return {worst <= 1e-10, fmt("max relative gap %.3g over 3 x 100 points, both branches (tol 1e-10)", worst)};
}

Outcome mc_pricing_identities()
{
    struct Family {
        const char* name;
        ModelSpec m;
    };
    const std::vector<Family> fams{{"dirac/const", model(DiracSum{{{2.0, -0.4}}}, ConstantVol{0.2})},
                                   {"uniform/regime", model(Uniform{1.0, -0.3, 0.3}, kRegime)}};
    const std::vector<Claim> claims{PowerExponential{1, 1, 0.5, 0.3}, VarianceSwap{}, FractionalPower{0.5},
                                    RatioI{0.0, 0.5, 1e-3},           RatioII{0.0, 0.7, 1e-3}, LetfCall{-2.0, 0.0},
                                    LetfCall{1.0, 0.0},               LetfCall{2.0, 0.0}};
    int n = 0, failed = 0;
    double zmax = 0.0;
    std::string fails;
    std::uint64_t seed = 100;
    for (const auto& f : fams)
        for (const auto& c : claims)
            for (Branch b : {Branch::Plus, Branch::Minus}) {
                const IdentityReport r = check_pricing_identity(c, f.m, b, 100000, seed++);
                ++n;
                zmax = std::max(zmax, r.z);
                if (!r.pass) {
                    ++failed;
                    fails += fmt(" %s/%s/%s z=%.2f", r.claim.c_str(), f.name, to_string(b), r.z);
                }
            }
    return {failed == 0, fmt("%d/%d identities within 3 se at N=1e5, max z %.2f%s", n - failed, n, zmax, fails.c_str())};
}

Outcome variance_swap_cases()
{
    bool ok = true;
    std::string detail;
    // no jumps: atom at zero size, and a vanishing weight
    const PayoffFn g0 = g_variance_swap(model(DiracSum{{{1.0, 0.0}}}, ConstantVol{0.2}), Branch::Plus);
    const PayoffFn gs = g_variance_swap(model(DiracSum{{{1e-300, 0.3}}}, ConstantVol{0.2}), Branch::Plus);
    double gap0 = 0.0, gaps = 0.0;
    for (double x = -1.0; x <= 1.0; x += 0.125) {
        gap0 = std::max(gap0, std::abs(g0(x) - cplx(-2.0 * x)));
        gaps = std::max(gaps, std::abs(gs(x) - cplx(-2.0 * x)));
    }
    ok = ok && gap0 == 0.0 && gaps <= 1e-15;
    detail += fmt("nu->0: max|g+2x| %.3g (exact), %.3g (weight 1e-300)", gap0, gaps);

    double worst = 0.0;
    for (double m : {-2.0, 0.0, 2.0})
        for (double lam : {1.0, 2.0}) {
            const PayoffFn g = g_variance_swap(model(DiracSum{{{lam, m}}}, ConstantVol{0.2}), Branch::Plus);
            const double want = 0.25 * lam * (-2.0 * std::exp(m) + m * m + 2.0 * m + 2.0);
            worst = std::max(worst, std::abs(g(0.0) - want));
        }
    ok = ok && worst <= 1e-12;
    detail += fmt("; Dirac g(0) gap %.3g (tol 1e-12)", worst);

    const ModelSpec m = model(DiracSum{{{1.0, -2.0}}}, ConstantVol{0.2});
    const double want = 0.04 * 0.25 + 0.25 * 4.0;
    const McResult qv = mc_expectation([](const PathRecord& p) { return cplx(p.qv_T); }, m, std::nullopt, 100000, 7);
    const double z = std::abs(qv.mean.real() - want) / qv.stderr_re;
    ok = ok && z <= 3.0;
    detail += fmt("; MC E[X]_T %.5f vs %.5f (z %.2f)", qv.mean.real(), want, z);
    return {ok, detail};
}

Outcome collar_symmetry()
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ut(0.0, 0.25), ux(-1.0, 1.0);
    double worst = 0.0;
    for (const auto& nu : families()) {
        const ClosedFormScenario s{0.2, nu, 0.25};
        for (int i = 0; i < 100; ++i) {
            const cplx q = random_in_disc(rng, 2.0);
            const double t = ut(rng), x = ux(rng);
            const cplx lhs = r_process(q, t, x, nu, s.T) * q_closed(s, q, t, x);
            const cplx rhs = r_process(-I - q, t, x, nu, s.T) * q_closed(s, -I - q, t, x);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    return {worst <= 1e-10, fmt("max relative gap %.3g over 3 x 100 states (tol 1e-10)", worst)};
}

HedgeProblem two_atom(Branch b)
{
    HedgeProblem p;
    p.scenario = {0.2, DiracSum{{{1.0, 0.3}, {1.0, -0.4}}}, 0.25};
    p.omega = 1.0;
    p.eta = 0.5;
    p.branch = b;
    p.collar = default_collar(p.scenario.nu);
    return p;
}

Outcome jump_self_financing()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 0.24), ux(-0.5, 0.5), uq(0.0, 0.1);
    double worst = 0.0;
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const HedgeProblem p = two_atom(b);
        for (int i = 0; i < 50; ++i) {
            const double t = ut(rng), x = ux(rng), qv = uq(rng);
            const double scale = std::max(1.0, std::abs(p.a(t, x, qv) * p.q(p.u(), t, x)));
            for (double z : atoms_of(p.scenario.nu))
                worst = std::max(worst, std::abs(jump_residual(p, t, x, qv, z)) / scale);
        }
    }
    return {worst <= 1e-10, fmt("max tracking error %.3g over 50 states x 2 atoms x 2 branches (tol 1e-10)", worst)};
}

Outcome hedge_convergence()
{
    const auto rows = hedge_study(two_atom(Branch::Plus), {64, 256, 1024}, 1000, 8);
    const bool decreasing = rows[0].mean_abs_error > rows[1].mean_abs_error &&
                            rows[1].mean_abs_error > rows[2].mean_abs_error;
    // real (omega, eta): the claim has modulus 1
    const bool small = rows[2].mean_abs_error < 0.05;
    return {decreasing && small, fmt("mean |error| %.3g, %.3g, %.3g at 64/256/1024 steps (need decreasing, last < 0.05)",
                                     rows[0].mean_abs_error, rows[1].mean_abs_error, rows[2].mean_abs_error)};
}

Outcome letf_beta_one()
{
    std::string detail;
    bool ok = true;
    const ModelSpec m = model(Uniform{1.0, -0.3, 0.3}, kRegime);
    const auto paths = simulate_paths(m, std::nullopt, 100000, 9);
    std::vector<double> xs(paths.size());
    std::vector<cplx> vanilla(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        xs[i] = paths[i].x_T;
        vanilla[i] = std::max(std::exp(xs[i]) - 1.0, 0.0);
    }
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const auto gx = evaluate_payoff(g_letf_call(1.0, 0.0, m, b), xs);
        std::vector<cplx> diff(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) diff[i] = gx[i] - vanilla[i];
        const McResult d = summarize(diff);
        const double z = z_score(d);
        ok = ok && z <= 3.0;
        detail += fmt("%s%s: E g %.6f vs call %.6f (z %.2f)", detail.empty() ? "" : "; ", to_string(b),
                      summarize(gx).mean.real(), summarize(vanilla).mean.real(), z);
    }
    return {ok, detail};
}

Outcome figure_ordering()
{
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(0.5 + 1.5 * i / 60);
    auto curve = [&](double lam, double m, Branch b) {
        std::vector<double> out;
        for (const auto& r : payoff_table(g_variance_swap(model(DiracSum{{{lam, m}}}, ConstantVol{0.2}), b), grid))
            out.push_back(r.re_g);
        return out;
    };
    bool ok = true;
    std::string detail;
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const auto lo = curve(1, -2, b), mid = curve(1, 0, b), hi = curve(1, 2, b), l2 = curve(2, -2, b), l3 = curve(3, -2, b);
        int bad_m = 0, bad_l = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            bad_m += !(lo[i] > mid[i] && hi[i] < mid[i]);
            bad_l += !(lo[i] < l2[i] && l2[i] < l3[i]);
        }
        ok = ok && bad_m == 0 && bad_l == 0;
        detail += fmt("%s%s: %d m-order and %d lambda-order violations on %zu points", detail.empty() ? "" : "; ",
                      to_string(b), bad_m, bad_l, grid.size());
    }
    return {ok, detail};
}

Outcome determinism()
{
    const json base = json::parse(R"({
      "model": {"T": 0.25, "nu": {"type": "dirac", "atoms": [[1.0, 0.3], [1.0, -0.4]]},
                "vol": {"type": "constant", "sigma": 0.2}},
      "claim": {"type": "power_exp", "omega": 1.0, "eta": 0.5},
      "seed": 11, "n_paths": 5000,
      "hedge": {"n_steps": [16, 64], "n_paths": 100},
      "psi": {"omega": [1.0, 0.5], "eta": 0.2}
    })");
    json frac = base;
    frac["model"]["vol"] = json::parse(R"({"type": "regime", "levels": [0.1, 0.3], "rates": [2, 2], "initial": [0.5, 0.5]})");
    frac["claim"] = json::parse(R"({"type": "frac_power", "r": 0.5})");
    const RunConfig a = parse_config(base), f = parse_config(frac);
    const std::vector<std::pair<const char*, std::function<std::string()>>> runs{
        {"price", [&] { return cmd_price(f); }},
        {"payoff-table", [&] { return cmd_payoff_table(f); }},
        {"mc-check", [&] { return cmd_mc_check(f); }},
        {"hedge-sim", [&] { return cmd_hedge_sim(a); }},
        {"psi-eval", [&] { return cmd_psi_eval(a); }},
    };
    std::string diff;
    for (const auto& [name, fn] : runs)
        if (fn() != fn()) diff += std::string(" ") + name;
    return {diff.empty(), diff.empty() ? "5 commands byte-identical across two runs" : "differs:" + diff};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double budget_s; // 0: no runtime limit
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "psi closed form vs quadrature", 10, psi_closed_forms},
        {2, "branch identity", 0, branch_identity},
        {3, "closed-form joint transform identity", 5, closed_form_identity},
        {4, "pricing identity by Monte Carlo", 300, mc_pricing_identities},
        {5, "variance swap special cases", 0, variance_swap_cases},
        {6, "collar symmetry", 0, collar_symmetry},
        {7, "jump self-financing", 0, jump_self_financing},
        {8, "hedge convergence", 180, hedge_convergence},
        {9, "LETF beta=1 reduction", 0, letf_beta_one},
        {10, "variance swap figure ordering", 30, figure_ordering},
        {11, "determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const Error& e) {
            o = {false, "error [" + e.category() + "] " + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("%.1fs", s);
        if (c.budget_s > 0) {
            timing += fmt(" of %.0fs", c.budget_s);
            if (s >= c.budget_s) o.pass = false;
        }
        failed += !o.pass;
        std::printf("%s [%d] %s: %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    return failed;
}
