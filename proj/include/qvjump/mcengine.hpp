#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qvjump/pricing.hpp"

namespace qvjump {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { Vol = 0, Brownian = 1, Jumps = 2 };

// Independent generator for (seed, path, stream).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t path, Stream s)
{
    const std::uint64_t a = splitmix64(seed ^ splitmix64(path * 3 + static_cast<std::uint64_t>(s) + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(s)};
    return std::mt19937_64(seq);
}

struct PathStreams {
    std::mt19937_64 vol, brownian, jumps;

    PathStreams(std::uint64_t seed, std::uint64_t path)
        : vol(stream_rng(seed, path, Stream::Vol)), brownian(stream_rng(seed, path, Stream::Brownian)),
          jumps(stream_rng(seed, path, Stream::Jumps))
    {
    }
};

struct PathRecord {
    double x_T = 0.0;
    double qv_T = 0.0;
    double y_T = 0.0; // meaningful only when beta was requested
    std::vector<JumpEvent> jumps;
    double vol_integral = 0.0;
};

// Piecewise-constant volatility path on [0, T] as (switch time, level) pairs.
template <class Rng>
std::vector<std::pair<double, double>> sample_vol_path(const VolScenario& v, double T, Rng& rng)
{
    return std::visit(overloaded{
                          [&](const ConstantVol& c) { return std::vector<std::pair<double, double>>{{0.0, c.sigma}}; },
                          [&](const RegimeSwitching& r) {
                              std::discrete_distribution<std::size_t> init(r.initial.begin(), r.initial.end());
                              std::size_t state = init(rng);
                              std::vector<std::pair<double, double>> out{{0.0, r.levels[state]}};
                              const std::size_t n = r.levels.size();
                              double t = 0.0;
                              while (n > 1 && r.rates[state] > 0.0) {
                                  t += std::exponential_distribution<double>(r.rates[state])(rng);
                                  if (t >= T) break;
                                  std::uniform_int_distribution<std::size_t> pick(0, n - 2);
                                  std::size_t next = pick(rng);
                                  if (next >= state) ++next;
                                  state = next;
                                  out.emplace_back(t, r.levels[state]);
                              }
                              return out;
                          },
                      },
                      v);
}

// Exact simulation of (X_T, [X]_T, Y_T): Gaussian X^c per constant-volatility
// segment of the uniform n_steps grid refined by regime switches, jumps at
// their event times.
inline PathRecord simulate_path(const ModelSpec& m, std::optional<double> beta, PathStreams& rng, int n_steps = 1)
{
    require(n_steps >= 1, "domain", "n_steps must be >= 1");
    const double T = m.T;
    const auto vol = sample_vol_path(m.vol, T, rng.vol);
    std::vector<double> cuts;
    for (int k = 1; k < n_steps; ++k) cuts.push_back(T * k / n_steps);
    for (std::size_t i = 1; i < vol.size(); ++i) cuts.push_back(vol[i].first);
    cuts.push_back(T);
    std::sort(cuts.begin(), cuts.end());

    std::normal_distribution<double> gauss;
    double xc = 0.0, qvc = 0.0, t = 0.0;
    std::size_t regime = 0;
    for (double c : cuts) {
        while (regime + 1 < vol.size() && vol[regime + 1].first <= t) ++regime;
        const double dt = c - t;
        if (dt > 0.0) {
            const double s = vol[regime].second, v = s * s * dt;
            xc += -0.5 * v + std::sqrt(v) * gauss(rng.brownian);
            qvc += v;
        }
        t = c;
    }

    PathRecord p;
    p.vol_integral = qvc;
    p.jumps = sample_jumps(m.nu, T, rng.jumps);
    // jumps enter uncompensated, so the drift carries -<e^z - 1>
    const double jump_drift = -(exp_compensator(m.nu) + levy_moment(m.nu, Moment::Z));
    double xj = jump_drift * T, qvj = 0.0;
    for (const auto& e : p.jumps) {
        xj += e.size;
        qvj += e.size * e.size;
    }
    p.x_T = m.x0 + xc + xj;
    p.qv_T = m.qv0 + qvc + qvj;
    if (beta) {
        const double b = *beta;
        check_assumption2(m.nu, b);
        double yj = -b * (exp_compensator(m.nu) + levy_moment(m.nu, Moment::Z)) * T;
        for (const auto& e : p.jumps) yj += std::log1p(b * std::expm1(e.size));
        p.y_T = m.y0 + b * xc + 0.5 * b * (1.0 - b) * qvc + yj;
    }
    return p;
}

// Deterministic pairwise sum.
template <class T>
T pairwise_sum(const T* v, std::size_t n)
{
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

struct McResult {
    cplx mean = 0.0;
    double stderr_re = 0.0, stderr_im = 0.0;
    double stderr() const { return std::max(stderr_re, stderr_im); }
};

inline McResult summarize(const std::vector<cplx>& v)
{
    const std::size_t n = v.size();
    require(n >= 2, "domain", "need at least two samples");
    McResult r;
    r.mean = pairwise_sum(v.data(), n) / double(n);
    std::vector<double> dr(n), di(n);
    for (std::size_t i = 0; i < n; ++i) {
        dr[i] = std::pow(v[i].real() - r.mean.real(), 2);
        di[i] = std::pow(v[i].imag() - r.mean.imag(), 2);
    }
    r.stderr_re = std::sqrt(pairwise_sum(dr.data(), n) / (n - 1) / n);
    r.stderr_im = std::sqrt(pairwise_sum(di.data(), n) / (n - 1) / n);
    return r;
}

// Largest of |mean| / stderr over the real and imaginary parts of a
// difference; means at or below 1e-12 count as exact agreement.
inline double z_score(const McResult& d)
{
    auto part = [](double delta, double se) {
        if (std::abs(delta) <= 1e-12) return 0.0;
        return se > 0.0 ? std::abs(delta) / se : INFINITY;
    };
    return std::max(part(d.mean.real(), d.stderr_re), part(d.mean.imag(), d.stderr_im));
}

inline std::vector<PathRecord> simulate_paths(const ModelSpec& m, std::optional<double> beta, std::size_t n,
                                              std::uint64_t seed, int n_steps = 1)
{
    validate(m);
    std::vector<PathRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PathStreams rng(seed, i);
        out.push_back(simulate_path(m, beta, rng, n_steps));
    }
    return out;
}

template <class F>
McResult mc_expectation(F&& functional, const ModelSpec& m, std::optional<double> beta, std::size_t n,
                        std::uint64_t seed)
{
    require(n >= 100, "domain", "mc_expectation needs at least 100 paths");
    validate(m);
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        PathStreams rng(seed, i);
        v[i] = functional(simulate_path(m, beta, rng));
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
            throw Error("mc", "non-finite functional on path " + std::to_string(i) + " of seed " +
                                  std::to_string(seed));
    }
    return summarize(v);
}

// Evaluates g at every x, through a Hermite table when g has many terms.
inline std::vector<cplx> evaluate_payoff(const PayoffFn& g, const std::vector<double>& xs)
{
    std::vector<cplx> out(xs.size());
    if (g.rep.size() <= 16 || xs.size() < 1000) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = g(xs[i]);
        return out;
    }
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const HermiteTable tab(g.rep, *lo, *hi, 5e-4);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = tab(xs[i]);
    return out;
}

struct IdentityReport {
    std::string claim;
    Branch branch = Branch::Plus;
    cplx lhs = 0.0, rhs = 0.0;
    double stderr = 0.0;
    double z = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
};

// E phi against E g(X_T) on the same paths.
inline IdentityReport check_pricing_identity(const Claim& c, const ModelSpec& m, Branch br, std::size_t n,
                                             std::uint64_t seed, const SpectralOptions& o = {})
{
    validate(c);
    const PayoffFn g = make_payoff(c, m, br, o);
    std::optional<double> beta;
    if (const auto* l = std::get_if<LetfCall>(&c)) beta = l->beta;
    const auto paths = simulate_paths(m, beta, n, seed);
    std::vector<double> xs(n);
    std::vector<cplx> phi(n), diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = paths[i].x_T;
        phi[i] = claim_payoff(c, paths[i].x_T, paths[i].qv_T, paths[i].y_T);
    }
    const std::vector<cplx> gx = evaluate_payoff(g, xs);
    for (std::size_t i = 0; i < n; ++i) diff[i] = phi[i] - gx[i];
    const McResult d = summarize(diff);

    IdentityReport r;
    r.claim = claim_name(c);
    r.branch = br;
    r.lhs = summarize(phi).mean;
    r.rhs = summarize(gx).mean;
    r.stderr = d.stderr();
    r.z = z_score(d);
    r.pass = r.z <= 3.0;
    r.seed = seed;
    r.n_paths = n;
    return r;
}

} // namespace qvjump
