#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "qvjump/quadrature.hpp"

namespace qvjump {

// g(x) = sum_k (c0_k + c1_k x + ... ) exp(i u_k x). Every payoff function in
// the pricing module is held in this form; integral representations become
// one term per quadrature node.
struct ExpPolySum {
    static constexpr int kMaxDegree = 4;
    struct Term {
        cplx u;
        std::array<cplx, kMaxDegree + 1> c{};
    };
    std::vector<Term> terms;

    void add(cplx u, cplx c0, cplx c1 = 0.0)
    {
        Term t{u, {}};
        t.c[0] = c0;
        t.c[1] = c1;
        terms.push_back(t);
    }

    cplx operator()(double x) const
    {
        cplx s = 0.0;
        for (const auto& t : terms) {
            cplx p = t.c[kMaxDegree];
            for (int l = kMaxDegree - 1; l >= 0; --l) p = p * x + t.c[l];
            s += p * std::exp(I * t.u * x);
        }
        return s;
    }

    // g(x) and g'(x) together.
    std::pair<cplx, cplx> value_and_slope(double x) const
    {
        cplx v = 0.0, d = 0.0;
        for (const auto& t : terms) {
            cplx p = t.c[kMaxDegree], dp = 0.0;
            for (int l = kMaxDegree - 1; l >= 0; --l) {
                dp = dp * x + p;
                p = p * x + t.c[l];
            }
            const cplx e = std::exp(I * t.u * x);
            v += p * e;
            d += (dp + I * t.u * p) * e;
        }
        return {v, d};
    }

    std::size_t size() const { return terms.size(); }
};

// Cubic Hermite table of an ExpPolySum on a uniform grid, for evaluating the
// same g at many points; falls back to the sum outside [lo, hi].
class HermiteTable {
public:
    HermiteTable(const ExpPolySum& g, double lo, double hi, double step) : g_(&g), lo_(lo)
    {
        n_ = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1);
        h_ = n_ > 1 && hi > lo ? (hi - lo) / (n_ - 1) : 1.0;
        hi_ = lo + h_ * (n_ - 1);
        v_.resize(n_);
        d_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) std::tie(v_[i], d_[i]) = g.value_and_slope(lo + h_ * i);
    }

    cplx operator()(double x) const
    {
        if (!(x >= lo_ && x <= hi_)) return (*g_)(x);
        const double s = (x - lo_) / h_;
        const std::size_t i = std::min(static_cast<std::size_t>(s), n_ - 2);
        const double t = s - i, t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * v_[i] + (t3 - 2 * t2 + t) * h_ * d_[i] + (-2 * t3 + 3 * t2) * v_[i + 1] +
               (t3 - t2) * h_ * d_[i + 1];
    }

private:
    const ExpPolySum* g_;
    double lo_, hi_, h_;
    std::size_t n_;
    std::vector<cplx> v_, d_;
};

// Contribution of one integration node: fixed * exp(i u0 x) + (c0 + c1 x) exp(i u x),
// already multiplied by any Jacobian of the caller's change of variable.
struct NodeAtom {
    cplx fixed = 0.0;
    cplx u = 0.0;
    cplx c0 = 0.0;
    cplx c1 = 0.0;
};

// Accumulates an integral representation g(x) = int atom(t; x) dt into an
// ExpPolySum. The node set is chosen by adaptive Gauss-Kronrod on the vector
// of values at a few probe abscissae, so one frozen rule serves every x in
// the probe range.
class SpectralBuilder {
public:
    static constexpr int kProbes = 9;

    SpectralBuilder(cplx u0, double x_lo, double x_hi, double tol) : u0_(u0), tol_(tol)
    {
        for (int i = 0; i < kProbes; ++i) {
            x_[i] = x_lo + (x_hi - x_lo) * i / (kProbes - 1);
            e0_[i] = std::exp(I * u0 * x_[i]);
        }
    }

    // Integrates atom(t) over [lo, hi] and appends the resulting nodes.
    template <class AtomFn>
    void add_segment(AtomFn&& atom, double lo, double hi, double tol_share = 1.0)
    {
        if (!(hi > lo)) return;
        auto eval = [&](double a, double b) {
            Panel p{a, b, {}, 0.0, {}};
            Probe g{};
            int idx = 0;
            gk15_nodes(a, b, [&](double t, double wk, double wg) {
                const NodeAtom n = atom(t);
                p.nodes[idx++] = {n, wk};
                for (int i = 0; i < kProbes; ++i) {
                    const cplx v = n.fixed * e0_[i] + (n.c0 + n.c1 * x_[i]) * std::exp(I * n.u * x_[i]);
                    p.value.v[i] += wk * v;
                    g.v[i] += wg * v;
                }
            });
            for (int i = 0; i < kProbes; ++i) p.error = std::max(p.error, std::abs(p.value.v[i] - g.v[i]));
            return p;
        };
        auto norm = [](const Probe& v) {
            double m = 0.0;
            for (const auto& c : v.v) m = std::max(m, std::abs(c));
            return m;
        };
        auto out = adaptive_bisect<Panel>(eval, lo, hi, tol_ * tol_share, 0.0, max_evals_, norm, 4);
        converged_ = converged_ && out.converged;
        error_ += out.error;
        evaluations_ += out.evaluations;
        for (const auto& p : out.panels)
            for (const auto& [n, w] : p.nodes) {
                fixed_ += w * n.fixed;
                if (n.c0 != 0.0 || n.c1 != 0.0) sum_.add(n.u, w * n.c0, w * n.c1);
            }
    }

    void add_fixed(cplx c) { fixed_ += c; }

    ExpPolySum finish()
    {
        ExpPolySum out = std::move(sum_);
        if (fixed_ != 0.0) out.add(u0_, fixed_);
        return out;
    }

    bool converged() const { return converged_; }
    double error() const { return error_; }
    std::size_t evaluations() const { return evaluations_; }
    void set_max_evals(std::size_t n) { max_evals_ = n; }

private:
    struct Probe {
        std::array<cplx, kProbes> v{};
        Probe& operator+=(const Probe& o)
        {
            for (int i = 0; i < kProbes; ++i) v[i] += o.v[i];
            return *this;
        }
        Probe& operator-=(const Probe& o)
        {
            for (int i = 0; i < kProbes; ++i) v[i] -= o.v[i];
            return *this;
        }
    };
    struct Panel {
        double a, b;
        Probe value;
        double error;
        std::array<std::pair<NodeAtom, double>, 15> nodes;
    };

    cplx u0_;
    double tol_;
    std::array<double, kProbes> x_{};
    std::array<cplx, kProbes> e0_{};
    cplx fixed_ = 0.0;
    ExpPolySum sum_;
    bool converged_ = true;
    double error_ = 0.0;
    std::size_t evaluations_ = 0;
    std::size_t max_evals_ = 2000000;
};

} // namespace qvjump
