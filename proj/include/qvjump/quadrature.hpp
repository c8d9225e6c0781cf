#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "qvjump/specfun.hpp"

namespace qvjump {

struct QuadResult {
    cplx value{0.0, 0.0};
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
    // Upper end of the integration range actually used by the semi-infinite
    // routine (infinite for finite ranges).
    double truncation_point = std::numeric_limits<double>::infinity();
};

struct QuadOptions {
    double rel_tol = 0.0;
    std::size_t max_evals = 400000;
    // f ~ (x-a)^(-alpha) near the left end (alpha < 1); 0 disables the map.
    double left_singularity = 0.0;
    double right_singularity = 0.0;
    bool throw_on_failure = true;
};

// Applies the 15-point Kronrod rule and its embedded 7-point Gauss rule on
// [a, b]; `node` is called with (x, weight_k, weight_g) for every abscissa.
template <class NodeFn>
inline void gk15_nodes(double a, double b, NodeFn&& node)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (int k = 0; k < 8; ++k) {
        const double wk = detail::kGkWeights[k] * h;
        const double wg = (k % 2 == 1) ? detail::kGaussWeights[k / 2] * h : 0.0;
        node(c + h * detail::kGkNodes[k], wk, wg);
        if (k < 7) node(c - h * detail::kGkNodes[k], wk, wg);
    }
}

template <class V>
struct AdaptiveOutcome {
    std::vector<V> panels;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

// Globally adaptive bisection. `eval(a, b)` returns a panel record with
// members `value` (supports += and -=), `error` (double) and `a`, `b`.
// `norm(value)` gives the scale used with rel_tol.
template <class Panel, class EvalFn, class NormFn>
AdaptiveOutcome<Panel> adaptive_bisect(EvalFn&& eval, double a, double b, double abs_tol,
                                       double rel_tol, std::size_t max_evals, NormFn&& norm,
                                       int initial_panels = 1)
{
    AdaptiveOutcome<Panel> out;
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;
    const double step = (b - a) / initial_panels;
    for (int i = 0; i < initial_panels; ++i) {
        const double lo = a + i * step;
        const double hi = (i + 1 == initial_panels) ? b : lo + step;
        out.panels.push_back(eval(lo, hi));
    }
    auto total = out.panels.front().value;
    for (std::size_t i = 1; i < out.panels.size(); ++i) total += out.panels[i].value;
    double err = 0.0;
    for (std::size_t i = 0; i < out.panels.size(); ++i) {
        err += out.panels[i].error;
        heap.push({out.panels[i].error, i});
    }
    out.evaluations = 15 * out.panels.size();

    const double min_width = 1e-13 * std::max(std::abs(a), std::abs(b)) + 1e-300;
    while (err > std::max(abs_tol, rel_tol * norm(total))) {
        if (heap.empty() || out.evaluations + 30 > max_evals) {
            out.converged = false;
            break;
        }
        const std::size_t idx = heap.top().second;
        heap.pop();
        const Panel old = out.panels[idx];
        if (old.b - old.a < min_width) continue; // cannot split further
        const double mid = 0.5 * (old.a + old.b);
        Panel left = eval(old.a, mid);
        Panel right = eval(mid, old.b);
        out.evaluations += 30;
        total -= old.value;
        total += left.value;
        total += right.value;
        err += left.error + right.error - old.error;
        out.panels[idx] = std::move(left);
        heap.push({out.panels[idx].error, idx});
        out.panels.push_back(std::move(right));
        heap.push({out.panels.back().error, out.panels.size() - 1});
    }
    // Recompute the error sum to avoid drift from repeated updates.
    out.error = 0.0;
    for (const auto& p : out.panels) out.error += p.error;
    return out;
}

namespace detail {

struct ScalarPanel {
    double a, b;
    cplx value;
    double error;
};

template <class F>
AdaptiveOutcome<ScalarPanel> adaptive_scalar(F& f, double a, double b, double tol,
                                             const QuadOptions& opt)
{
    auto eval = [&](double lo, double hi) {
        cplx k = 0.0, g = 0.0;
        gk15_nodes(lo, hi, [&](double x, double wk, double wg) {
            const cplx v = f(x);
            k += wk * v;
            g += wg * v;
        });
        return ScalarPanel{lo, hi, k, std::abs(k - g)};
    };
    return adaptive_bisect<ScalarPanel>(eval, a, b, tol, opt.rel_tol, opt.max_evals,
                                        [](cplx v) { return std::abs(v); });
}

} // namespace detail

// Adaptive Gauss-Kronrod integration of a complex integrand on [a, b].
// Declared endpoint singularities are removed by x = a + (b-a) t^(1/(1-alpha)).
template <class F>
QuadResult integrate_finite(F&& f, double a, double b, double tol, const QuadOptions& opt = {})
{
    if (!(tol > 0.0)) throw Error("domain", "integrate_finite: tol must be positive");
    if (a == b) return QuadResult{0.0, 0.0, 1};
    if (a > b) {
        QuadResult r = integrate_finite(f, b, a, tol, opt);
        r.value = -r.value;
        return r;
    }
    const double al = opt.left_singularity, ar = opt.right_singularity;
    if (al >= 1.0 || ar >= 1.0) throw Error("domain", "integrate_finite: non-integrable singularity");

    if (al != 0.0 && ar != 0.0) {
        const double mid = 0.5 * (a + b);
        QuadOptions lo = opt, hi = opt;
        lo.right_singularity = 0.0;
        hi.left_singularity = 0.0;
        QuadResult r1 = integrate_finite(f, a, mid, 0.5 * tol, lo);
        QuadResult r2 = integrate_finite(f, mid, b, 0.5 * tol, hi);
        return QuadResult{r1.value + r2.value, r1.abs_error_estimate + r2.abs_error_estimate,
                          r1.evaluations + r2.evaluations, r1.converged && r2.converged};
    }

    AdaptiveOutcome<detail::ScalarPanel> out;
    if (al != 0.0) {
        const double p = 1.0 / (1.0 - al);
        auto g = [&](double t) -> cplx {
            const double tp = std::pow(t, p);
            return f(a + (b - a) * tp) * ((b - a) * p * tp / t);
        };
        out = detail::adaptive_scalar(g, 0.0, 1.0, tol, opt);
    } else if (ar != 0.0) {
        const double p = 1.0 / (1.0 - ar);
        auto g = [&](double t) -> cplx {
            const double tp = std::pow(t, p);
            return f(b - (b - a) * tp) * ((b - a) * p * tp / t);
        };
        out = detail::adaptive_scalar(g, 0.0, 1.0, tol, opt);
    } else {
        out = detail::adaptive_scalar(f, a, b, tol, opt);
    }

    QuadResult r;
    for (const auto& p : out.panels) r.value += p.value;
    r.abs_error_estimate = out.error;
    r.evaluations = out.evaluations;
    r.converged = out.converged;
    if (!r.converged && opt.throw_on_failure)
        throw Error("quadrature", "integrate_finite: no convergence within " +
                                      std::to_string(opt.max_evals) + " evaluations");
    return r;
}

enum class Domain { HalfLine, WholeLine };

namespace detail {

template <class F>
QuadResult half_line(F& f, double tol, double decay_hint, const QuadOptions& opt)
{
    QuadOptions first = opt;
    first.right_singularity = 0.0;
    QuadResult r = integrate_finite(f, 0.0, decay_hint, 0.25 * tol, first);
    QuadOptions rest = opt;
    rest.left_singularity = rest.right_singularity = 0.0;
    double lo = decay_hint;
    int small = 0;
    for (int k = 1; k <= 64; ++k) {
        const double hi = 2.0 * lo;
        const QuadResult piece = integrate_finite(f, lo, hi, 0.25 * tol / (k * k), rest);
        r.value += piece.value;
        r.abs_error_estimate += piece.abs_error_estimate;
        r.evaluations += piece.evaluations;
        lo = hi;
        small = (std::abs(piece.value) <= tol / 8.0) ? small + 1 : 0;
        if (small >= 2) {
            r.truncation_point = lo;
            return r;
        }
    }
    r.converged = false;
    r.truncation_point = lo;
    if (opt.throw_on_failure)
        throw Error("quadrature", "integrate_semi_infinite: tail did not settle below tolerance");
    return r;
}

} // namespace detail

// Integrates over (0, inf) or (-inf, inf) by successive doubling of the
// truncation point, starting at decay_hint, until two consecutive tail pieces
// fall below tol / 8.
template <class F>
QuadResult integrate_semi_infinite(F&& f, double tol, double decay_hint,
                                   Domain domain = Domain::HalfLine, const QuadOptions& opt = {})
{
    if (!(decay_hint > 0.0)) throw Error("domain", "integrate_semi_infinite: decay_hint must be positive");
    if (domain == Domain::HalfLine) return detail::half_line(f, tol, decay_hint, opt);
    auto neg = [&](double z) { return f(-z); };
    QuadResult r1 = detail::half_line(f, 0.5 * tol, decay_hint, opt);
    QuadResult r2 = detail::half_line(neg, 0.5 * tol, decay_hint, opt);
    return QuadResult{r1.value + r2.value, r1.abs_error_estimate + r2.abs_error_estimate,
                      r1.evaluations + r2.evaluations, r1.converged && r2.converged,
                      std::max(r1.truncation_point, r2.truncation_point)};
}

} // namespace qvjump
