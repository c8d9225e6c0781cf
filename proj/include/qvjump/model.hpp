#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <variant>
#include <vector>

#include "qvjump/levy.hpp"

namespace qvjump {

struct ConstantVol {
    double sigma;
};

// Continuous-time Markov chain on volatility levels. rates[i] is the rate of
// leaving level i; the destination is uniform over the other levels.
struct RegimeSwitching {
    std::vector<double> levels;
    std::vector<double> rates;
    std::vector<double> initial; // probabilities over levels
};

using VolScenario = std::variant<ConstantVol, RegimeSwitching>;

struct ModelSpec {
    double T = 0.25;
    LevyMeasure nu = DiracSum{{{1.0, 0.0}}};
    VolScenario vol = ConstantVol{0.2};
    double x0 = 0.0;
    double qv0 = 0.0;
    double y0 = 0.0; // LETF log price at time 0
    // Declared bound b on the integrated variance; infinite when not declared.
    double variance_bound = std::numeric_limits<double>::infinity();
};

// Constant-volatility member of the model class where every martingale used
// by the replication theory is available in closed form.
struct ClosedFormScenario {
    double sigma_bar;
    LevyMeasure nu;
    double T;
};

inline double max_level(const VolScenario& v)
{
    return std::visit(overloaded{
                          [](const ConstantVol& c) { return c.sigma; },
                          [](const RegimeSwitching& r) { return *std::max_element(r.levels.begin(), r.levels.end()); },
                      },
                      v);
}

inline double min_level(const VolScenario& v)
{
    return std::visit(overloaded{
                          [](const ConstantVol& c) { return c.sigma; },
                          [](const RegimeSwitching& r) { return *std::min_element(r.levels.begin(), r.levels.end()); },
                      },
                      v);
}

// Smallest integrated variance any path can realize.
inline double variance_floor(const ModelSpec& m)
{
    const double s = min_level(m.vol);
    return s * s * m.T;
}

inline void validate(const VolScenario& v)
{
    std::visit(overloaded{
                   [](const ConstantVol& c) {
                       require(c.sigma > 0.0 && std::isfinite(c.sigma), "vol", "constant sigma must be positive");
                   },
                   [](const RegimeSwitching& r) {
                       require(!r.levels.empty(), "vol", "regime levels must be non-empty");
                       require(r.rates.size() == r.levels.size(), "vol", "one leaving rate per regime level");
                       require(r.initial.size() == r.levels.size(), "vol", "one initial probability per level");
                       for (double l : r.levels) require(l > 0.0 && std::isfinite(l), "vol", "levels must be positive");
                       for (double q : r.rates) require(q >= 0.0 && std::isfinite(q), "vol", "rates must be >= 0");
                       double s = 0.0;
                       for (double p : r.initial) {
                           require(p >= 0.0, "vol", "initial probabilities must be >= 0");
                           s += p;
                       }
                       require(std::abs(s - 1.0) < 1e-12, "vol", "initial probabilities must sum to 1");
                   },
               },
               v);
}

inline void validate(const ModelSpec& m)
{
    require(m.T > 0.0 && std::isfinite(m.T), "model", "horizon T must be positive");
    require(std::isfinite(m.x0), "model", "x0 must be finite");
    require(m.qv0 >= 0.0 && std::isfinite(m.qv0), "model", "qv0 must be >= 0");
    validate(m.nu);
    validate(m.vol);
    const double s = max_level(m.vol);
    require(s * s * m.T < m.variance_bound, "assumption",
            "integrated variance bound violated: max level^2 * T >= b");
}

inline void validate(const ClosedFormScenario& s)
{
    require(s.sigma_bar > 0.0 && std::isfinite(s.sigma_bar), "vol", "sigma_bar must be positive");
    require(s.T > 0.0, "model", "horizon T must be positive");
    validate(s.nu);
}

} // namespace qvjump
