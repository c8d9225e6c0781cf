#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvjump/pricing.hpp"
#include "qvjump/replication.hpp"

namespace qvjump {

using json = nlohmann::json;

// Schema: T in years, jump locations in log space. Complex numbers are
// either a plain number or [re, im].
struct HedgeConfig {
    std::vector<int> n_steps{64, 256, 1024};
    std::size_t n_paths = 1000;
    std::vector<cplx> collar; // empty: default collar for the measure
};

struct TableConfig {
    double s_min = 0.5, s_max = 2.0;
    int n_points = 101;
};

struct RunConfig {
    ModelSpec model;
    std::optional<Claim> claim;
    Branch branch = Branch::Plus;
    std::optional<std::uint64_t> seed;
    std::size_t n_paths = 100000;
    SpectralOptions spectral;
    double letf_contour = -1.5;
    TableConfig table;
    HedgeConfig hedge;
    cplx psi_omega = 0.0, psi_eta = 0.0;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) { throw Error("config", what); }

inline const json& field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) config_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline double num(const json& j, const char* key)
{
    const json& v = field(j, key);
    if (!v.is_number()) config_error(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

inline double num_or(const json& j, const char* key, double dflt)
{
    return j.is_object() && j.contains(key) ? num(j, key) : dflt;
}

inline cplx to_cplx(const json& v, const char* key)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    config_error(std::string("field '") + key + "' must be a number or [re, im]");
}

inline cplx cplx_or(const json& j, const char* key, cplx dflt)
{
    return j.is_object() && j.contains(key) ? to_cplx(j.at(key), key) : dflt;
}

inline std::string str(const json& j, const char* key)
{
    const json& v = field(j, key);
    if (!v.is_string()) config_error(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

inline std::vector<double> num_list(const json& j, const char* key)
{
    const json& v = field(j, key);
    if (!v.is_array()) config_error(std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) config_error(std::string("field '") + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline LevyMeasure parse_measure(const json& j)
{
    const std::string type = str(j, "type");
    if (type == "dirac") {
        DiracSum d;
        const json& atoms = field(j, "atoms");
        if (!atoms.is_array()) config_error("'atoms' must be an array of [weight, location]");
        for (const auto& a : atoms) {
            if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
                config_error("'atoms' must be an array of [weight, location]");
            d.atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
        }
        return d;
    }
    if (type == "uniform") return Uniform{num(j, "lambda"), num(j, "m1"), num(j, "m2")};
    if (type == "trunc_exp") return TruncExp{num(j, "lambda"), num(j, "alpha"), num(j, "m")};
    config_error("unknown measure type '" + type + "'");
}

inline VolScenario parse_vol(const json& j)
{
    const std::string type = str(j, "type");
    if (type == "constant") return ConstantVol{num(j, "sigma")};
    if (type == "regime") return RegimeSwitching{num_list(j, "levels"), num_list(j, "rates"), num_list(j, "initial")};
    config_error("unknown vol type '" + type + "'");
}

inline Claim parse_claim(const json& j)
{
    const std::string type = str(j, "type");
    if (type == "power_exp") {
        PowerExponential c;
        c.n = int(num_or(j, "n", 0));
        c.m = int(num_or(j, "m", 0));
        c.omega = cplx_or(j, "omega", 0.0);
        c.eta = cplx_or(j, "eta", 0.0);
        return c;
    }
    if (type == "variance_swap") return VarianceSwap{};
    if (type == "frac_power") return FractionalPower{num(j, "r")};
    if (type == "ratio_1") return RatioI{cplx_or(j, "p", 0.0), num(j, "r"), num_or(j, "eps", 1e-3)};
    if (type == "ratio_2") return RatioII{cplx_or(j, "p", 0.0), num(j, "r"), num_or(j, "eps", 1e-3)};
    if (type == "letf_call") return LetfCall{num(j, "beta"), num_or(j, "k", 0.0)};
    config_error("unknown claim type '" + type + "'");
}

} // namespace detail

inline Branch parse_branch(const std::string& s)
{
    if (s == "plus") return Branch::Plus;
    if (s == "minus") return Branch::Minus;
    throw Error("config", "branch must be 'plus' or 'minus', got '" + s + "'");
}

// Parses and validates against every module invariant; throws before any
// computation starts.
inline RunConfig parse_config(const json& j)
{
    using namespace detail;
    if (!j.is_object()) config_error("config must be a JSON object");
    RunConfig c;
    const json& m = field(j, "model");
    c.model.T = num(m, "T");
    c.model.x0 = num_or(m, "x0", 0.0);
    c.model.qv0 = num_or(m, "qv0", 0.0);
    c.model.y0 = num_or(m, "y0", 0.0);
    if (m.contains("variance_bound")) c.model.variance_bound = num(m, "variance_bound");
    c.model.nu = parse_measure(field(m, "nu"));
    c.model.vol = parse_vol(field(m, "vol"));
    validate(c.model);

    if (j.contains("claim")) {
        c.claim = parse_claim(j.at("claim"));
        validate(*c.claim);
        if (const auto* l = std::get_if<LetfCall>(&*c.claim)) check_assumption2(c.model.nu, l->beta);
    }
    if (j.contains("branch")) c.branch = parse_branch(str(j, "branch"));
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            config_error("seed must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("n_paths")) {
        const double n = num(j, "n_paths");
        if (n < 100 || n != std::floor(n)) config_error("n_paths must be an integer >= 100");
        c.n_paths = std::size_t(n);
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        c.spectral.tol = num_or(t, "spectral_tol", c.spectral.tol);
        c.spectral.cutoff = num_or(t, "spectral_cutoff", c.spectral.cutoff);
        c.letf_contour = num_or(t, "letf_contour", c.letf_contour);
        if (!(c.spectral.tol > 0.0)) config_error("spectral_tol must be positive");
    }
    if (j.contains("payoff_table")) {
        const json& t = j.at("payoff_table");
        c.table.s_min = num_or(t, "s_min", c.table.s_min);
        c.table.s_max = num_or(t, "s_max", c.table.s_max);
        c.table.n_points = int(num_or(t, "n_points", c.table.n_points));
        if (!(c.table.s_min > 0.0) || (c.table.n_points > 1 && !(c.table.s_min < c.table.s_max)))
            config_error("payoff_table needs 0 < s_min < s_max");
        if (c.table.n_points < 1) config_error("payoff_table n_points must be >= 1");
    }
    if (j.contains("hedge")) {
        const json& h = j.at("hedge");
        if (h.contains("n_steps")) {
            c.hedge.n_steps.clear();
            for (double s : num_list(h, "n_steps")) {
                if (s < 1 || s != std::floor(s)) config_error("hedge n_steps must be positive integers");
                c.hedge.n_steps.push_back(int(s));
            }
        }
        if (h.contains("n_paths")) {
            const double n = num(h, "n_paths");
            if (n < 1 || n != std::floor(n)) config_error("hedge n_paths must be a positive integer");
            c.hedge.n_paths = std::size_t(n);
        }
        if (h.contains("collar")) {
            const json& q = h.at("collar");
            if (!q.is_array()) config_error("hedge collar must be an array");
            for (const auto& e : q) c.hedge.collar.push_back(to_cplx(e, "collar"));
            validate(CollarSpec{c.hedge.collar});
        }
    }
    if (j.contains("psi")) {
        c.psi_omega = cplx_or(j.at("psi"), "omega", 0.0);
        c.psi_eta = cplx_or(j.at("psi"), "eta", 0.0);
    }
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

} // namespace qvjump
