#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qvjump/commands.hpp"

namespace {

int report(const std::string& category, const std::string& message, int code)
{
    qvjump::json j;
    j["error"] = {{"category", category}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace qvjump;
    CLI::App app{"Pricing and replication of claims on log price and quadratic variation"};
    app.require_subcommand(1);

    std::string config_path, out_path, branch;
    std::optional<std::uint64_t> seed;
    const std::map<std::string, std::function<std::string(const RunConfig&)>> commands{
        {"price", cmd_price},         {"payoff-table", cmd_payoff_table}, {"mc-check", cmd_mc_check},
        {"hedge-sim", cmd_hedge_sim}, {"psi-eval", cmd_psi_eval},
    };
    const std::map<std::string, std::string> help{
        {"price", "Monte Carlo price of E g(X_T) as JSON"},
        {"payoff-table", "payoff function g on a spot grid as CSV"},
        {"mc-check", "pricing identity check E phi = E g as JSON"},
        {"hedge-sim", "hedge convergence study as CSV"},
        {"psi-eval", "jump exponent closed form against quadrature as JSON"},
    };
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config_path, "config file (JSON)")->required();
        sub->add_option("--seed", seed, "random seed, overrides the config");
        sub->add_option("--out", out_path, "output file instead of stdout");
        sub->add_option("--branch", branch, "plus or minus, overrides the config");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("config", e.what(), 2);
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed) cfg.seed = seed;
        if (!branch.empty()) cfg.branch = parse_branch(branch);
    } catch (const Error& e) {
        return report(e.category(), e.what(), 2);
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        const std::string text = commands.at(name)(cfg);
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!(out << text)) return report("io", "cannot write '" + out_path + "'", 1);
        }
    } catch (const Error& e) {
        return report(e.category(), e.what(), e.category() == "config" ? 2 : 1);
    } catch (const std::exception& e) {
        return report("internal", e.what(), 1);
    }
    return 0;
}
