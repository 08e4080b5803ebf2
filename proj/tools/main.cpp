#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bps/errors.hpp"
#include "bps/experiment.hpp"
#include "bps/version.hpp"

namespace {

std::string join(const std::vector<std::string>& parts, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"staking-game equilibria, centralization dynamics, and builder-auction "
                 "experiments"};
    app.set_version_flag("--version", bps::kVersion);
    app.require_subcommand(0, 1);

    // All values travel as strings: the experiment layer owns parsing and validation, and
    // config-file entries override flags, so the CLI is a thin key-value front end.
    std::map<std::string, std::string> flag_values;
    std::vector<std::string> proposers;
    bool waive_mhr = false;
    std::string config_path;

    auto bind = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                    const std::string& help) {
        auto [it, inserted] = flag_values.try_emplace(key, "");
        cmd->add_option(flag, it->second, help);
    };
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "key=value config file; entries override flags");
        bind(cmd, "--seed", "master_seed", "master seed for run derivation");
        bind(cmd, "--jobs", "jobs", "parallel workers (output is identical for any value)");
        bind(cmd, "--output", "output_path", "output CSV path");
        bind(cmd, "--format", "format", "output format (csv)");
    };
    add_common(&app);

    CLI::App* eq = app.add_subcommand("equilibrium", "one-shot staking game equilibrium");
    bind(eq, "--mu", "mu", "multipliers, nonincreasing, smallest 1 (e.g. 2,1)");
    bind(eq, "--r", "r", "base reward");
    bind(eq, "--c", "c", "staking cost");

    CLI::App* fig = app.add_subcommand(
        "figure-econ", "max-share bound over the (gamma, k) competitiveness grid");

    CLI::App* sim = app.add_subcommand("simulate", "seeded staking-process runs");
    bind(sim, "--mu", "mu", "multipliers");
    bind(sim, "--r", "r", "base reward");
    bind(sim, "--stakes", "stakes", "initial stakes (e.g. 2000,2000)");
    bind(sim, "--epsilon", "epsilon", "centralization threshold parameter");
    bind(sim, "--runs", "runs", "number of seeded runs");
    bind(sim, "--max-blocks", "max_blocks", "highest block index checked");
    bind(sim, "--target", "target", "participant whose share is tracked (default 1)");

    CLI::App* bounds = app.add_subcommand("bounds", "closed-form centralization bounds");
    bind(bounds, "--mu", "mu", "multipliers");
    bind(bounds, "--r", "r", "base reward");
    bind(bounds, "--stakes", "stakes", "initial stakes");
    bind(bounds, "--epsilon", "epsilon", "centralization threshold parameter");
    bind(bounds, "--target", "target", "tracked participant (default 1)");

    CLI::App* sweep =
        app.add_subcommand("bound-sweep", "upper bound versus the multiplier gap");
    bind(sweep, "--deltas", "deltas", "multiplier gaps (default 0.1,0.2,0.3,0.4,0.5)");
    bind(sweep, "--rho", "rho", "competitor-to-target initial stake ratio (default 9)");
    bind(sweep, "--epsilon", "epsilon", "threshold parameter (default 2/3)");
    bind(sweep, "--mu2", "mu2", "competitor multiplier (default 1)");
    bind(sweep, "--r", "r", "base reward");
    bind(sweep, "--pi1", "pi1", "target initial stake (default 1)");

    auto add_pbs_common = [&](CLI::App* cmd) {
        bind(cmd, "--dy", "dy", "builder value distribution, e.g. exp(rate=1)");
        cmd->add_option("--proposer", proposers,
                        "label=distribution, repeatable (e.g. solo=point(value=0))");
        bind(cmd, "--trials", "trials", "Monte Carlo trials");
        cmd->add_flag("--waive-mhr", waive_mhr,
                      "skip the hazard-rate and dominance regime checks");
    };

    CLI::App* pbs = app.add_subcommand("pbs", "builder-auction proposer rewards");
    bind(pbs, "--builders", "builders", "builder count k >= 2");
    add_pbs_common(pbs);

    CLI::App* pbs_sweep =
        app.add_subcommand("pbs-sweep", "reward heterogeneity ratio versus builder count");
    bind(pbs_sweep, "--k-list", "k_list", "builder counts, e.g. 2,5,10,50,100");
    add_pbs_common(pbs_sweep);

    CLI::App* compose = app.add_subcommand(
        "compose", "feed auction-derived effective multipliers into the equilibrium");
    bind(compose, "--builders", "builders", "builder count k >= 2");
    add_pbs_common(compose);
    bind(compose, "--r", "r", "base reward for the staking game");
    bind(compose, "--c", "c", "staking cost for the staking game");

    for (CLI::App* sub : {eq, fig, sim, bounds, sweep, pbs, pbs_sweep, compose}) {
        add_common(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto parsed = app.get_subcommands();
        if (parsed.empty() && config_path.empty()) {
            std::cerr << app.help();
            return 2;
        }

        bps::ExperimentConfig cfg;
        if (!parsed.empty()) {
            cfg.set("kind", parsed.front()->get_name());
        }
        for (const auto& [key, value] : flag_values) {
            if (!value.empty()) {
                cfg.set(key, value);
            }
        }
        if (!proposers.empty()) {
            cfg.set("proposers", join(proposers, '|'));
        }
        if (waive_mhr) {
            cfg.set("waive_mhr", "1");
        }
        if (!config_path.empty()) {
            const bps::ExperimentConfig file_cfg =
                bps::ExperimentConfig::from_file(config_path);
            for (const auto& [key, value] : file_cfg.entries()) {
                cfg.set(key, value);
            }
        }

        const bps::ResultTable table = bps::run_experiment(cfg);

        std::string out_path = cfg.output_path();
        if (out_path.empty()) {
            out_path = cfg.kind() + ".csv";
        }
        if (out_path.front() != '/') {
            if (const char* dir = std::getenv("BPS_OUTPUT_DIR"); dir != nullptr && *dir) {
                out_path = std::string(dir) + "/" + out_path;
            }
        }
        bps::write_atomic(out_path, table.to_csv());
        std::cout << "wrote " << out_path << " (" << table.rows().size() << " rows)\n";
        return 0;
    } catch (const bps::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const bps::NumericError& e) {
        std::cerr << "numeric error";
        if (e.run_index >= 0) {
            std::cerr << " (run " << e.run_index << ")";
        }
        std::cerr << ": " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}
