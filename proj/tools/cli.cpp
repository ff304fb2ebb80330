#include "cli.hpp"

#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "hepchain/io.hpp"
#include "hepchain/runner.hpp"

namespace hepchain {

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& out_dir,
            unsigned threads, std::ostream& out, std::ostream& err)
{
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(scenario);
        if (seed) cfg.seed = *seed;
    } catch (const ConfigError& e) {
        err << "invalid scenario: " << e.what() << "\n";
        return kInvalid;
    }
    const auto run = run_scenario(cfg, {threads});
    try {
        emit_metrics(out_dir, run.chain, run.registry, run.metrics, run.summary);
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kInvalid;
    }
    out << cfg.name << ": " << run.summary.blocks << " blocks, supply " << run.summary.total_supply << ", tip "
        << run.summary.tip_hash.to_hex() << "\n";
    return kOk;
}

std::optional<ChainExport> load_chain(const std::string& path, std::ostream& err)
{
    std::ifstream in(path);
    if (!in) {
        err << "cannot open " << path << "\n";
        return std::nullopt;
    }
    try {
        return read_chain_export(in);
    } catch (const FormatError& e) {
        err << "malformed chain export: " << e.what() << "\n";
        return std::nullopt;
    }
}

int cmd_verify(const std::string& path, std::ostream& out, std::ostream& err)
{
    auto chain = load_chain(path, err);
    if (!chain) return kInvalid;
    try {
        const auto state = replay_chain(chain->blocks, chain->rules, chain->registry);
        out << "OK height " << state.height() << " supply " << state.total_supply << " tip "
            << state.tip_hash.to_hex() << "\n";
        return kOk;
    } catch (const ChainError& e) {
        out << "FAIL " << e.report().describe() << "\n";
        return kInvalid;
    }
}

int cmd_balances(const std::string& path, const std::string& address_hex, std::optional<std::uint64_t> height,
                 std::ostream& out, std::ostream& err)
{
    const auto address = Address::from_hex(address_hex);
    if (!address) {
        err << "--address must be 64 hex characters\n";
        return kUsage;
    }
    auto chain = load_chain(path, err);
    if (!chain) return kInvalid;
    auto blocks = chain->blocks;
    if (height) {
        if (*height >= blocks.size()) {
            err << "height " << *height << " is beyond the chain tip\n";
            return kInvalid;
        }
        blocks.resize(*height + 1);
    }
    try {
        const auto state = replay_chain(blocks, chain->rules, chain->registry);
        out << state.balance_of(*address) << "\n";
        return kOk;
    } catch (const ChainError& e) {
        out << "FAIL " << e.report().describe() << "\n";
        return kInvalid;
    }
}

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err)
{
    try {
        const auto cfg = load_scenario(path);
        out << "OK " << cfg.name << ": " << cfg.rounds << " rounds, " << cfg.miner_count() << " miners, strategy "
            << to_string(cfg.strategy) << "\n";
        return kOk;
    } catch (const ConfigError& e) {
        err << "invalid scenario: " << e.what() << "\n";
        return kInvalid;
    }
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"HEPchain proof-of-useful-work simulator", "hepchain"};
    app.require_subcommand(1);

    std::string scenario, out_dir, chain_path, address;
    std::optional<std::uint64_t> seed, height;
    unsigned threads = 1;

    auto* run = app.add_subcommand("run", "Run a scenario and write chain export and metrics");
    run->add_option("--scenario", scenario, "Scenario file")->required();
    run->add_option("--seed", seed, "Scenario seed (overrides the file)");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--threads", threads, "Worker threads for the simulation pipeline")->check(CLI::Range(1u, 256u));

    auto* verify = app.add_subcommand("verify-chain", "Replay and validate a chain export");
    verify->add_option("--chain", chain_path, "Chain export file")->required();

    auto* balances = app.add_subcommand("replay-balances", "Balance of an address after replaying a chain export");
    balances->add_option("--chain", chain_path, "Chain export file")->required();
    balances->add_option("--address", address, "Address as 64 hex characters")->required();
    balances->add_option("--height", height, "Replay only up to this height");

    auto* check = app.add_subcommand("scenario-check", "Validate a scenario file");
    check->add_option("--scenario", scenario, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kUsage;
    }

    if (run->parsed()) return cmd_run(scenario, seed, out_dir, threads, out, err);
    if (verify->parsed()) return cmd_verify(chain_path, out, err);
    if (balances->parsed()) return cmd_balances(chain_path, address, height, out, err);
    return cmd_check(scenario, out, err);
}

} // namespace hepchain
