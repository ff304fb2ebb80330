#include "hepchain/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hepchain/io.hpp"

namespace hepchain {

namespace {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace

std::string metrics_csv(const std::vector<MetricsRecord>& rows)
{
    std::ostringstream os;
    os << "height,strategy,escalation_depth,submissions,accepted,winner,fabrication_accepted,mean_step_count,"
          "energy_cut,round_ticks,tx_count,pool_deferred,bans\n";
    for (const auto& r : rows) {
        os << r.height << ',' << to_string(r.strategy) << ',' << r.escalation_depth << ',' << r.submissions << ','
           << r.accepted << ',' << r.winner.to_hex() << ',' << (r.fabrication_accepted ? 1 : 0) << ','
           << format_double(r.mean_step_count) << ',' << format_double(r.energy_cut) << ',' << r.round_ticks << ','
           << r.tx_count << ',' << r.pool_deferred << ',' << r.bans << '\n';
    }
    return os.str();
}

nlohmann::json summary_to_json(const RunSummary& s)
{
    using nlohmann::json;
    json classes = json::object();
    for (const auto& [name, c] : s.classes) {
        const double rate = c.decoy_checked ? static_cast<double>(c.decoy_passed) / c.decoy_checked : 0.0;
        classes[name] = {
            {"miners", c.miners},
            {"submissions", c.submissions},
            {"intake_rejected", c.intake_rejected},
            {"intake_errors", c.intake_errors},
            {"accepted", c.accepted},
            {"acceptance_rate", c.submissions ? static_cast<double>(c.accepted) / c.submissions : 0.0},
            {"wins", c.wins},
            {"decoy_checked", c.decoy_checked},
            {"decoy_passed", c.decoy_passed},
            {"decoy_pass_rate", rate},
            {"banned", c.banned},
        };
    }
    return {
        {"scenario", s.scenario},
        {"seed", s.seed},
        {"rounds", s.rounds},
        {"blocks", s.blocks},
        {"block_reward", s.block_reward},
        {"total_supply", s.total_supply},
        {"replay_supply", s.replay_supply},
        {"replay_matches", s.replay_matches},
        {"tip_hash", s.tip_hash.to_hex()},
        {"stalled_rounds", s.stalled_rounds},
        {"escalated_rounds", s.escalated_rounds},
        {"fabrication_accepted_rounds", s.fabrication_accepted_rounds},
        {"fabrication_accepted_rate",
         s.blocks ? static_cast<double>(s.fabrication_accepted_rounds) / static_cast<double>(s.blocks) : 0.0},
        {"units_completed", s.units_completed},
        {"final_strategy_counts", s.final_strategy_counts},
        {"transactions", {{"submitted", s.transactions},
                          {"rejected", s.transactions_rejected},
                          {"max_pool_deferred", s.max_pool_deferred}}},
        {"classes", classes},
        {"wins_by_miner", s.wins_by_miner},
        {"banned", s.banned},
        {"audit", {{"balance_queries", s.audit.balance_queries},
                   {"balance_checked", s.audit.balance_checked},
                   {"balance_mismatches", s.audit.balance_mismatches},
                   {"data_requests", s.audit.data_requests},
                   {"data_served", s.audit.data_served},
                   {"data_denied", s.audit.data_denied},
                   {"data_digest_mismatches", s.audit.data_digest_mismatches}}},
        {"network", {{"messages", s.network.messages},
                     {"dropped", s.network.dropped},
                     {"bytes", s.network.bytes},
                     {"bytes_by_kind", s.network.bytes_by_kind}}},
        {"convergence", {{"live_nodes", s.live_nodes}, {"converged_nodes", s.converged_nodes}}},
    };
}

void emit_metrics(const std::filesystem::path& dir, const ChainState& chain, const MinerRegistry& registry,
                  const std::vector<MetricsRecord>& rows, const RunSummary& summary)
{
    std::filesystem::create_directories(dir);
    write_file(dir / "chain.jsonl", chain_export_string(chain, registry));
    write_file(dir / "metrics.csv", metrics_csv(rows));
    write_file(dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
}

} // namespace hepchain
