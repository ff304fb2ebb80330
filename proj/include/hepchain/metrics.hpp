#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hepchain/chain.hpp"
#include "hepchain/verification.hpp"

namespace hepchain {

/// One row per block. Column order of metrics.csv:
///   height, strategy, escalation_depth, submissions, accepted, winner,
///   fabrication_accepted, mean_step_count, energy_cut, round_ticks,
///   tx_count, pool_deferred, bans
struct MetricsRecord {
    std::uint64_t height = 0;
    Strategy strategy = Strategy::Replication;
    std::uint32_t escalation_depth = 0;
    std::uint64_t submissions = 0;
    std::uint64_t accepted = 0;
    Address winner;
    bool fabrication_accepted = false;
    double mean_step_count = 0.0; ///< winning result, per config
    double energy_cut = 0.0;
    std::uint64_t round_ticks = 0;
    std::uint64_t tx_count = 0;
    std::uint64_t pool_deferred = 0;
    std::uint64_t bans = 0;
};

/// Per behavior class ("honest", "sybil_colluder", ...).
struct ClassStats {
    std::uint64_t miners = 0;
    std::uint64_t submissions = 0;   ///< arrived at the authority
    std::uint64_t intake_rejected = 0;
    std::uint64_t accepted = 0;      ///< in the final accepted set of a round
    std::uint64_t wins = 0;
    std::uint64_t decoy_checked = 0;
    std::uint64_t decoy_passed = 0;
    std::uint64_t banned = 0;
    std::map<std::string, std::uint64_t> intake_errors;
};

struct AuditStats {
    std::uint64_t balance_queries = 0;
    std::uint64_t balance_checked = 0;
    std::uint64_t balance_mismatches = 0;
    std::uint64_t data_requests = 0;
    std::uint64_t data_served = 0;
    std::uint64_t data_denied = 0;
    std::uint64_t data_digest_mismatches = 0;
};

struct NetworkStats {
    std::uint64_t messages = 0;
    std::uint64_t dropped = 0;
    std::uint64_t bytes = 0;
    std::map<std::string, std::uint64_t> bytes_by_kind;
};

struct RunSummary {
    std::string scenario;
    std::uint64_t seed = 0;
    std::uint64_t rounds = 0;
    std::uint64_t blocks = 0;
    std::uint64_t block_reward = 0;
    std::uint64_t total_supply = 0;
    std::uint64_t replay_supply = 0;
    bool replay_matches = false;
    HashDigest tip_hash;
    std::uint64_t stalled_rounds = 0;
    std::uint64_t escalated_rounds = 0;
    std::uint64_t fabrication_accepted_rounds = 0;
    std::uint64_t units_completed = 0; ///< rounds with accepted >= target_nresults
    std::map<std::string, std::uint64_t> final_strategy_counts;
    std::uint64_t transactions = 0;
    std::uint64_t transactions_rejected = 0;
    std::uint64_t max_pool_deferred = 0;
    std::map<std::string, ClassStats> classes;
    std::map<std::string, std::uint64_t> wins_by_miner; ///< address hex
    std::vector<std::string> banned;                    ///< address hex
    AuditStats audit;
    NetworkStats network;
    std::uint64_t live_nodes = 0;
    std::uint64_t converged_nodes = 0;
};

std::string metrics_csv(const std::vector<MetricsRecord>& rows);
nlohmann::json summary_to_json(const RunSummary& summary);

/// Writes chain.jsonl, metrics.csv and summary.json into `dir`, creating it.
/// Throws std::filesystem::filesystem_error or std::runtime_error on I/O failure.
void emit_metrics(const std::filesystem::path& dir, const ChainState& chain, const MinerRegistry& registry,
                  const std::vector<MetricsRecord>& rows, const RunSummary& summary);

} // namespace hepchain
