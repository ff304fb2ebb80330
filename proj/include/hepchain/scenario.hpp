#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hepchain/authority.hpp"
#include "hepchain/miner.hpp"
#include "hepchain/verification.hpp"

namespace hepchain {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct MinerGroupSpec {
    BehaviorKind behavior = BehaviorKind::Honest;
    std::uint32_t count = 1;
    double speed = 1.0;
    bool offline = false;
    /// Nonzero puts every miner of this entry in one colluding group.
    std::uint32_t group = 0;
    std::uint32_t k_correct = 0;
};

/// Config i gets smear_sigma + i * smear_step and split_scale + i * split_step.
struct WorkSpec {
    std::uint32_t configs = 4;
    std::uint32_t n_events = 20;
    double beam_energy = 10.0;
    double energy_cut = 1.0;
    std::uint32_t n_layers = 6;
    double smear_sigma = 0.02;
    double smear_step = 0.005;
    double split_scale = 8.0;
    double split_step = 0.0;
};

struct DifficultySpec {
    double target_cost = 0.0; ///< 0 disables the controller
    std::uint32_t window = 1;
};

/// Synthetic transfers submitted to the authority at every round start.
struct TxWorkload {
    std::optional<std::uint32_t> cap;
    std::uint32_t per_round = 0;
    std::uint64_t amount = 1;
};

struct PartitionSpec {
    std::vector<std::uint32_t> miners; ///< roster indices, 0-based
    std::uint64_t start = 0;
    std::uint64_t end = 0;
};

struct LatencySpec {
    std::uint64_t base = 1;
    std::uint64_t jitter = 0;
    double drop_rate = 0.0;
    std::vector<PartitionSpec> partitions;
};

struct AuditSpec {
    bool balance_queries = true;
    bool data_requests = true;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    std::uint64_t rounds = 20;
    std::uint64_t round_interval = 1000;
    std::uint64_t block_reward = 1;
    Strategy strategy = Strategy::Decoy;
    ReplicationConfig replication;
    double chi2_threshold = kDefaultChi2Threshold;
    std::uint32_t histogram_bins = kDefaultHistogramBins;
    double reference_smear_scale = 1.0;
    std::uint32_t ban_strikes = 2;
    bool serve_data = true;
    WorkSpec work;
    DifficultySpec difficulty;
    TxWorkload transactions;
    LatencySpec latency;
    AuditSpec audit;
    std::vector<MinerGroupSpec> miners;

    std::uint32_t miner_count() const;
    std::vector<ConfigFlag> config_flags() const;
};

/// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& cfg);

/// YAML mapping; every key is optional and unknown keys are errors.
/// Throws ConfigError on syntax, type, or range problems.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

} // namespace hepchain
