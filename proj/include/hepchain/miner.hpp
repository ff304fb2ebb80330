#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "hepchain/chain.hpp"
#include "hepchain/registry.hpp"
#include "hepchain/toy_work.hpp"
#include "hepchain/verification.hpp"

namespace hepchain {

enum class BehaviorKind { Honest, FabricateAll, PartialFabricate, SybilColluder, WrongParams, ReferenceOracleCheat };

const char* to_string(BehaviorKind k);
std::optional<BehaviorKind> behavior_from_string(std::string_view name);

struct MinerBehavior {
    BehaviorKind kind = BehaviorKind::Honest;
    std::uint32_t k_correct = 0; ///< PartialFabricate only
    std::uint32_t group_id = 0;  ///< 0 = acting alone
    /// Fabrication seed; members of one group share it, which makes their
    /// submissions byte-identical.
    std::uint64_t fabrication_seed = 0;
};

/// Memoized access to the pure work functions, shared by every simulated
/// miner. Results are identical to calling the functions directly.
class WorkOracle {
  public:
    explicit WorkOracle(unsigned threads = 1, std::uint32_t bins = kDefaultHistogramBins, double smear_scale = 1.0)
        : threads_(threads), bins_(bins), smear_scale_(smear_scale)
    {
    }

    const SimulationResult& pipeline(const SimulationParameters& params);
    double cost(const SimulationParameters& params);
    /// The reference data a ReferenceOracleCheat is assumed to hold.
    const ReferenceDataset& reference(const SimulationParameters& params);

  private:
    unsigned threads_;
    std::uint32_t bins_;
    double smear_scale_;
    std::optional<std::pair<SimulationParameters, SimulationResult>> last_run_;
    std::optional<std::pair<SimulationParameters, ReferenceDataset>> last_reference_;
    std::map<std::vector<std::uint8_t>, double> costs_;
};

struct MinerNode {
    Address address;
    HashDigest auth_key;
    MinerBehavior behavior;
    ChainState local_chain = ChainState::genesis();
    double compute_speed = 1.0; ///< cost units (expected steps) per tick
    std::uint64_t private_seed = 0;
    bool offline = false;
};

struct ScheduledWork {
    std::uint64_t ready_tick = 0;
    Submission submission;
};

/// Ticks an honest node of this speed needs for the work.
std::uint64_t work_ticks(double cost, double speed);

/// Decides what the node does with a round's parameters. Honest nodes finish
/// at now + cost/speed and stay silent when that misses the deadline;
/// fabricators answer on the next tick.
std::optional<ScheduledWork> on_params(const MinerNode& node, const SimulationParameters& params,
                                       std::uint64_t number, std::uint64_t now, std::uint64_t deadline,
                                       WorkOracle& oracle);

/// The submission the node's policy produces for these parameters.
Submission compute_solution(const MinerNode& node, const SimulationParameters& params, std::uint64_t number,
                            WorkOracle& oracle);

/// Config indices a PartialFabricate node computes correctly this round.
std::vector<bool> correct_configs(const MinerNode& node, const SimulationParameters& params);

/// Cheap fake shaped like a real result: straight noiseless tracks with
/// uniform slopes. Only configs with mask[i] == false are fabricated;
/// `honest` supplies the rest.
SimulationResult fabricate_result(const SimulationParameters& params, std::uint64_t seed,
                                  const std::vector<bool>& mask, const SimulationResult* honest);

/// Tracks resampled from reference data.
SimulationResult fit_to_reference(const SimulationParameters& params, const ReferenceDataset& ref,
                                  std::uint64_t seed);

enum class BlockRejection { NotFromAuthority, Stale, Gap, Invalid };
const char* to_string(BlockRejection r);

/// Validates and applies a broadcast block to the node's chain. The chain is
/// unchanged on rejection.
std::optional<BlockRejection> on_block(MinerNode& node, const Block& block, const Address& sender,
                                       const MinerRegistry& registry);

} // namespace hepchain
