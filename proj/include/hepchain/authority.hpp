#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "hepchain/chain.hpp"
#include "hepchain/registry.hpp"
#include "hepchain/toy_work.hpp"
#include "hepchain/verification.hpp"

namespace hepchain {

// -- Data store ----------------------------------------------------------------

enum class DataError { Denied, UnknownDigest };
const char* to_string(DataError e);

/// {digest: result} store of verified solutions.
struct DataStore {
    std::map<HashDigest, SimulationResult> entries;
    bool serving_enabled = true;

    void store(const SimulationResult& result) { entries.emplace(result.digest, result); }
    std::variant<SimulationResult, DataError> serve(const HashDigest& digest) const;
};

// -- Transaction pool ----------------------------------------------------------

/// FIFO; drain() takes at most `cap` and leaves the rest in order.
struct TxPool {
    std::deque<Transaction> pending;
    std::optional<std::uint32_t> cap;

    void push(Transaction tx) { pending.push_back(std::move(tx)); }
    std::vector<Transaction> drain();
    std::size_t size() const { return pending.size(); }
};

// -- Difficulty ----------------------------------------------------------------

struct DifficultyController {
    double target_cost = 0.0; ///< desired expected step count per round
    double energy_cut = 1.0;
};

/// energy_cut <- energy_cut * clamp(observed / target, 0.5, 2.0). Returns the new cut.
double adjust_difficulty(DifficultyController& controller, double observed_mean_steps);

// -- Round lifecycle -----------------------------------------------------------

/// Parameter template shared by every round; seed and cut vary.
struct WorkTemplate {
    std::uint32_t n_events = 20;
    double beam_energy = 10.0;
    std::uint32_t n_layers = 6;
    std::vector<ConfigFlag> configs;
};

/// work_seed from the tip, energy_cut from the controller, the rest from the template.
SimulationParameters issue_parameters(const ChainState& chain, const DifficultyController& controller,
                                      const WorkTemplate& tmpl);

enum class IntakeError { Unregistered, Banned, Late, WrongParams, DuplicateSubmission, DigestMismatch };
const char* to_string(IntakeError e);

enum class TxError { UnknownSender, Banned, BadAuthTag, ZeroAmount, BadNonce, InsufficientFunds };
const char* to_string(TxError e);

enum class BanReason { WrongParams, FailedVerification, Operator };
const char* to_string(BanReason r);

struct RoundState {
    std::uint64_t number = 0;
    std::uint64_t start_tick = 0;
    std::uint64_t deadline = 0;
    SimulationParameters params;
    std::map<Address, Submission> submissions;
    std::optional<DecoySpec> decoy;
    std::optional<ReferenceDataset> reference;
};

struct AuthorityConfig {
    ChainRules rules;
    Strategy strategy = Strategy::Decoy;
    ReplicationConfig replication;
    double chi2_threshold = kDefaultChi2Threshold;
    std::uint32_t histogram_bins = kDefaultHistogramBins;
    /// Resolution of the "real" reference data relative to the simulation.
    double reference_smear_scale = 1.0;
    /// Strikes before a ban; 0 never bans automatically.
    std::uint32_t ban_strikes = 2;
    bool serve_data = true;
    std::uint64_t round_interval = 1000;
    WorkTemplate work;
    double initial_energy_cut = 1.0;
    /// Present when the controller is enabled.
    std::optional<double> target_cost;
    std::uint32_t difficulty_window = 1;
    /// Keeps the decoy index unpredictable to miners.
    std::uint64_t secret_seed = 0;
    unsigned threads = 1;
};

struct BanRecord {
    Address address;
    BanReason reason;
    std::uint64_t height;
};

struct RoundOutcome {
    Block block;
    Verdict verdict;                  ///< the stage that produced the block
    std::vector<Verdict> stages;      ///< every stage tried, in order
    std::uint32_t escalation_depth = 0;
    SimulationResult winning_result;
    std::vector<BanRecord> bans;
    std::size_t submissions = 0;
    std::size_t deferred_transactions = 0;
};

/// The root authority: sole block producer. One logical actor; callers
/// serialize access.
class Authority {
  public:
    Authority(AuthorityConfig config, const HashDigest& root_key);

    std::optional<RegistrationError> register_miner(const std::string& real_id, const Address& address,
                                                    const HashDigest& auth_key);
    std::optional<BanError> ban_miner(const Address& address, BanReason reason);

    /// Parameters the next round would use; pure in the chain tip and controller.
    SimulationParameters next_parameters() const;

    /// Opens round height+1. Throws std::logic_error if a round is open.
    const RoundState& open_round(std::uint64_t start_tick);
    const std::optional<RoundState>& round() const { return round_; }

    std::optional<IntakeError> accept_submission(Submission sub, std::uint64_t arrival_tick);

    std::optional<TxError> submit_transaction(const Transaction& tx);
    /// Chain balance minus pending outgoing transfers.
    std::uint64_t projected_balance(const Address& a) const;
    std::uint64_t projected_nonce(const Address& a) const;

    /// Verifies, escalates as needed, picks the winner, assembles and applies
    /// the block. Always produces a block.
    RoundOutcome close_round(std::uint64_t tick);

    std::variant<SimulationResult, DataError> serve_data(const HashDigest& digest) const
    {
        return store_.serve(digest);
    }
    std::uint64_t answer_balance_query(const Address& a) const { return chain_.balance_of(a); }

    const ChainState& chain() const { return chain_; }
    const MinerRegistry& registry() const { return registry_; }
    const DataStore& data_store() const { return store_; }
    DataStore& data_store() { return store_; }
    const TxPool& pool() const { return pool_; }
    const DifficultyController& controller() const { return controller_; }
    const AuthorityConfig& config() const { return config_; }
    const std::vector<BanRecord>& ban_log() const { return ban_log_; }
    std::uint32_t strikes(const Address& a) const;

  private:
    void strike(const Address& a, BanReason reason, std::vector<BanRecord>* sink);
    Verdict run_stage(Strategy s, const std::vector<Submission>& subs, SimulationResult& authority_result);

    AuthorityConfig config_;
    ChainState chain_;
    MinerRegistry registry_;
    DataStore store_;
    TxPool pool_;
    DifficultyController controller_;
    std::optional<RoundState> round_;
    std::map<Address, std::uint32_t> strikes_;
    std::vector<BanRecord> ban_log_;
    std::vector<double> window_steps_;
};

/// Uniform draw from the accepted list using the (work_seed, height) stream.
Address draw_winner(const std::vector<Address>& accepted, std::uint64_t work_seed, std::uint64_t height);

/// Secret uniform config index for the decoy of a round.
std::uint32_t draw_decoy_index(std::uint64_t secret_seed, std::uint64_t height, std::size_t config_count);

} // namespace hepchain
