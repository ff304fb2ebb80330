#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hepchain/hash.hpp"
#include "hepchain/params.hpp"
#include "hepchain/registry.hpp"

namespace hepchain {

struct Transaction {
    Address from;
    Address to;
    std::uint64_t amount = 0;
    std::uint64_t nonce = 0;
    HashDigest auth_tag;

    bool operator==(const Transaction&) const = default;
};

struct Block {
    std::uint64_t number = 0;
    std::uint64_t timestamp = 0; ///< simulated ticks
    HashDigest prev_hash;
    std::vector<Transaction> transactions;
    Address winner;
    SimulationParameters sim_params;
    HashDigest sim_data_hash;

    bool operator==(const Block&) const = default;
};

struct ChainRules {
    std::uint64_t block_reward = 1;
    std::optional<std::uint32_t> tx_cap;

    bool operator==(const ChainRules&) const = default;
};

struct ChainState {
    ChainRules rules;
    std::vector<Block> blocks;
    std::map<Address, std::uint64_t> balances;
    std::map<Address, std::uint64_t> next_nonce;
    std::uint64_t total_supply = 0;
    HashDigest tip_hash; ///< block_hash(blocks.back())

    /// State holding only the genesis block.
    static ChainState genesis(ChainRules rules = {});

    std::uint64_t height() const { return blocks.back().number; }
    const Block& tip() const { return blocks.back(); }
    std::uint64_t balance_of(const Address& a) const;
    std::uint64_t nonce_of(const Address& a) const;

    bool operator==(const ChainState&) const = default;
};

enum class Rule {
    Ok,
    BadGenesis,
    HeightMismatch,
    LinkBroken,
    TimestampNotIncreasing,
    CapExceeded,
    UnknownWinner,
    ZeroAmount,
    UnknownSender,
    BadAuthTag,
    BadNonce,
    Overspend,
};

const char* to_string(Rule r);

struct ValidationReport {
    Rule rule = Rule::Ok;
    std::uint64_t height = 0;
    std::optional<std::size_t> tx_index;

    bool ok() const { return rule == Rule::Ok; }
    std::string describe() const;
};

class ChainError : public std::runtime_error {
  public:
    explicit ChainError(ValidationReport report);
    const ValidationReport& report() const { return report_; }

  private:
    ValidationReport report_;
};

/// Number 0, timestamp 0, zero prev_hash, no transactions, root winner,
/// zeroed parameters with no configs, zero sim_data_hash.
Block make_genesis();

void encode(ByteWriter& w, const Transaction& tx);
void encode(ByteWriter& w, const Block& block);
std::vector<std::uint8_t> serialize_block(const Block& block);

/// SHA-256 of the canonical big-endian block serialization.
HashDigest block_hash(const Block& block);

/// First 8 bytes (big-endian) of SHA-256(prev_hash || number as u64 BE).
std::uint64_t derive_work_seed(const HashDigest& prev_hash, std::uint64_t number);

/// SHA-256(auth_key || from || to || amount || nonce).
HashDigest transaction_auth_tag(const Transaction& tx, const HashDigest& auth_key);
Transaction make_transaction(const Address& from, const Address& to, std::uint64_t amount, std::uint64_t nonce,
                             const HashDigest& auth_key);

/// Every rule, including transaction authenticity against the registry.
ValidationReport validate_block(const Block& candidate, const ChainState& state, const MinerRegistry& registry);

/// Rules that need no registry: linkage, timestamps, cap, amounts, nonces,
/// balances.
ValidationReport validate_block_structure(const Block& candidate, const ChainState& state);

/// Transactions execute in order, then the winner is credited block_reward.
/// Throws ChainError when the block breaks a structural rule.
void apply_block_in_place(ChainState& state, const Block& block);
ChainState apply_block(ChainState state, const Block& block);

/// Folds validate_block + apply_block from genesis. Throws ChainError with
/// the height of the first invalid block.
ChainState replay_chain(const std::vector<Block>& blocks, const ChainRules& rules, const MinerRegistry& registry);

} // namespace hepchain
