#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "hepchain/chain.hpp"
#include "hepchain/splitmix64.hpp"
#include "hepchain/toy_work.hpp"
#include "hepchain/verification.hpp"

namespace hepchain {

enum class MessageKind : std::uint8_t {
    ParamsBroadcast = 1,
    SolutionSubmission = 2,
    BlockBroadcast = 3,
    BalanceQuery = 4,
    BalanceReply = 5,
    DataRequest = 6,
    DataReply = 7,
    SyncRequest = 8,
    SyncReply = 9,
};

const char* to_string(MessageKind k);

struct ParamsMsg {
    std::uint64_t number = 0;
    std::uint64_t deadline = 0;
    SimulationParameters params;
};
struct SubmissionMsg {
    Submission submission;
};
struct BlockMsg {
    Block block;
};
struct BalanceQueryMsg {
    Address address;
};
struct BalanceReplyMsg {
    Address address;
    std::uint64_t height = 0;
    std::uint64_t balance = 0;
};

enum class DataStatus : std::uint8_t { Ok = 0, Denied = 1, UnknownDigest = 2 };

struct DataRequestMsg {
    HashDigest digest;
};
struct DataReplyMsg {
    HashDigest digest;
    DataStatus status = DataStatus::Ok;
    std::optional<SimulationResult> result;
};
struct SyncRequestMsg {
    std::uint64_t from_height = 0;
};
struct SyncReplyMsg {
    std::vector<Block> blocks;
};

using Payload = std::variant<ParamsMsg, SubmissionMsg, BlockMsg, BalanceQueryMsg, BalanceReplyMsg, DataRequestMsg,
                             DataReplyMsg, SyncRequestMsg, SyncReplyMsg>;

MessageKind kind_of(const Payload& p);

/// Record layout: u8 kind, then the body big-endian.
///   ParamsBroadcast:    number u64, deadline u64, parameters
///   SolutionSubmission: miner[32], block_number u64, parameters, u32 len, result bytes
///   BlockBroadcast:     serialized block
///   BalanceQuery:       address[32]
///   BalanceReply:       address[32], height u64, balance u64
///   DataRequest:        digest[32]
///   DataReply:          digest[32], status u8, and when status = 0: u32 len, result bytes
///   SyncRequest:        from_height u64
///   SyncReply:          u32 count, serialized blocks
/// Result bytes are encode_result(); parameters as hashed in blocks.
std::vector<std::uint8_t> encode_payload(const Payload& p);
/// Throws std::invalid_argument / std::out_of_range on malformed input.
Payload decode_payload(std::span<const std::uint8_t> bytes);

Block decode_block(ByteReader& r);

/// Address value standing for "every node" in envelopes.
const Address& broadcast_address();

struct MessageEnvelope {
    Address from;
    Address to;
    Payload payload;
    std::uint64_t send_tick = 0;
    std::uint64_t deliver_tick = 0;

    MessageKind kind() const { return kind_of(payload); }
};

/// Nodes in `nodes` cannot talk to nodes outside it during [start, end).
struct Partition {
    std::set<Address> nodes;
    std::uint64_t start = 0;
    std::uint64_t end = 0;

    bool separates(const Address& a, const Address& b, std::uint64_t tick) const;
};

struct LatencyModel {
    std::uint64_t base = 1;
    std::uint64_t jitter = 0;
    double drop_rate = 0.0;
    std::vector<Partition> partitions;

    /// Throws std::invalid_argument unless 0 <= drop_rate < 1.
    void validate() const;
    bool partitioned(const Address& node, std::uint64_t tick) const;
};

enum class DropCause { Random, Partition };

struct DeliveryDecision {
    bool dropped = false;
    std::optional<DropCause> cause;
    std::uint64_t deliver_tick = 0;
};

/// Draws the drop coin, then the jitter, from `rng` (always both, in that
/// order). Partitioned pairs are dropped regardless of the coin.
DeliveryDecision deliver(const MessageEnvelope& envelope, const LatencyModel& model, SplitMix64& rng);

/// deliver() plus per-pair FIFO: a message never overtakes an earlier one
/// on the same (from, to) pair.
class Network {
  public:
    Network(LatencyModel model, std::uint64_t seed) : model_(std::move(model)), rng_(seed) {}

    DeliveryDecision send(MessageEnvelope& envelope);

    const LatencyModel& model() const { return model_; }
    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t bytes() const { return bytes_; }
    const std::map<MessageKind, std::uint64_t>& bytes_by_kind() const { return bytes_by_kind_; }

  private:
    LatencyModel model_;
    SplitMix64 rng_;
    std::map<std::pair<Address, Address>, std::uint64_t> last_delivery_;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t bytes_ = 0;
    std::map<MessageKind, std::uint64_t> bytes_by_kind_;
};

} // namespace hepchain
