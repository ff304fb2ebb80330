#include "hepchain/network.hpp"

#include <stdexcept>

namespace hepchain {

const char* to_string(MessageKind k)
{
    switch (k) {
    case MessageKind::ParamsBroadcast: return "ParamsBroadcast";
    case MessageKind::SolutionSubmission: return "SolutionSubmission";
    case MessageKind::BlockBroadcast: return "BlockBroadcast";
    case MessageKind::BalanceQuery: return "BalanceQuery";
    case MessageKind::BalanceReply: return "BalanceReply";
    case MessageKind::DataRequest: return "DataRequest";
    case MessageKind::DataReply: return "DataReply";
    case MessageKind::SyncRequest: return "SyncRequest";
    case MessageKind::SyncReply: return "SyncReply";
    }
    return "?";
}

MessageKind kind_of(const Payload& p)
{
    return static_cast<MessageKind>(p.index() + 1);
}

const Address& broadcast_address()
{
    static const Address all = [] {
        Address a;
        a.bytes.fill(0xff);
        return a;
    }();
    return all;
}

namespace {

void write_result(ByteWriter& w, const SimulationResult& result)
{
    const auto bytes = encode_result(result);
    w.u32(static_cast<std::uint32_t>(bytes.size()));
    w.bytes(bytes);
}

SimulationResult read_result(ByteReader& r)
{
    const std::uint32_t n = r.u32();
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = r.u8();
    return decode_result(bytes);
}

struct Encoder {
    ByteWriter& w;

    void operator()(const ParamsMsg& m)
    {
        w.u64(m.number);
        w.u64(m.deadline);
        encode(w, m.params);
    }
    void operator()(const SubmissionMsg& m)
    {
        w.address(m.submission.miner);
        w.u64(m.submission.block_number);
        encode(w, m.submission.params_echo);
        write_result(w, m.submission.result);
    }
    void operator()(const BlockMsg& m) { encode(w, m.block); }
    void operator()(const BalanceQueryMsg& m) { w.address(m.address); }
    void operator()(const BalanceReplyMsg& m)
    {
        w.address(m.address);
        w.u64(m.height);
        w.u64(m.balance);
    }
    void operator()(const DataRequestMsg& m) { w.digest(m.digest); }
    void operator()(const DataReplyMsg& m)
    {
        w.digest(m.digest);
        w.u8(static_cast<std::uint8_t>(m.status));
        if (m.status == DataStatus::Ok) write_result(w, m.result.value());
    }
    void operator()(const SyncRequestMsg& m) { w.u64(m.from_height); }
    void operator()(const SyncReplyMsg& m)
    {
        w.u32(static_cast<std::uint32_t>(m.blocks.size()));
        for (const auto& b : m.blocks) encode(w, b);
    }
};

} // namespace

Block decode_block(ByteReader& r)
{
    Block b;
    b.number = r.u64();
    b.timestamp = r.u64();
    b.prev_hash = r.digest();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        Transaction tx;
        tx.from = r.address();
        tx.to = r.address();
        tx.amount = r.u64();
        tx.nonce = r.u64();
        tx.auth_tag = r.digest();
        b.transactions.push_back(tx);
    }
    b.winner = r.address();
    b.sim_params = decode_parameters(r);
    b.sim_data_hash = r.digest();
    return b;
}

std::vector<std::uint8_t> encode_payload(const Payload& p)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind_of(p)));
    std::visit(Encoder{w}, p);
    return w.take();
}

Payload decode_payload(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    const auto kind = static_cast<MessageKind>(r.u8());
    Payload out;
    switch (kind) {
    case MessageKind::ParamsBroadcast: {
        ParamsMsg m;
        m.number = r.u64();
        m.deadline = r.u64();
        m.params = decode_parameters(r);
        out = std::move(m);
        break;
    }
    case MessageKind::SolutionSubmission: {
        SubmissionMsg m;
        m.submission.miner = r.address();
        m.submission.block_number = r.u64();
        m.submission.params_echo = decode_parameters(r);
        m.submission.result = read_result(r);
        out = std::move(m);
        break;
    }
    case MessageKind::BlockBroadcast: out = BlockMsg{decode_block(r)}; break;
    case MessageKind::BalanceQuery: out = BalanceQueryMsg{r.address()}; break;
    case MessageKind::BalanceReply: {
        BalanceReplyMsg m;
        m.address = r.address();
        m.height = r.u64();
        m.balance = r.u64();
        out = m;
        break;
    }
    case MessageKind::DataRequest: out = DataRequestMsg{r.digest()}; break;
    case MessageKind::DataReply: {
        DataReplyMsg m;
        m.digest = r.digest();
        const auto status = r.u8();
        if (status > 2) throw std::invalid_argument("DataReply: bad status");
        m.status = static_cast<DataStatus>(status);
        if (m.status == DataStatus::Ok) m.result = read_result(r);
        out = std::move(m);
        break;
    }
    case MessageKind::SyncRequest: out = SyncRequestMsg{r.u64()}; break;
    case MessageKind::SyncReply: {
        SyncReplyMsg m;
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) m.blocks.push_back(decode_block(r));
        out = std::move(m);
        break;
    }
    default: throw std::invalid_argument("decode_payload: unknown message kind");
    }
    if (!r.at_end()) throw std::invalid_argument("decode_payload: trailing bytes");
    return out;
}

bool Partition::separates(const Address& a, const Address& b, std::uint64_t tick) const
{
    if (tick < start || tick >= end) return false;
    return nodes.contains(a) != nodes.contains(b);
}

void LatencyModel::validate() const
{
    if (!(drop_rate >= 0.0 && drop_rate < 1.0)) throw std::invalid_argument("drop_rate must be in [0, 1)");
    for (const auto& p : partitions)
        if (p.end < p.start) throw std::invalid_argument("partition ends before it starts");
}

bool LatencyModel::partitioned(const Address& node, std::uint64_t tick) const
{
    for (const auto& p : partitions)
        if (p.nodes.contains(node) && tick >= p.start && tick < p.end) return true;
    return false;
}

DeliveryDecision deliver(const MessageEnvelope& envelope, const LatencyModel& model, SplitMix64& rng)
{
    DeliveryDecision d;
    const bool coin = rng.bernoulli(model.drop_rate);
    const std::uint64_t extra = model.jitter ? rng.below(model.jitter + 1) : 0;
    d.deliver_tick = envelope.send_tick + model.base + extra;
    for (const auto& p : model.partitions)
        if (p.separates(envelope.from, envelope.to, envelope.send_tick)) {
            d.dropped = true;
            d.cause = DropCause::Partition;
            return d;
        }
    if (coin) {
        d.dropped = true;
        d.cause = DropCause::Random;
    }
    return d;
}

DeliveryDecision Network::send(MessageEnvelope& envelope)
{
    ++sent_;
    const auto size = encode_payload(envelope.payload).size();
    bytes_ += size;
    bytes_by_kind_[envelope.kind()] += size;
    auto d = deliver(envelope, model_, rng_);
    if (d.dropped) {
        ++dropped_;
        return d;
    }
    auto& last = last_delivery_[{envelope.from, envelope.to}];
    d.deliver_tick = std::max(d.deliver_tick, last);
    last = d.deliver_tick;
    envelope.deliver_tick = d.deliver_tick;
    return d;
}

} // namespace hepchain
