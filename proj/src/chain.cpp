#include "hepchain/chain.hpp"

#include <sstream>

namespace hepchain {

const char* to_string(Rule r)
{
    switch (r) {
    case Rule::Ok: return "Ok";
    case Rule::BadGenesis: return "BadGenesis";
    case Rule::HeightMismatch: return "HeightMismatch";
    case Rule::LinkBroken: return "LinkBroken";
    case Rule::TimestampNotIncreasing: return "TimestampNotIncreasing";
    case Rule::CapExceeded: return "CapExceeded";
    case Rule::UnknownWinner: return "UnknownWinner";
    case Rule::ZeroAmount: return "ZeroAmount";
    case Rule::UnknownSender: return "UnknownSender";
    case Rule::BadAuthTag: return "BadAuthTag";
    case Rule::BadNonce: return "BadNonce";
    case Rule::Overspend: return "Overspend";
    }
    return "?";
}

std::string ValidationReport::describe() const
{
    std::ostringstream os;
    os << to_string(rule) << " at height " << height;
    if (tx_index) os << " (transaction " << *tx_index << ")";
    return os.str();
}

ChainError::ChainError(ValidationReport report)
    : std::runtime_error(report.describe()), report_(report)
{
}

std::uint64_t ChainState::balance_of(const Address& a) const
{
    auto it = balances.find(a);
    return it == balances.end() ? 0 : it->second;
}

std::uint64_t ChainState::nonce_of(const Address& a) const
{
    auto it = next_nonce.find(a);
    return it == next_nonce.end() ? 0 : it->second;
}

Block make_genesis()
{
    Block g;
    g.winner = root_address();
    return g;
}

ChainState ChainState::genesis(ChainRules rules)
{
    ChainState s;
    s.rules = rules;
    s.blocks.push_back(make_genesis());
    s.tip_hash = block_hash(s.blocks.back());
    return s;
}

void encode(ByteWriter& w, const Transaction& tx)
{
    w.address(tx.from);
    w.address(tx.to);
    w.u64(tx.amount);
    w.u64(tx.nonce);
    w.digest(tx.auth_tag);
}

void encode(ByteWriter& w, const Block& block)
{
    w.u64(block.number);
    w.u64(block.timestamp);
    w.digest(block.prev_hash);
    w.u32(static_cast<std::uint32_t>(block.transactions.size()));
    for (const auto& tx : block.transactions) encode(w, tx);
    w.address(block.winner);
    encode(w, block.sim_params);
    w.digest(block.sim_data_hash);
}

std::vector<std::uint8_t> serialize_block(const Block& block)
{
    ByteWriter w;
    encode(w, block);
    return w.take();
}

HashDigest block_hash(const Block& block) { return sha256(serialize_block(block)); }

std::uint64_t derive_work_seed(const HashDigest& prev_hash, std::uint64_t number)
{
    ByteWriter w;
    w.digest(prev_hash);
    w.u64(number);
    const auto h = sha256(w.data());
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | h.bytes[i];
    return seed;
}

HashDigest transaction_auth_tag(const Transaction& tx, const HashDigest& auth_key)
{
    ByteWriter w;
    w.digest(auth_key);
    w.address(tx.from);
    w.address(tx.to);
    w.u64(tx.amount);
    w.u64(tx.nonce);
    return sha256(w.data());
}

Transaction make_transaction(const Address& from, const Address& to, std::uint64_t amount, std::uint64_t nonce,
                             const HashDigest& auth_key)
{
    Transaction tx{from, to, amount, nonce, {}};
    tx.auth_tag = transaction_auth_tag(tx, auth_key);
    return tx;
}

namespace {

ValidationReport check(const Block& candidate, const ChainState& state, const MinerRegistry* registry)
{
    ValidationReport report;
    report.height = candidate.number;
    auto fail = [&](Rule r, std::optional<std::size_t> tx = std::nullopt) {
        report.rule = r;
        report.tx_index = tx;
        return report;
    };

    const Block& parent = state.tip();
    if (candidate.number != parent.number + 1) return fail(Rule::HeightMismatch);
    if (candidate.prev_hash != state.tip_hash) return fail(Rule::LinkBroken);
    if (candidate.timestamp <= parent.timestamp) return fail(Rule::TimestampNotIncreasing);
    if (state.rules.tx_cap && candidate.transactions.size() > *state.rules.tx_cap) return fail(Rule::CapExceeded);
    if (registry && !registry->is_registered(candidate.winner)) return fail(Rule::UnknownWinner);

    // running view of the balances and nonces touched by this block
    std::map<Address, std::uint64_t> balance;
    std::map<Address, std::uint64_t> nonce;
    auto balance_ref = [&](const Address& a) -> std::uint64_t& {
        auto [it, fresh] = balance.try_emplace(a, 0);
        if (fresh) it->second = state.balance_of(a);
        return it->second;
    };

    for (std::size_t i = 0; i < candidate.transactions.size(); ++i) {
        const auto& tx = candidate.transactions[i];
        if (tx.amount < 1) return fail(Rule::ZeroAmount, i);
        if (registry) {
            const auto* entry = registry->find(tx.from);
            if (!entry) return fail(Rule::UnknownSender, i);
            if (transaction_auth_tag(tx, entry->auth_key) != tx.auth_tag) return fail(Rule::BadAuthTag, i);
        }
        auto [nit, fresh] = nonce.try_emplace(tx.from, 0);
        if (fresh) nit->second = state.nonce_of(tx.from);
        if (tx.nonce != nit->second) return fail(Rule::BadNonce, i);
        ++nit->second;
        auto& from_balance = balance_ref(tx.from);
        if (from_balance < tx.amount) return fail(Rule::Overspend, i);
        from_balance -= tx.amount;
        balance_ref(tx.to) += tx.amount;
    }
    return report;
}

} // namespace

ValidationReport validate_block(const Block& candidate, const ChainState& state, const MinerRegistry& registry)
{
    return check(candidate, state, &registry);
}

ValidationReport validate_block_structure(const Block& candidate, const ChainState& state)
{
    return check(candidate, state, nullptr);
}

void apply_block_in_place(ChainState& state, const Block& block)
{
    if (auto report = validate_block_structure(block, state); !report.ok()) throw ChainError(report);

    for (const auto& tx : block.transactions) {
        state.balances[tx.from] -= tx.amount;
        state.balances[tx.to] += tx.amount;
        state.next_nonce[tx.from] = tx.nonce + 1;
    }
    state.balances[block.winner] += state.rules.block_reward;
    state.total_supply += state.rules.block_reward;
    state.blocks.push_back(block);
    state.tip_hash = block_hash(block);
}

ChainState apply_block(ChainState state, const Block& block)
{
    apply_block_in_place(state, block);
    return state;
}

ChainState replay_chain(const std::vector<Block>& blocks, const ChainRules& rules, const MinerRegistry& registry)
{
    ChainState state = ChainState::genesis(rules);
    if (blocks.empty() || blocks.front() != state.blocks.front()) {
        ValidationReport report;
        report.rule = Rule::BadGenesis;
        report.height = 0;
        throw ChainError(report);
    }
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (auto report = validate_block(blocks[i], state, registry); !report.ok()) throw ChainError(report);
        apply_block_in_place(state, blocks[i]);
    }
    return state;
}

} // namespace hepchain
