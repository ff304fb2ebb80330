#include <gtest/gtest.h>

#include <sstream>

#include "hepchain/chain.hpp"
#include "hepchain/io.hpp"
#include "hepchain/splitmix64.hpp"

using namespace hepchain;

namespace {

HashDigest digest_of(const char* hex) { return HashDigest::from_hex(hex).value(); }

struct Fixture {
    MinerRegistry registry;
    std::vector<Address> miners;
    std::vector<HashDigest> keys;

    explicit Fixture(int n)
    {
        registry.register_miner("root-authority", root_address(), sha256("root-key"));
        for (int i = 0; i < n; ++i) {
            miners.push_back(Address::from_label("miner-" + std::to_string(i)));
            keys.push_back(sha256("key-" + std::to_string(i)));
            registry.register_miner("id-" + std::to_string(i), miners.back(), keys.back());
        }
    }

    Block next_block(const ChainState& s, const Address& winner, std::vector<Transaction> txs = {}) const
    {
        Block b;
        b.number = s.height() + 1;
        b.timestamp = s.tip().timestamp + 1000;
        b.prev_hash = s.tip_hash;
        b.transactions = std::move(txs);
        b.winner = winner;
        b.sim_params.work_seed = derive_work_seed(s.tip_hash, b.number);
        b.sim_data_hash = sha256("result-" + std::to_string(b.number));
        return b;
    }
};

} // namespace

TEST(Hash, Sha256KnownVectors)
{
    EXPECT_EQ(sha256("").to_hex(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256("abc").to_hex(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, HexRoundTripAndRejection)
{
    const auto h = sha256("x");
    EXPECT_EQ(HashDigest::from_hex(h.to_hex()), h);
    EXPECT_FALSE(HashDigest::from_hex("abc"));
    EXPECT_FALSE(HashDigest::from_hex(std::string(64, 'g')));
    EXPECT_FALSE(Address::from_hex(std::string(62, '0')));
}

TEST(Hash, ByteReaderThrowsOnTruncation)
{
    std::vector<std::uint8_t> bytes{1, 2, 3};
    ByteReader r(bytes);
    EXPECT_THROW(r.u64(), std::out_of_range);
}

TEST(Chain, RootAddressIsHashOfLabel)
{
    EXPECT_EQ(root_address().to_hex(), "40e3d3d099ceae68354588f5370e57331192dccd383e3fb830e8d391bf3b34d1");
}

TEST(Chain, GenesisLayoutAndHash)
{
    const auto g = make_genesis();
    EXPECT_EQ(serialize_block(g).size(), 152u);
    EXPECT_EQ(block_hash(g).to_hex(), "30a1f81fe4af2316728c1ac19e38667dee04b95b1f847757d9f001a941d51b29");
    EXPECT_EQ(g.winner, root_address());
    EXPECT_TRUE(g.prev_hash.is_zero());
    EXPECT_TRUE(g.transactions.empty());

    const auto s = ChainState::genesis();
    EXPECT_EQ(s.height(), 0u);
    EXPECT_EQ(s.total_supply, 0u);
    EXPECT_TRUE(s.balances.empty());
}

TEST(Chain, WorkSeedVectors)
{
    EXPECT_EQ(derive_work_seed(HashDigest::zero(), 1), 0x08e00266fff0aaccull);
    EXPECT_EQ(derive_work_seed(block_hash(make_genesis()), 1), 0xc0018a86d091701cull);
}

TEST(Chain, AuthTagAndBlockHashVectors)
{
    const auto miner = Address::from_label("miner-0");
    const auto tx = make_transaction(miner, root_address(), 5, 0, sha256("key-0"));
    EXPECT_EQ(tx.auth_tag.to_hex(), "fb99116c315e1f88764dc4d7639807642a7c8978f516bd44eb0bb500356b33f9");

    Block b;
    b.number = 1;
    b.timestamp = 1000;
    b.prev_hash = block_hash(make_genesis());
    b.transactions = {tx};
    b.winner = miner;
    b.sim_params = {7, 10, 10.0, 1.0, 6, {{0, 0.02, 8.0}}};
    b.sim_data_hash = sha256("data");
    EXPECT_EQ(serialize_block(b).size(), 284u);
    EXPECT_EQ(block_hash(b).to_hex(), "7f51be19bb946898f4a60aa399adb5d914e462d92b29dbf8535968d8e25ab62c");
}

TEST(Chain, SingleBitFlipChangesHash)
{
    const auto bytes = serialize_block(make_genesis());
    const auto base = sha256(bytes);
    for (std::size_t i = 0; i < bytes.size(); i += 7) {
        auto copy = bytes;
        copy[i] ^= 0x01;
        EXPECT_NE(sha256(copy), base) << "byte " << i;
    }
}

TEST(Chain, WinnerCreditedOnApply)
{
    Fixture f(2);
    auto s = ChainState::genesis();
    s = apply_block(s, f.next_block(s, f.miners[0]));
    EXPECT_EQ(s.balance_of(f.miners[0]), 1u);
    EXPECT_EQ(s.total_supply, 1u);
    EXPECT_EQ(s.balance_of(f.miners[1]), 0u);
}

TEST(Chain, TransactionsRunBeforeReward)
{
    Fixture f(2);
    auto s = ChainState::genesis();
    s = apply_block(s, f.next_block(s, f.miners[0]));
    // miner-0 spends its whole balance in the block it also wins
    auto tx = make_transaction(f.miners[0], f.miners[1], 1, 0, f.keys[0]);
    auto b = f.next_block(s, f.miners[0], {tx});
    ASSERT_TRUE(validate_block(b, s, f.registry).ok());
    s = apply_block(s, b);
    EXPECT_EQ(s.balance_of(f.miners[0]), 1u);
    EXPECT_EQ(s.balance_of(f.miners[1]), 1u);
    EXPECT_EQ(s.nonce_of(f.miners[0]), 1u);

    // a transfer funded only by the reward of its own block is an overspend
    auto s2 = ChainState::genesis();
    auto early = f.next_block(s2, f.miners[1], {make_transaction(f.miners[1], f.miners[0], 1, 0, f.keys[1])});
    EXPECT_EQ(validate_block(early, s2, f.registry).rule, Rule::Overspend);
}

TEST(Chain, EveryRuleIsDetected)
{
    Fixture f(2);
    ChainRules rules;
    rules.tx_cap = 1;
    auto s = ChainState::genesis(rules);
    s = apply_block(s, f.next_block(s, f.miners[0]));
    s = apply_block(s, f.next_block(s, f.miners[0]));
    const auto good_tx = make_transaction(f.miners[0], f.miners[1], 1, 0, f.keys[0]);
    ASSERT_TRUE(validate_block(f.next_block(s, f.miners[1], {good_tx}), s, f.registry).ok());

    auto expect_rule = [&](Block b, Rule r, std::optional<std::size_t> tx = std::nullopt) {
        const auto report = validate_block(b, s, f.registry);
        EXPECT_EQ(report.rule, r) << to_string(report.rule);
        EXPECT_EQ(report.height, b.number);
        EXPECT_EQ(report.tx_index, tx);
    };

    auto b = f.next_block(s, f.miners[1]);
    b.number += 1;
    expect_rule(b, Rule::HeightMismatch);

    b = f.next_block(s, f.miners[1]);
    b.prev_hash.bytes[0] ^= 1;
    expect_rule(b, Rule::LinkBroken);

    b = f.next_block(s, f.miners[1]);
    b.timestamp = s.tip().timestamp;
    expect_rule(b, Rule::TimestampNotIncreasing);

    expect_rule(f.next_block(s, f.miners[1], {good_tx, good_tx}), Rule::CapExceeded);
    expect_rule(f.next_block(s, Address::from_label("stranger")), Rule::UnknownWinner);

    auto zero = make_transaction(f.miners[0], f.miners[1], 0, 0, f.keys[0]);
    expect_rule(f.next_block(s, f.miners[1], {zero}), Rule::ZeroAmount, 0);

    const auto stranger = Address::from_label("stranger");
    expect_rule(f.next_block(s, f.miners[1], {make_transaction(stranger, f.miners[1], 1, 0, f.keys[0])}),
                Rule::UnknownSender, 0);

    auto forged = good_tx;
    forged.amount = 2;
    expect_rule(f.next_block(s, f.miners[1], {forged}), Rule::BadAuthTag, 0);

    expect_rule(f.next_block(s, f.miners[1], {make_transaction(f.miners[0], f.miners[1], 1, 1, f.keys[0])}),
                Rule::BadNonce, 0);
    expect_rule(f.next_block(s, f.miners[1], {make_transaction(f.miners[0], f.miners[1], 3, 0, f.keys[0])}),
                Rule::Overspend, 0);
}

TEST(Chain, ApplyRejectsStructuralViolationAndLeavesStateAlone)
{
    Fixture f(1);
    const auto s = ChainState::genesis();
    auto b = f.next_block(s, f.miners[0]);
    b.prev_hash = HashDigest::zero();
    EXPECT_THROW(apply_block(s, b), ChainError);
    EXPECT_EQ(s, ChainState::genesis());
}

TEST(Chain, ReplayRejectsForeignGenesis)
{
    Fixture f(1);
    auto blocks = ChainState::genesis().blocks;
    blocks[0].timestamp = 5;
    try {
        replay_chain(blocks, {}, f.registry);
        FAIL();
    } catch (const ChainError& e) {
        EXPECT_EQ(e.report().rule, Rule::BadGenesis);
        EXPECT_EQ(e.report().height, 0u);
    }
}

// Property: replaying the block list reproduces the incrementally built
// state, and supply equals height x reward, for random workloads.
TEST(ChainProperty, ReplayEqualsIncrementalState)
{
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Fixture f(4);
        SplitMix64 rng(stream_key(99, trial, 0));
        ChainRules rules{3, std::nullopt};
        auto s = ChainState::genesis(rules);
        for (int round = 0; round < 30; ++round) {
            std::vector<Transaction> txs;
            auto view = s;
            for (int k = 0; k < 3; ++k) {
                const auto from = rng.below(4), to = rng.below(4);
                const auto bal = view.balance_of(f.miners[from]);
                if (bal == 0) continue;
                const auto amount = 1 + rng.below(bal);
                auto tx = make_transaction(f.miners[from], f.miners[to], amount, view.nonce_of(f.miners[from]),
                                           f.keys[from]);
                view.balances[f.miners[from]] -= amount;
                view.balances[f.miners[to]] += amount;
                view.next_nonce[f.miners[from]] += 1;
                txs.push_back(tx);
            }
            auto b = f.next_block(s, f.miners[rng.below(4)], txs);
            ASSERT_TRUE(validate_block(b, s, f.registry).ok()) << validate_block(b, s, f.registry).describe();
            apply_block_in_place(s, b);
        }
        EXPECT_EQ(s.total_supply, 30u * rules.block_reward);
        std::uint64_t sum = 0;
        for (const auto& [_, v] : s.balances) sum += v;
        EXPECT_EQ(sum, s.total_supply);
        EXPECT_EQ(replay_chain(s.blocks, rules, f.registry), s);
    }
}

TEST(ChainIo, ExportRoundTrip)
{
    Fixture f(2);
    ChainRules rules{2, 5u};
    auto s = ChainState::genesis(rules);
    s = apply_block(s, f.next_block(s, f.miners[0]));
    s = apply_block(s, f.next_block(s, f.miners[1], {make_transaction(f.miners[0], f.miners[1], 2, 0, f.keys[0])}));
    f.registry.ban(f.miners[1]);

    const auto text = chain_export_string(s, f.registry);
    std::istringstream in(text);
    const auto exported = read_chain_export(in);
    EXPECT_EQ(exported.rules, rules);
    EXPECT_EQ(exported.blocks, s.blocks);
    EXPECT_TRUE(exported.registry.is_banned(f.miners[1]));
    EXPECT_EQ(replay_chain(exported.blocks, exported.rules, exported.registry), s);
    EXPECT_EQ(chain_export_string(s, f.registry), text);
}

TEST(ChainIo, MalformedExportThrows)
{
    std::istringstream empty("");
    EXPECT_THROW(read_chain_export(empty), FormatError);
    std::istringstream garbage("{\"format\":\"something-else\"}\n");
    EXPECT_THROW(read_chain_export(garbage), FormatError);
    std::istringstream not_json("not json\n");
    EXPECT_THROW(read_chain_export(not_json), FormatError);
}

TEST(Registry, IdentityIsForLife)
{
    MinerRegistry r;
    const auto a = Address::from_label("a"), b = Address::from_label("b");
    EXPECT_FALSE(r.register_miner("alice", a, sha256("k")));
    EXPECT_EQ(r.register_miner("alice", b, sha256("k")), RegistrationError::DuplicateIdentity);
    EXPECT_EQ(r.register_miner("bob", a, sha256("k")), RegistrationError::DuplicateAddress);
    EXPECT_FALSE(r.ban(a));
    EXPECT_TRUE(r.is_banned(a));
    EXPECT_EQ(r.register_miner("alice", b, sha256("k")), RegistrationError::DuplicateIdentity);
    EXPECT_EQ(r.ban(Address::from_label("nobody")), BanError::UnknownAddress);
}
