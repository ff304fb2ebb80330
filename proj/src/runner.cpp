#include "hepchain/runner.hpp"

#include <queue>
#include <stdexcept>

#include "hepchain/authority.hpp"
#include "hepchain/miner.hpp"
#include "hepchain/network.hpp"
#include "hepchain/splitmix64.hpp"

namespace hepchain {

namespace {

constexpr std::uint64_t kNetworkStream = 0x6e6574;
constexpr std::uint64_t kSecretStream = 0x736563726574;
constexpr std::uint64_t kMinerStream = 0x6d696e6572;
constexpr std::uint64_t kGroupStream = 0x67726f7570;
constexpr std::uint64_t kTxStream = 0x7478;
constexpr int kFinalSyncAttempts = 64;

HashDigest derive_key(std::uint64_t seed, const std::string& label)
{
    ByteWriter w;
    w.u64(seed);
    w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
    return sha256(w.take());
}

enum class EventKind { RoundStart, RoundClose, Deliver, WorkReady };

struct Event {
    std::uint64_t tick = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::RoundStart;
    std::size_t node = 0;
    std::optional<MessageEnvelope> envelope;
    std::optional<Submission> submission;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const
    {
        return std::tie(a.tick, a.seq) > std::tie(b.tick, b.seq);
    }
};

struct SimNode {
    MinerNode miner;
    std::string klass;
    std::uint64_t sync_quiet_until = 0;
};

class Simulation {
  public:
    Simulation(const ScenarioConfig& cfg, const RunOptions& options)
        : cfg_(cfg),
          authority_(make_authority_config(cfg, options), derive_key(cfg.seed, "root-authority")),
          network_(make_latency(cfg), stream_key(cfg.seed, kNetworkStream, 0)),
          oracle_(options.threads, cfg.histogram_bins, cfg.reference_smear_scale),
          tx_rng_(stream_key(cfg.seed, kTxStream, 0))
    {
        build_roster();
    }

    RunResult run();

  private:
    static AuthorityConfig make_authority_config(const ScenarioConfig& cfg, const RunOptions& options);
    LatencyModel make_latency(const ScenarioConfig& cfg) const;
    void build_roster();

    void schedule(Event e)
    {
        e.seq = next_seq_++;
        queue_.push(std::move(e));
    }
    void send(const Address& from, const Address& to, Payload payload);
    void drain_until(std::optional<std::uint64_t> limit);

    void on_round_start(std::uint64_t round);
    void on_round_close(std::uint64_t round);
    void on_deliver(const MessageEnvelope& env);
    void on_authority_message(const MessageEnvelope& env);
    void on_miner_message(std::size_t i, const MessageEnvelope& env);
    void request_sync(std::size_t i);
    void inject_transactions();
    void final_sync();
    RunResult finish();

    const ScenarioConfig& cfg_;
    Authority authority_;
    Network network_;
    WorkOracle oracle_;
    SplitMix64 tx_rng_;
    std::vector<SimNode> nodes_;
    std::map<Address, std::size_t> index_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t now_ = 0;

    std::vector<MetricsRecord> rows_;
    RunSummary summary_;
    std::size_t bans_seen_ = 0;
};

AuthorityConfig Simulation::make_authority_config(const ScenarioConfig& cfg, const RunOptions& options)
{
    AuthorityConfig a;
    a.rules.block_reward = cfg.block_reward;
    a.rules.tx_cap = cfg.transactions.cap;
    a.strategy = cfg.strategy;
    a.replication = cfg.replication;
    a.chi2_threshold = cfg.chi2_threshold;
    a.histogram_bins = cfg.histogram_bins;
    a.reference_smear_scale = cfg.reference_smear_scale;
    a.ban_strikes = cfg.ban_strikes;
    a.serve_data = cfg.serve_data;
    a.round_interval = cfg.round_interval;
    a.work.n_events = cfg.work.n_events;
    a.work.beam_energy = cfg.work.beam_energy;
    a.work.n_layers = cfg.work.n_layers;
    a.work.configs = cfg.config_flags();
    a.initial_energy_cut = cfg.work.energy_cut;
    if (cfg.difficulty.target_cost > 0.0) a.target_cost = cfg.difficulty.target_cost;
    a.difficulty_window = cfg.difficulty.window;
    a.secret_seed = stream_key(cfg.seed, kSecretStream, 0);
    a.threads = options.threads;
    return a;
}

LatencyModel Simulation::make_latency(const ScenarioConfig& cfg) const
{
    LatencyModel m;
    m.base = cfg.latency.base;
    m.jitter = cfg.latency.jitter;
    m.drop_rate = cfg.latency.drop_rate;
    for (const auto& p : cfg.latency.partitions) {
        Partition part;
        part.start = p.start;
        part.end = p.end;
        for (auto i : p.miners) part.nodes.insert(Address::from_label("miner-" + std::to_string(i)));
        m.partitions.push_back(std::move(part));
    }
    m.validate();
    return m;
}

void Simulation::build_roster()
{
    std::size_t i = 0;
    for (const auto& spec : cfg_.miners) {
        for (std::uint32_t c = 0; c < spec.count; ++c, ++i) {
            const std::string label = "miner-" + std::to_string(i);
            SimNode n;
            n.klass = to_string(spec.behavior);
            n.miner.address = Address::from_label(label);
            n.miner.auth_key = derive_key(cfg_.seed, label);
            n.miner.behavior.kind = spec.behavior;
            n.miner.behavior.k_correct = spec.k_correct;
            n.miner.behavior.group_id = spec.group;
            n.miner.behavior.fabrication_seed = stream_key(cfg_.seed, kGroupStream, spec.group);
            n.miner.local_chain = ChainState::genesis(authority_.config().rules);
            n.miner.compute_speed = spec.speed;
            n.miner.private_seed = stream_key(cfg_.seed, kMinerStream, i);
            n.miner.offline = spec.offline;
            if (auto err = authority_.register_miner("identity-" + std::to_string(i), n.miner.address,
                                                     n.miner.auth_key))
                throw std::logic_error(std::string("roster registration failed: ") + to_string(*err));
            index_.emplace(n.miner.address, nodes_.size());
            ++summary_.classes[n.klass].miners;
            nodes_.push_back(std::move(n));
        }
    }
}

void Simulation::send(const Address& from, const Address& to, Payload payload)
{
    MessageEnvelope env{from, to, std::move(payload), now_, now_};
    if (network_.send(env).dropped) return;
    Event e;
    e.tick = env.deliver_tick;
    e.kind = EventKind::Deliver;
    e.envelope = std::move(env);
    schedule(std::move(e));
}

void Simulation::drain_until(std::optional<std::uint64_t> limit)
{
    while (!queue_.empty() && (!limit || queue_.top().tick <= *limit)) {
        Event e = queue_.top();
        queue_.pop();
        now_ = e.tick;
        switch (e.kind) {
        case EventKind::RoundStart: on_round_start(e.node); break;
        case EventKind::RoundClose: on_round_close(e.node); break;
        case EventKind::Deliver: on_deliver(*e.envelope); break;
        case EventKind::WorkReady:
            send(nodes_[e.node].miner.address, root_address(), SubmissionMsg{std::move(*e.submission)});
            break;
        }
    }
}

void Simulation::inject_transactions()
{
    const std::uint64_t amount = cfg_.transactions.amount;
    for (std::uint32_t j = 0; j < cfg_.transactions.per_round; ++j) {
        std::vector<std::size_t> senders;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& a = nodes_[i].miner.address;
            if (!authority_.registry().is_banned(a) && authority_.projected_balance(a) >= amount)
                senders.push_back(i);
        }
        if (senders.empty() || nodes_.size() < 2) return;
        const auto from = senders[tx_rng_.below(senders.size())];
        auto to = tx_rng_.below(nodes_.size() - 1);
        if (to >= from) ++to;
        const auto& m = nodes_[from].miner;
        const auto tx = make_transaction(m.address, nodes_[to].miner.address, amount,
                                         authority_.projected_nonce(m.address), m.auth_key);
        if (authority_.submit_transaction(tx))
            ++summary_.transactions_rejected;
        else
            ++summary_.transactions;
    }
}

void Simulation::on_round_start(std::uint64_t round)
{
    const auto& r = authority_.open_round(now_);
    if (r.number != round) throw std::logic_error("round numbering out of step with the chain");
    inject_transactions();
    for (const auto& n : nodes_) send(root_address(), n.miner.address, ParamsMsg{r.number, r.deadline, r.params});
    Event close;
    close.tick = r.deadline;
    close.kind = EventKind::RoundClose;
    close.node = round;
    schedule(std::move(close));
}

void Simulation::on_round_close(std::uint64_t round)
{
    const auto start = authority_.round()->start_tick;
    const auto deadline = authority_.round()->deadline;
    auto outcome = authority_.close_round(now_);
    const auto& block = outcome.block;
    if (block.number != round || block.timestamp != deadline) ++summary_.stalled_rounds;

    const auto& verdict = outcome.verdict;
    HashDigest truth = outcome.winning_result.digest;
    if (verdict.strategy_used != Strategy::AuthorityCompute) truth = oracle_.pipeline(block.sim_params).digest;

    MetricsRecord row;
    row.height = block.number;
    row.strategy = verdict.strategy_used;
    row.escalation_depth = outcome.escalation_depth;
    row.submissions = outcome.submissions;
    row.accepted = verdict.accepted.size();
    row.winner = block.winner;
    row.fabrication_accepted = block.sim_data_hash != truth;
    row.mean_step_count = static_cast<double>(outcome.winning_result.total_steps()) /
                          static_cast<double>(block.sim_params.configs.size());
    row.energy_cut = block.sim_params.energy_cut;
    row.round_ticks = now_ - start;
    row.tx_count = block.transactions.size();
    row.pool_deferred = outcome.deferred_transactions;
    row.bans = authority_.ban_log().size() - bans_seen_;
    bans_seen_ = authority_.ban_log().size();
    rows_.push_back(row);

    if (row.escalation_depth > 0) ++summary_.escalated_rounds;
    if (row.fabrication_accepted) ++summary_.fabrication_accepted_rounds;
    ++summary_.final_strategy_counts[to_string(row.strategy)];
    if (verdict.strategy_used != Strategy::AuthorityCompute && row.accepted >= cfg_.replication.target_nresults)
        ++summary_.units_completed;
    summary_.max_pool_deferred = std::max<std::uint64_t>(summary_.max_pool_deferred, row.pool_deferred);
    ++summary_.wins_by_miner[block.winner.to_hex()];

    for (const auto& stage : outcome.stages) {
        if (stage.strategy_used != Strategy::Decoy) continue;
        for (const auto& a : stage.accepted) {
            auto& c = summary_.classes[nodes_[index_.at(a)].klass];
            ++c.decoy_checked;
            ++c.decoy_passed;
        }
        for (const auto& [a, reason] : stage.rejected) {
            auto& c = summary_.classes[nodes_[index_.at(a)].klass];
            ++c.decoy_checked;
            if (reason != RejectReason::DecoyMismatch) ++c.decoy_passed;
        }
    }
    if (verdict.strategy_used != Strategy::AuthorityCompute) {
        for (const auto& a : verdict.accepted) ++summary_.classes[nodes_[index_.at(a)].klass].accepted;
        ++summary_.classes[nodes_[index_.at(block.winner)].klass].wins;
    }

    for (const auto& n : nodes_) send(root_address(), n.miner.address, BlockMsg{block});

    if (round < cfg_.rounds) {
        Event next;
        next.tick = now_;
        next.kind = EventKind::RoundStart;
        next.node = round + 1;
        schedule(std::move(next));
    }
}

void Simulation::on_deliver(const MessageEnvelope& env)
{
    if (env.to == root_address()) {
        on_authority_message(env);
        return;
    }
    const auto i = index_.at(env.to);
    if (nodes_[i].miner.offline) return;
    on_miner_message(i, env);
}

void Simulation::on_authority_message(const MessageEnvelope& env)
{
    const auto it = index_.find(env.from);
    if (it == index_.end()) return;
    auto& klass = summary_.classes[nodes_[it->second].klass];

    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, SubmissionMsg>) {
                ++klass.submissions;
                if (auto err = authority_.accept_submission(msg.submission, now_)) {
                    ++klass.intake_rejected;
                    ++klass.intake_errors[to_string(*err)];
                }
            } else if constexpr (std::is_same_v<T, BalanceQueryMsg>) {
                send(root_address(), env.from,
                     BalanceReplyMsg{msg.address, authority_.chain().height(),
                                     authority_.answer_balance_query(msg.address)});
            } else if constexpr (std::is_same_v<T, DataRequestMsg>) {
                DataReplyMsg reply;
                reply.digest = msg.digest;
                auto served = authority_.serve_data(msg.digest);
                if (auto* result = std::get_if<SimulationResult>(&served)) {
                    reply.result = *result;
                } else {
                    reply.status = std::get<DataError>(served) == DataError::Denied ? DataStatus::Denied
                                                                                     : DataStatus::UnknownDigest;
                }
                send(root_address(), env.from, std::move(reply));
            } else if constexpr (std::is_same_v<T, SyncRequestMsg>) {
                const auto& blocks = authority_.chain().blocks;
                SyncReplyMsg reply;
                for (auto h = msg.from_height; h < blocks.size(); ++h) reply.blocks.push_back(blocks[h]);
                send(root_address(), env.from, std::move(reply));
            }
        },
        env.payload);
}

void Simulation::request_sync(std::size_t i)
{
    auto& n = nodes_[i];
    if (now_ < n.sync_quiet_until) return;
    n.sync_quiet_until = now_ + 2 * (cfg_.latency.base + cfg_.latency.jitter) + 1;
    send(n.miner.address, root_address(), SyncRequestMsg{n.miner.local_chain.height() + 1});
}

void Simulation::on_miner_message(std::size_t i, const MessageEnvelope& env)
{
    auto& node = nodes_[i];
    auto& miner = node.miner;

    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ParamsMsg>) {
                if (env.from != root_address()) return;
                if (miner.local_chain.height() + 1 < msg.number) request_sync(i);
                if (auto work = on_params(miner, msg.params, msg.number, now_, msg.deadline, oracle_)) {
                    Event e;
                    e.tick = work->ready_tick;
                    e.kind = EventKind::WorkReady;
                    e.node = i;
                    e.submission = std::move(work->submission);
                    schedule(std::move(e));
                }
            } else if constexpr (std::is_same_v<T, BlockMsg>) {
                const auto rejected = on_block(miner, msg.block, env.from, authority_.registry());
                if (rejected == BlockRejection::Gap) request_sync(i);
                if (rejected) return;
                const auto h = msg.block.number;
                if ((h - 1) % nodes_.size() != i) return;
                if (cfg_.audit.balance_queries) {
                    ++summary_.audit.balance_queries;
                    send(miner.address, root_address(), BalanceQueryMsg{miner.address});
                }
                if (cfg_.audit.data_requests) {
                    ++summary_.audit.data_requests;
                    send(miner.address, root_address(), DataRequestMsg{msg.block.sim_data_hash});
                }
            } else if constexpr (std::is_same_v<T, SyncReplyMsg>) {
                for (const auto& b : msg.blocks) on_block(miner, b, env.from, authority_.registry());
            } else if constexpr (std::is_same_v<T, BalanceReplyMsg>) {
                if (msg.height != miner.local_chain.height()) return;
                ++summary_.audit.balance_checked;
                if (msg.balance != miner.local_chain.balance_of(msg.address)) ++summary_.audit.balance_mismatches;
            } else if constexpr (std::is_same_v<T, DataReplyMsg>) {
                if (msg.status == DataStatus::Denied) {
                    ++summary_.audit.data_denied;
                } else if (msg.status == DataStatus::Ok) {
                    ++summary_.audit.data_served;
                    if (canonical_digest(*msg.result) != msg.digest) ++summary_.audit.data_digest_mismatches;
                }
            }
        },
        env.payload);
}

void Simulation::final_sync()
{
    const auto& tip = authority_.chain().tip_hash;
    for (int attempt = 0; attempt < kFinalSyncAttempts; ++attempt) {
        bool pending = false;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& m = nodes_[i].miner;
            if (m.offline || m.local_chain.tip_hash == tip) continue;
            if (network_.model().partitioned(m.address, now_)) continue;
            pending = true;
            nodes_[i].sync_quiet_until = 0;
            request_sync(i);
        }
        if (!pending) return;
        drain_until(std::nullopt);
        ++now_;
    }
}

RunResult Simulation::finish()
{
    RunResult out;
    out.chain = authority_.chain();
    out.registry = authority_.registry();
    out.metrics = std::move(rows_);

    const auto replayed = replay_chain(out.chain.blocks, out.chain.rules, out.registry);
    if (!(replayed == out.chain)) throw std::logic_error("replayed chain differs from the live state");

    auto& s = summary_;
    s.scenario = cfg_.name;
    s.seed = cfg_.seed;
    s.rounds = cfg_.rounds;
    s.blocks = out.chain.height();
    s.block_reward = cfg_.block_reward;
    s.total_supply = out.chain.total_supply;
    s.replay_supply = replayed.total_supply;
    s.replay_matches = true;
    s.tip_hash = out.chain.tip_hash;
    for (const auto& [addr, entry] : out.registry.entries()) {
        if (!entry.banned) continue;
        s.banned.push_back(addr.to_hex());
        ++s.classes[nodes_[index_.at(addr)].klass].banned;
    }
    s.network.messages = network_.sent();
    s.network.dropped = network_.dropped();
    s.network.bytes = network_.bytes();
    for (const auto& [kind, bytes] : network_.bytes_by_kind()) s.network.bytes_by_kind[to_string(kind)] = bytes;
    for (const auto& n : nodes_) {
        if (n.miner.offline || network_.model().partitioned(n.miner.address, now_)) continue;
        ++s.live_nodes;
        if (n.miner.local_chain == out.chain) ++s.converged_nodes;
    }
    out.summary = std::move(s);
    return out;
}

RunResult Simulation::run()
{
    Event first;
    first.tick = 0;
    first.kind = EventKind::RoundStart;
    first.node = 1;
    schedule(std::move(first));
    drain_until(std::nullopt);
    final_sync();
    return finish();
}

} // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options)
{
    validate(cfg);
    Simulation sim(cfg, options);
    return sim.run();
}

} // namespace hepchain
