#include "hepchain/authority.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "hepchain/splitmix64.hpp"

namespace hepchain {

const char* to_string(DataError e)
{
    switch (e) {
    case DataError::Denied: return "Denied";
    case DataError::UnknownDigest: return "UnknownDigest";
    }
    return "?";
}

const char* to_string(IntakeError e)
{
    switch (e) {
    case IntakeError::Unregistered: return "Unregistered";
    case IntakeError::Banned: return "Banned";
    case IntakeError::Late: return "Late";
    case IntakeError::WrongParams: return "WrongParams";
    case IntakeError::DuplicateSubmission: return "DuplicateSubmission";
    case IntakeError::DigestMismatch: return "DigestMismatch";
    }
    return "?";
}

const char* to_string(TxError e)
{
    switch (e) {
    case TxError::UnknownSender: return "UnknownSender";
    case TxError::Banned: return "Banned";
    case TxError::BadAuthTag: return "BadAuthTag";
    case TxError::ZeroAmount: return "ZeroAmount";
    case TxError::BadNonce: return "BadNonce";
    case TxError::InsufficientFunds: return "InsufficientFunds";
    }
    return "?";
}

const char* to_string(BanReason r)
{
    switch (r) {
    case BanReason::WrongParams: return "WrongParams";
    case BanReason::FailedVerification: return "FailedVerification";
    case BanReason::Operator: return "Operator";
    }
    return "?";
}

std::variant<SimulationResult, DataError> DataStore::serve(const HashDigest& digest) const
{
    if (!serving_enabled) return DataError::Denied;
    auto it = entries.find(digest);
    if (it == entries.end()) return DataError::UnknownDigest;
    return it->second;
}

std::vector<Transaction> TxPool::drain()
{
    const std::size_t n = cap ? std::min<std::size_t>(*cap, pending.size()) : pending.size();
    std::vector<Transaction> out(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(n));
    pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

double adjust_difficulty(DifficultyController& controller, double observed_mean_steps)
{
    if (controller.target_cost > 0.0) {
        const double ratio = std::clamp(observed_mean_steps / controller.target_cost, 0.5, 2.0);
        controller.energy_cut *= ratio;
    }
    return controller.energy_cut;
}

SimulationParameters issue_parameters(const ChainState& chain, const DifficultyController& controller,
                                      const WorkTemplate& tmpl)
{
    SimulationParameters p;
    p.work_seed = derive_work_seed(chain.tip_hash, chain.height() + 1);
    p.n_events = tmpl.n_events;
    p.beam_energy = tmpl.beam_energy;
    p.energy_cut = controller.energy_cut;
    p.n_layers = tmpl.n_layers;
    p.configs = tmpl.configs;
    return p;
}

Address draw_winner(const std::vector<Address>& accepted, std::uint64_t work_seed, std::uint64_t height)
{
    if (accepted.empty()) throw std::invalid_argument("draw_winner: empty accepted set");
    SplitMix64 rng(stream_key(work_seed, height, 0x77696e6e6572ull));
    return accepted[rng.below(accepted.size())];
}

std::uint32_t draw_decoy_index(std::uint64_t secret_seed, std::uint64_t height, std::size_t config_count)
{
    SplitMix64 rng(stream_key(secret_seed, height, 0x6465636f79ull));
    return static_cast<std::uint32_t>(rng.below(config_count));
}

Authority::Authority(AuthorityConfig config, const HashDigest& root_key)
    : config_(std::move(config)), chain_(ChainState::genesis(config_.rules))
{
    validate_replication(config_.replication);
    store_.serving_enabled = config_.serve_data;
    pool_.cap = config_.rules.tx_cap;
    controller_.energy_cut = config_.initial_energy_cut;
    controller_.target_cost = config_.target_cost.value_or(0.0);
    registry_.register_miner("root-authority", root_address(), root_key);
}

std::optional<RegistrationError> Authority::register_miner(const std::string& real_id, const Address& address,
                                                           const HashDigest& auth_key)
{
    return registry_.register_miner(real_id, address, auth_key);
}

std::optional<BanError> Authority::ban_miner(const Address& address, BanReason reason)
{
    if (address == root_address()) return BanError::UnknownAddress;
    if (auto err = registry_.ban(address)) return err;
    ban_log_.push_back({address, reason, chain_.height()});
    return std::nullopt;
}

std::uint32_t Authority::strikes(const Address& a) const
{
    auto it = strikes_.find(a);
    return it == strikes_.end() ? 0 : it->second;
}

void Authority::strike(const Address& a, BanReason reason, std::vector<BanRecord>* sink)
{
    const auto n = ++strikes_[a];
    if (config_.ban_strikes == 0 || n < config_.ban_strikes || registry_.is_banned(a)) return;
    if (!ban_miner(a, reason) && sink) sink->push_back(ban_log_.back());
}

SimulationParameters Authority::next_parameters() const
{
    return issue_parameters(chain_, controller_, config_.work);
}

const RoundState& Authority::open_round(std::uint64_t start_tick)
{
    if (round_) throw std::logic_error("open_round: previous round still open");
    RoundState r;
    r.number = chain_.height() + 1;
    r.start_tick = start_tick;
    r.deadline = start_tick + config_.round_interval;
    r.params = next_parameters();
    validate_parameters(r.params);
    round_ = std::move(r);
    return *round_;
}

std::optional<IntakeError> Authority::accept_submission(Submission sub, std::uint64_t arrival_tick)
{
    const auto* entry = registry_.find(sub.miner);
    if (!entry || sub.miner == root_address()) return IntakeError::Unregistered;
    if (entry->banned) return IntakeError::Banned;
    if (!round_ || sub.block_number < round_->number || arrival_tick >= round_->deadline) return IntakeError::Late;
    if (sub.block_number != round_->number || sub.params_echo != round_->params) {
        strike(sub.miner, BanReason::WrongParams, nullptr);
        return IntakeError::WrongParams;
    }
    if (round_->submissions.contains(sub.miner)) return IntakeError::DuplicateSubmission;
    if (canonical_digest(sub.result) != sub.result.digest) return IntakeError::DigestMismatch;
    round_->submissions.emplace(sub.miner, std::move(sub));
    return std::nullopt;
}

std::uint64_t Authority::projected_balance(const Address& a) const
{
    std::uint64_t out = 0;
    for (const auto& tx : pool_.pending)
        if (tx.from == a) out += tx.amount;
    const auto bal = chain_.balance_of(a);
    return bal >= out ? bal - out : 0;
}

std::uint64_t Authority::projected_nonce(const Address& a) const
{
    auto n = chain_.nonce_of(a);
    for (const auto& tx : pool_.pending)
        if (tx.from == a) ++n;
    return n;
}

std::optional<TxError> Authority::submit_transaction(const Transaction& tx)
{
    const auto* entry = registry_.find(tx.from);
    if (!entry) return TxError::UnknownSender;
    if (entry->banned) return TxError::Banned;
    if (transaction_auth_tag(tx, entry->auth_key) != tx.auth_tag) return TxError::BadAuthTag;
    if (tx.amount < 1) return TxError::ZeroAmount;
    if (tx.nonce != projected_nonce(tx.from)) return TxError::BadNonce;
    if (tx.amount > projected_balance(tx.from)) return TxError::InsufficientFunds;
    pool_.push(tx);
    return std::nullopt;
}

Verdict Authority::run_stage(Strategy s, const std::vector<Submission>& subs, SimulationResult& authority_result)
{
    auto& r = *round_;
    switch (s) {
    case Strategy::Reference:
        if (!r.reference)
            r.reference = build_reference(r.params, config_.histogram_bins, config_.reference_smear_scale,
                                          config_.threads);
        return verify_reference_all(subs, *r.reference, config_.chi2_threshold);
    case Strategy::Decoy:
        if (!r.decoy) {
            const auto index = draw_decoy_index(config_.secret_seed, r.number, r.params.configs.size());
            r.decoy = DecoySpec{index, run_config(r.params, r.params.configs[index])};
        }
        return verify_decoy(subs, *r.decoy);
    case Strategy::Replication:
        return verify_replication(subs, config_.replication);
    case Strategy::AuthorityCompute: {
        authority_result = run_pipeline(r.params, config_.threads);
        Verdict v;
        v.strategy_used = Strategy::AuthorityCompute;
        v.accepted = {root_address()};
        v.winning_digest = authority_result.digest;
        return v;
    }
    }
    throw std::logic_error("unknown strategy");
}

RoundOutcome Authority::close_round(std::uint64_t tick)
{
    if (!round_) throw std::logic_error("close_round: no open round");
    RoundOutcome out;
    const auto& params = round_->params;
    const auto number = round_->number;

    std::vector<Submission> subs;
    for (const auto& [_, s] : round_->submissions) subs.push_back(s);
    out.submissions = subs.size();

    SimulationResult authority_result;
    Strategy stage = config_.strategy;
    for (;;) {
        Verdict v = run_stage(stage, subs, authority_result);
        // a decoy mismatch proves the result wrong: strike and drop it
        for (const auto& [miner, reason] : v.rejected)
            if (reason == RejectReason::DecoyMismatch) {
                strike(miner, BanReason::FailedVerification, &out.bans);
                std::erase_if(subs, [&](const Submission& s) { return s.miner == miner; });
            }
        out.stages.push_back(v);
        if (!v.empty()) break;
        stage = fallback_escalate(stage);
        ++out.escalation_depth;
    }
    out.verdict = out.stages.back();

    Block block;
    block.number = number;
    block.timestamp = tick;
    block.prev_hash = chain_.tip_hash;
    block.winner = draw_winner(out.verdict.accepted, params.work_seed, number);
    block.sim_params = params;
    block.sim_data_hash = *out.verdict.winning_digest;

    if (out.verdict.strategy_used == Strategy::AuthorityCompute)
        out.winning_result = std::move(authority_result);
    else
        out.winning_result = round_->submissions.at(block.winner).result;
    store_.store(out.winning_result);

    block.transactions = pool_.drain();
    out.deferred_transactions = pool_.size();

    if (auto report = validate_block(block, chain_, registry_); !report.ok())
        throw std::logic_error("authority assembled an invalid block: " + report.describe());
    apply_block_in_place(chain_, block);
    out.block = std::move(block);
    round_.reset();

    if (config_.target_cost) {
        window_steps_.push_back(static_cast<double>(out.winning_result.total_steps()));
        if (window_steps_.size() >= std::max<std::uint32_t>(1, config_.difficulty_window)) {
            const double mean = std::accumulate(window_steps_.begin(), window_steps_.end(), 0.0) /
                                static_cast<double>(window_steps_.size());
            adjust_difficulty(controller_, mean);
            window_steps_.clear();
        }
    }
    return out;
}

} // namespace hepchain
