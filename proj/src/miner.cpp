#include "hepchain/miner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hepchain/splitmix64.hpp"

namespace hepchain {

const char* to_string(BehaviorKind k)
{
    switch (k) {
    case BehaviorKind::Honest: return "honest";
    case BehaviorKind::FabricateAll: return "fabricate_all";
    case BehaviorKind::PartialFabricate: return "partial_fabricate";
    case BehaviorKind::SybilColluder: return "sybil_colluder";
    case BehaviorKind::WrongParams: return "wrong_params";
    case BehaviorKind::ReferenceOracleCheat: return "reference_oracle_cheat";
    }
    return "?";
}

std::optional<BehaviorKind> behavior_from_string(std::string_view name)
{
    for (auto k : {BehaviorKind::Honest, BehaviorKind::FabricateAll, BehaviorKind::PartialFabricate,
                   BehaviorKind::SybilColluder, BehaviorKind::WrongParams, BehaviorKind::ReferenceOracleCheat})
        if (name == to_string(k)) return k;
    return std::nullopt;
}

const char* to_string(BlockRejection r)
{
    switch (r) {
    case BlockRejection::NotFromAuthority: return "NotFromAuthority";
    case BlockRejection::Stale: return "Stale";
    case BlockRejection::Gap: return "Gap";
    case BlockRejection::Invalid: return "Invalid";
    }
    return "?";
}

const SimulationResult& WorkOracle::pipeline(const SimulationParameters& params)
{
    if (!last_run_ || last_run_->first != params) last_run_.emplace(params, run_pipeline(params, threads_));
    return last_run_->second;
}

double WorkOracle::cost(const SimulationParameters& params)
{
    // the estimate does not depend on the seed
    SimulationParameters key = params;
    key.work_seed = 0;
    ByteWriter w;
    encode(w, key);
    auto [it, fresh] = costs_.try_emplace(w.take(), 0.0);
    if (fresh) it->second = estimate_cost(params);
    return it->second;
}

const ReferenceDataset& WorkOracle::reference(const SimulationParameters& params)
{
    if (!last_reference_ || last_reference_->first != params)
        last_reference_.emplace(params, build_reference(params, bins_, smear_scale_, threads_));
    return last_reference_->second;
}

std::uint64_t work_ticks(double cost, double speed)
{
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(cost / speed)));
}

namespace {

std::uint64_t policy_seed(const MinerNode& node)
{
    return node.behavior.group_id != 0 ? node.behavior.fabrication_seed : node.private_seed;
}

} // namespace

std::vector<bool> correct_configs(const MinerNode& node, const SimulationParameters& params)
{
    const std::size_t n = params.configs.size();
    std::vector<bool> mask(n, false);
    const std::size_t k = std::min<std::size_t>(node.behavior.k_correct, n);
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    SplitMix64 rng(stream_key(policy_seed(node), params.work_seed, 0x737562736574ull));
    // partial Fisher-Yates: the first k entries are a uniform k-subset
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
        mask[idx[i]] = true;
    }
    return mask;
}

SimulationResult fabricate_result(const SimulationParameters& params, std::uint64_t seed,
                                  const std::vector<bool>& mask, const SimulationResult* honest)
{
    SimulationResult out;
    for (std::size_t i = 0; i < params.configs.size(); ++i) {
        if (mask[i] && honest) {
            out.per_config.push_back(honest->per_config[i]);
            continue;
        }
        SplitMix64 rng(stream_key(seed, params.work_seed, i));
        ConfigResult c;
        c.config_index = static_cast<std::uint32_t>(i);
        const std::uint64_t n_tracks = params.n_events + rng.below(params.n_events + 1);
        for (std::uint64_t t = 0; t < n_tracks; ++t) {
            TrackRecord track;
            const double slope = rng.uniform(-1.0, 1.0);
            for (std::uint32_t l = 0; l < params.n_layers; ++l)
                track.hits.push_back({l, std::round(slope * plane_position(l) / kPitch) * kPitch});
            track.adc_sum = rng.below(1000);
            fit_line(track);
            c.tracks.push_back(std::move(track));
        }
        c.step_count = n_tracks * params.n_layers;
        out.per_config.push_back(std::move(c));
    }
    canonicalize(out);
    return out;
}

SimulationResult fit_to_reference(const SimulationParameters& params, const ReferenceDataset& ref,
                                  std::uint64_t seed)
{
    SimulationResult out;
    for (std::size_t i = 0; i < ref.per_config.size(); ++i) {
        const auto& pool = ref.per_config[i].tracks;
        SplitMix64 rng(stream_key(seed, params.work_seed, 0x1000 + i));
        ConfigResult c;
        c.config_index = static_cast<std::uint32_t>(i);
        for (std::size_t t = 0; t < pool.size(); ++t) {
            c.tracks.push_back(pool[rng.below(pool.size())]);
            c.step_count += c.tracks.back().n_hits;
        }
        out.per_config.push_back(std::move(c));
    }
    canonicalize(out);
    return out;
}

Submission compute_solution(const MinerNode& node, const SimulationParameters& params, std::uint64_t number,
                            WorkOracle& oracle)
{
    Submission sub;
    sub.miner = node.address;
    sub.block_number = number;
    sub.params_echo = params;
    const std::uint64_t seed = policy_seed(node);
    const std::vector<bool> none(params.configs.size(), false);

    switch (node.behavior.kind) {
    case BehaviorKind::Honest:
        sub.result = oracle.pipeline(params);
        break;
    case BehaviorKind::PartialFabricate: {
        auto mask = correct_configs(node, params);
        sub.result = fabricate_result(params, seed, mask, &oracle.pipeline(params));
        break;
    }
    case BehaviorKind::FabricateAll:
    case BehaviorKind::SybilColluder:
        sub.result = fabricate_result(params, seed, none, nullptr);
        break;
    case BehaviorKind::WrongParams: {
        sub.params_echo.energy_cut *= 1.5;
        sub.result = fabricate_result(sub.params_echo, seed, none, nullptr);
        break;
    }
    case BehaviorKind::ReferenceOracleCheat:
        sub.result = fit_to_reference(params, oracle.reference(params), seed);
        break;
    }
    return sub;
}

std::optional<ScheduledWork> on_params(const MinerNode& node, const SimulationParameters& params,
                                       std::uint64_t number, std::uint64_t now, std::uint64_t deadline,
                                       WorkOracle& oracle)
{
    if (node.offline) return std::nullopt;
    std::uint64_t ready = now + 1;
    switch (node.behavior.kind) {
    case BehaviorKind::Honest:
        ready = now + work_ticks(oracle.cost(params), node.compute_speed);
        break;
    case BehaviorKind::PartialFabricate: {
        const double share = std::min<double>(node.behavior.k_correct, params.configs.size()) /
                             static_cast<double>(params.configs.size());
        ready = now + work_ticks(oracle.cost(params) * share, node.compute_speed);
        break;
    }
    default:
        break;
    }
    if (ready >= deadline) return std::nullopt;
    return ScheduledWork{ready, compute_solution(node, params, number, oracle)};
}

std::optional<BlockRejection> on_block(MinerNode& node, const Block& block, const Address& sender,
                                       const MinerRegistry& registry)
{
    if (sender != root_address()) return BlockRejection::NotFromAuthority;
    const auto height = node.local_chain.height();
    if (block.number <= height) return BlockRejection::Stale;
    if (block.number > height + 1) return BlockRejection::Gap;
    if (!validate_block(block, node.local_chain, registry).ok()) return BlockRejection::Invalid;
    apply_block_in_place(node.local_chain, block);
    return std::nullopt;
}

} // namespace hepchain
