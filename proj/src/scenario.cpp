#include "hepchain/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace hepchain {

std::uint32_t ScenarioConfig::miner_count() const
{
    std::uint32_t n = 0;
    for (const auto& m : miners) n += m.count;
    return n;
}

std::vector<ConfigFlag> ScenarioConfig::config_flags() const
{
    std::vector<ConfigFlag> out;
    for (std::uint32_t i = 0; i < work.configs; ++i)
        out.push_back({i, work.smear_sigma + i * work.smear_step, work.split_scale + i * work.split_step});
    return out;
}

void validate(const ScenarioConfig& cfg)
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(cfg.rounds >= 1, "rounds must be >= 1");
    require(cfg.round_interval >= 2, "round_interval must be >= 2");
    require(cfg.block_reward >= 1, "block_reward must be >= 1");
    require(cfg.chi2_threshold >= 1.0, "reference.chi2_threshold must be >= 1");
    require(cfg.histogram_bins >= 1, "reference.histogram_bins must be >= 1");
    require(cfg.reference_smear_scale > 0.0, "reference.smear_scale must be > 0");
    require(cfg.work.configs >= 1, "work.configs must be >= 1");
    require(cfg.work.n_events >= 1, "work.n_events must be >= 1");
    require(cfg.difficulty.target_cost >= 0.0, "difficulty.target_cost must be >= 0");
    require(cfg.difficulty.window >= 1, "difficulty.window must be >= 1");
    require(cfg.transactions.amount >= 1, "transactions.amount must be >= 1");
    require(!cfg.transactions.cap || *cfg.transactions.cap >= 1, "transactions.cap must be >= 1");

    try {
        validate_replication(cfg.replication);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("replication: ") + e.what());
    }

    SimulationParameters probe;
    probe.n_events = cfg.work.n_events;
    probe.beam_energy = cfg.work.beam_energy;
    probe.energy_cut = cfg.work.energy_cut;
    probe.n_layers = cfg.work.n_layers;
    probe.configs = cfg.config_flags();
    try {
        validate_parameters(probe);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("work: ") + e.what());
    }

    for (const auto& m : cfg.miners) {
        require(m.speed > 0.0, "miners.speed must be > 0");
        if (m.behavior == BehaviorKind::PartialFabricate)
            require(m.k_correct <= cfg.work.configs, "miners.k_correct must be <= work.configs");
    }

    require(cfg.latency.drop_rate >= 0.0 && cfg.latency.drop_rate < 1.0, "latency.drop_rate must be in [0, 1)");
    for (const auto& p : cfg.latency.partitions) {
        require(p.start <= p.end, "latency.partitions: end before start");
        for (auto i : p.miners) require(i < cfg.miner_count(), "latency.partitions: miner index out of range");
    }
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError(path + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!node.IsMap()) fail(path.empty() ? "<root>" : path, "expected a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!ok.contains(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& path, T& out)
{
    const auto node = parent[key];
    if (!node) return;
    const std::string full = path.empty() ? key : path + "." + key;
    if (!node.IsScalar()) fail(full, "expected a scalar");
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!node.Scalar().empty() && node.Scalar()[0] == '-') fail(full, "must be non-negative");
    }
    try {
        out = node.as<T>();
    } catch (const YAML::Exception&) {
        fail(full, "bad value '" + node.Scalar() + "'");
    }
}

MinerGroupSpec parse_miner(const YAML::Node& node, const std::string& path)
{
    check_keys(node, path, {"behavior", "count", "speed", "offline", "group", "k_correct"});
    MinerGroupSpec m;
    std::string behavior = "honest";
    read(node, "behavior", path, behavior);
    auto kind = behavior_from_string(behavior);
    if (!kind) fail(path + ".behavior", "unknown behavior '" + behavior + "'");
    m.behavior = *kind;
    read(node, "count", path, m.count);
    read(node, "speed", path, m.speed);
    read(node, "offline", path, m.offline);
    read(node, "group", path, m.group);
    read(node, "k_correct", path, m.k_correct);
    return m;
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("syntax: ") + e.what());
    }
    ScenarioConfig cfg;
    if (root.IsNull()) {
        validate(cfg);
        return cfg;
    }
    check_keys(root, "",
               {"name", "seed", "rounds", "round_interval", "block_reward", "strategy", "replication", "reference",
                "ban_strikes", "serve_data", "work", "difficulty", "transactions", "latency", "audit", "miners"});
    read(root, "name", "", cfg.name);
    read(root, "seed", "", cfg.seed);
    read(root, "rounds", "", cfg.rounds);
    read(root, "round_interval", "", cfg.round_interval);
    read(root, "block_reward", "", cfg.block_reward);
    if (root["strategy"]) {
        std::string s;
        read(root, "strategy", "", s);
        auto strategy = strategy_from_string(s);
        if (!strategy) fail("strategy", "unknown strategy '" + s + "'");
        cfg.strategy = *strategy;
    }
    read(root, "ban_strikes", "", cfg.ban_strikes);
    read(root, "serve_data", "", cfg.serve_data);

    if (auto n = root["replication"]) {
        check_keys(n, "replication", {"min_quorum", "target_nresults"});
        read(n, "min_quorum", "replication", cfg.replication.min_quorum);
        read(n, "target_nresults", "replication", cfg.replication.target_nresults);
    }
    if (auto n = root["reference"]) {
        check_keys(n, "reference", {"chi2_threshold", "histogram_bins", "smear_scale"});
        read(n, "chi2_threshold", "reference", cfg.chi2_threshold);
        read(n, "histogram_bins", "reference", cfg.histogram_bins);
        read(n, "smear_scale", "reference", cfg.reference_smear_scale);
    }
    if (auto n = root["work"]) {
        check_keys(n, "work",
                   {"configs", "n_events", "beam_energy", "energy_cut", "n_layers", "smear_sigma", "smear_step",
                    "split_scale", "split_step"});
        auto& w = cfg.work;
        read(n, "configs", "work", w.configs);
        read(n, "n_events", "work", w.n_events);
        read(n, "beam_energy", "work", w.beam_energy);
        read(n, "energy_cut", "work", w.energy_cut);
        read(n, "n_layers", "work", w.n_layers);
        read(n, "smear_sigma", "work", w.smear_sigma);
        read(n, "smear_step", "work", w.smear_step);
        read(n, "split_scale", "work", w.split_scale);
        read(n, "split_step", "work", w.split_step);
    }
    if (auto n = root["difficulty"]) {
        check_keys(n, "difficulty", {"target_cost", "window"});
        read(n, "target_cost", "difficulty", cfg.difficulty.target_cost);
        read(n, "window", "difficulty", cfg.difficulty.window);
    }
    if (auto n = root["transactions"]) {
        check_keys(n, "transactions", {"cap", "per_round", "amount"});
        if (n["cap"]) {
            std::uint32_t cap = 0;
            read(n, "cap", "transactions", cap);
            cfg.transactions.cap = cap;
        }
        read(n, "per_round", "transactions", cfg.transactions.per_round);
        read(n, "amount", "transactions", cfg.transactions.amount);
    }
    if (auto n = root["latency"]) {
        check_keys(n, "latency", {"base", "jitter", "drop_rate", "partitions"});
        read(n, "base", "latency", cfg.latency.base);
        read(n, "jitter", "latency", cfg.latency.jitter);
        read(n, "drop_rate", "latency", cfg.latency.drop_rate);
        if (auto parts = n["partitions"]) {
            if (!parts.IsSequence()) fail("latency.partitions", "expected a list");
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const std::string path = "latency.partitions[" + std::to_string(i) + "]";
                const auto p = parts[i];
                check_keys(p, path, {"miners", "start", "end"});
                PartitionSpec spec;
                if (auto m = p["miners"]) {
                    if (!m.IsSequence()) fail(path + ".miners", "expected a list");
                    for (const auto& idx : m) {
                        try {
                            spec.miners.push_back(idx.as<std::uint32_t>());
                        } catch (const YAML::Exception&) {
                            fail(path + ".miners", "bad index");
                        }
                    }
                }
                read(p, "start", path, spec.start);
                read(p, "end", path, spec.end);
                cfg.latency.partitions.push_back(std::move(spec));
            }
        }
    }
    if (auto n = root["audit"]) {
        check_keys(n, "audit", {"balance_queries", "data_requests"});
        read(n, "balance_queries", "audit", cfg.audit.balance_queries);
        read(n, "data_requests", "audit", cfg.audit.data_requests);
    }
    if (auto n = root["miners"]) {
        if (!n.IsSequence()) fail("miners", "expected a list");
        for (std::size_t i = 0; i < n.size(); ++i)
            cfg.miners.push_back(parse_miner(n[i], "miners[" + std::to_string(i) + "]"));
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

} // namespace hepchain
