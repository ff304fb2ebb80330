#pragma once

#include <vector>

#include "hepchain/chain.hpp"
#include "hepchain/metrics.hpp"
#include "hepchain/registry.hpp"
#include "hepchain/scenario.hpp"

namespace hepchain {

struct RunOptions {
    /// toy_work parallelism; never changes any output.
    unsigned threads = 1;
};

struct RunResult {
    ChainState chain;
    MinerRegistry registry;
    std::vector<MetricsRecord> metrics;
    RunSummary summary;
};

/// Deterministic discrete-event run: events execute in (tick, sequence)
/// order. Throws ConfigError before simulating when cfg is invalid, and
/// std::logic_error if the replayed chain disagrees with the live state.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

} // namespace hepchain
