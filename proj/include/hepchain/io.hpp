#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hepchain/chain.hpp"
#include "hepchain/registry.hpp"
#include "hepchain/toy_work.hpp"

namespace hepchain {

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

nlohmann::json params_to_json(const SimulationParameters& params);
SimulationParameters params_from_json(const nlohmann::json& j);

nlohmann::json block_to_json(const Block& block);
Block block_from_json(const nlohmann::json& j);

/// Data-store export of a result. Import re-derives the digest and throws
/// if it differs from the stated one.
nlohmann::json result_to_json(const SimulationResult& result);
SimulationResult result_from_json(const nlohmann::json& j);

/// Contents of a chain export file.
struct ChainExport {
    ChainRules rules;
    MinerRegistry registry;
    std::vector<Block> blocks;
};

/// Line-delimited JSON: one header line (format tag, rules, registry
/// verification material) followed by one block per line, genesis first.
void write_chain_export(std::ostream& os, const ChainState& state, const MinerRegistry& registry);
std::string chain_export_string(const ChainState& state, const MinerRegistry& registry);
/// Throws FormatError on malformed input. Does not validate the chain.
ChainExport read_chain_export(std::istream& is);

} // namespace hepchain
