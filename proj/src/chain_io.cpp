#include <istream>
#include <ostream>
#include <sstream>

#include "hepchain/io.hpp"

namespace hepchain {

namespace {

constexpr const char* kChainFormat = "hepchain-chain/1";

using nlohmann::json;

template <typename T>
T parse_hex(const json& j, const char* what)
{
    auto v = T::from_hex(j.get<std::string>());
    if (!v) throw FormatError(std::string("bad hex for ") + what);
    return *v;
}

} // namespace

json params_to_json(const SimulationParameters& p)
{
    json configs = json::array();
    for (const auto& c : p.configs)
        configs.push_back({{"index", c.index}, {"smear_sigma", c.smear_sigma}, {"split_scale", c.split_scale}});
    return {{"work_seed", p.work_seed}, {"n_events", p.n_events},  {"beam_energy", p.beam_energy},
            {"energy_cut", p.energy_cut}, {"n_layers", p.n_layers}, {"configs", configs}};
}

SimulationParameters params_from_json(const json& j)
{
    SimulationParameters p;
    p.work_seed = j.at("work_seed").get<std::uint64_t>();
    p.n_events = j.at("n_events").get<std::uint32_t>();
    p.beam_energy = j.at("beam_energy").get<double>();
    p.energy_cut = j.at("energy_cut").get<double>();
    p.n_layers = j.at("n_layers").get<std::uint32_t>();
    for (const auto& cj : j.at("configs"))
        p.configs.push_back({cj.at("index").get<std::uint32_t>(), cj.at("smear_sigma").get<double>(),
                             cj.at("split_scale").get<double>()});
    return p;
}

json block_to_json(const Block& b)
{
    json txs = json::array();
    for (const auto& tx : b.transactions)
        txs.push_back({{"from", tx.from.to_hex()},
                       {"to", tx.to.to_hex()},
                       {"amount", tx.amount},
                       {"nonce", tx.nonce},
                       {"auth_tag", tx.auth_tag.to_hex()}});
    return {{"number", b.number},
            {"timestamp", b.timestamp},
            {"prev_hash", b.prev_hash.to_hex()},
            {"transactions", txs},
            {"winner", b.winner.to_hex()},
            {"sim_params", params_to_json(b.sim_params)},
            {"sim_data_hash", b.sim_data_hash.to_hex()}};
}

Block block_from_json(const json& j)
{
    Block b;
    b.number = j.at("number").get<std::uint64_t>();
    b.timestamp = j.at("timestamp").get<std::uint64_t>();
    b.prev_hash = parse_hex<HashDigest>(j.at("prev_hash"), "prev_hash");
    for (const auto& tj : j.at("transactions")) {
        Transaction tx;
        tx.from = parse_hex<Address>(tj.at("from"), "from");
        tx.to = parse_hex<Address>(tj.at("to"), "to");
        tx.amount = tj.at("amount").get<std::uint64_t>();
        tx.nonce = tj.at("nonce").get<std::uint64_t>();
        tx.auth_tag = parse_hex<HashDigest>(tj.at("auth_tag"), "auth_tag");
        b.transactions.push_back(tx);
    }
    b.winner = parse_hex<Address>(j.at("winner"), "winner");
    b.sim_params = params_from_json(j.at("sim_params"));
    b.sim_data_hash = parse_hex<HashDigest>(j.at("sim_data_hash"), "sim_data_hash");
    return b;
}

void write_chain_export(std::ostream& os, const ChainState& state, const MinerRegistry& registry)
{
    json reg = json::array();
    for (const auto& [address, entry] : registry.entries())
        reg.push_back({{"address", address.to_hex()}, {"auth_key", entry.auth_key.to_hex()}, {"banned", entry.banned}});
    json header = {{"format", kChainFormat},
                   {"block_reward", state.rules.block_reward},
                   {"tx_cap", state.rules.tx_cap ? json(*state.rules.tx_cap) : json(nullptr)},
                   {"registry", reg}};
    os << header.dump() << '\n';
    for (const auto& b : state.blocks) os << block_to_json(b).dump() << '\n';
}

std::string chain_export_string(const ChainState& state, const MinerRegistry& registry)
{
    std::ostringstream os;
    write_chain_export(os, state, registry);
    return os.str();
}

ChainExport read_chain_export(std::istream& is)
{
    ChainExport out;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            if (!have_header) {
                if (j.value("format", "") != kChainFormat) throw FormatError("missing or unknown format header");
                out.rules.block_reward = j.at("block_reward").get<std::uint64_t>();
                if (!j.at("tx_cap").is_null()) out.rules.tx_cap = j.at("tx_cap").get<std::uint32_t>();
                for (const auto& e : j.at("registry")) {
                    auto address = parse_hex<Address>(e.at("address"), "registry address");
                    auto key = parse_hex<HashDigest>(e.at("auth_key"), "auth_key");
                    if (out.registry.register_miner(address.to_hex(), address, key))
                        throw FormatError("duplicate registry entry");
                    if (e.value("banned", false)) out.registry.ban(address);
                }
                have_header = true;
            } else {
                out.blocks.push_back(block_from_json(j));
            }
        } catch (const json::exception& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw FormatError("empty chain export");
    return out;
}

} // namespace hepchain
