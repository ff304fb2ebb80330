#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hepchain/hash.hpp"

namespace hepchain {

/// One detector/physics configuration of the work unit.
struct ConfigFlag {
    std::uint32_t index = 0;
    double smear_sigma = 0.0; ///< detector resolution
    double split_scale = 1.0; ///< E0 in the split probability E / (E + E0)

    bool operator==(const ConfigFlag&) const = default;
};

/// The work definition issued by the authority for one block.
struct SimulationParameters {
    std::uint64_t work_seed = 0;
    std::uint32_t n_events = 0;
    double beam_energy = 0.0;
    double energy_cut = 0.0;
    std::uint32_t n_layers = 0;
    std::vector<ConfigFlag> configs;

    bool operator==(const SimulationParameters&) const = default;
};

class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Throws ParameterError naming the first violated invariant.
void validate_parameters(const SimulationParameters& params);

void encode(ByteWriter& w, const SimulationParameters& params);
SimulationParameters decode_parameters(ByteReader& r);

} // namespace hepchain
