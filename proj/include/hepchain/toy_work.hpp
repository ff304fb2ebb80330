#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hepchain/hash.hpp"
#include "hepchain/params.hpp"

namespace hepchain {

// Frozen pipeline constants.
inline constexpr double kDepositFraction = 0.1;
inline constexpr double kChildSlopeKick = 0.05;
inline constexpr double kPitch = 0.01;
inline constexpr double kAdcGain = 0.05;
/// Floats are rounded to multiples of this before hashing.
inline constexpr double kDigestQuantum = 1e-6;

/// RNG stream domains under (work_seed, config, event).
enum class StreamDomain : std::uint64_t { Generation = 1, Transport = 2 };

struct Primary {
    std::uint32_t event = 0;
    double energy = 0.0;
    double slope = 0.0;

    bool operator==(const Primary&) const = default;
};

struct HitRecord {
    std::uint32_t layer = 0;
    double u = 0.0;
    double e_dep = 0.0;
};

struct DigiRecord {
    std::uint32_t layer = 0;
    double u_q = 0.0;
    std::uint64_t adc = 0;
};

/// A digitized measurement claimed by a track.
struct TrackHit {
    std::uint32_t layer = 0;
    double u = 0.0;

    bool operator==(const TrackHit&) const = default;
};

struct TrackRecord {
    double a = 0.0; ///< intercept
    double b = 0.0; ///< slope
    std::uint64_t adc_sum = 0;
    std::uint32_t n_hits = 0;
    std::vector<TrackHit> hits;

    bool operator==(const TrackRecord&) const = default;
};

struct ConfigResult {
    std::uint32_t config_index = 0;
    std::vector<TrackRecord> tracks;
    std::uint64_t step_count = 0;

    bool operator==(const ConfigResult&) const = default;
};

struct SimulationResult {
    std::vector<ConfigResult> per_config;
    HashDigest digest;

    bool operator==(const SimulationResult&) const = default;

    std::uint64_t total_steps() const;
    std::size_t total_tracks() const;
};

struct TransportOutput {
    std::vector<HitRecord> hits;
    std::uint64_t step_count = 0;
};

/// Detector plane of a layer index; planes sit at x = 1..n_layers.
inline double plane_position(std::uint32_t layer) { return static_cast<double>(layer) + 1.0; }

/// Primaries for every event of one config, in event order.
std::vector<Primary> generate_events(const SimulationParameters& params, const ConfigFlag& config);

/// Propagates primaries through the planes. Primaries of one event share
/// that event's transport stream and are processed depth first in order.
TransportOutput transport_and_respond(std::span<const Primary> primaries,
                                      const SimulationParameters& params,
                                      const ConfigFlag& config);

std::vector<DigiRecord> digitize(std::span<const HitRecord> hits, double pitch = kPitch,
                                 double adc_gain = kAdcGain);

/// Greedy layer-by-layer association followed by a least-squares line fit.
/// Output sorted by (b, a).
std::vector<TrackRecord> reconstruct_tracks(std::span<const DigiRecord> digis,
                                            const SimulationParameters& params,
                                            const ConfigFlag& config, double pitch = kPitch);

/// Ordinary least squares for u = a + b x over the track's hits.
void fit_line(TrackRecord& track);

/// All four stages for a single config.
ConfigResult run_config(const SimulationParameters& params, const ConfigFlag& config);

/// All configs; threads > 1 evaluates configs concurrently. Output is
/// independent of the thread count.
SimulationResult run_pipeline(const SimulationParameters& params, unsigned threads = 1);

/// Sorts configs by index and tracks by (b, a, ...) in place, then sets digest.
void canonicalize(SimulationResult& result);
/// Sorting order used for tracks in canonical form.
bool track_less(const TrackRecord& lhs, const TrackRecord& rhs);

/// SHA-256 of the quantized form with configs by index and tracks by their
/// encoded bytes; independent of input order.
HashDigest canonical_digest(const SimulationResult& result);
/// Digest of a single config entry; used by decoy comparison.
HashDigest config_digest(const ConfigResult& entry);

/// Quantized binary form in input order. decode_result inverts it up to
/// quantization, so the decoded result has the same digest.
std::vector<std::uint8_t> encode_result(const SimulationResult& result);
SimulationResult decode_result(std::span<const std::uint8_t> bytes);

/// Expected total step count of run_pipeline(params).
double estimate_cost(const SimulationParameters& params);
/// Expected step count contributed by one primary of one config, averaged
/// over the beam energy spectrum.
double expected_steps_per_primary(const SimulationParameters& params, const ConfigFlag& config);

} // namespace hepchain
