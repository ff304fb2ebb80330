#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hepchain/hash.hpp"
#include "hepchain/params.hpp"
#include "hepchain/toy_work.hpp"

namespace hepchain {

enum class Strategy { Replication, Decoy, Reference, AuthorityCompute };

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view name);

struct Submission {
    Address miner;
    std::uint64_t block_number = 0;
    SimulationParameters params_echo;
    SimulationResult result;
};

enum class RejectReason {
    Minority,          ///< valid-looking but outside the winning cluster
    BelowQuorum,       ///< no cluster reached min_quorum
    DecoyMismatch,
    HistogramMismatch,
    KalmanMismatch,
    EmptySubmission,
};

const char* to_string(RejectReason r);

enum class VerdictFailure { NoSubmissions, NoQuorum, AllFiltered, NoneMatchReference };

const char* to_string(VerdictFailure f);

struct Verdict {
    Strategy strategy_used = Strategy::Replication;
    std::vector<Address> accepted; ///< sorted
    std::optional<HashDigest> winning_digest;
    std::vector<std::pair<Address, RejectReason>> rejected; ///< sorted by address
    std::optional<VerdictFailure> failure;

    bool empty() const { return accepted.empty(); }
    bool operator==(const Verdict&) const = default;
};

struct ReplicationConfig {
    std::uint32_t min_quorum = 2;
    std::uint32_t target_nresults = 2;
};

/// Throws std::invalid_argument unless 1 <= min_quorum <= target_nresults.
void validate_replication(const ReplicationConfig& cfg);

struct DecoySpec {
    std::uint32_t decoy_index = 0;
    ConfigResult decoy_result; ///< the authority's own run of that config
};

/// Most common digest wins; equal sizes go to the smallest digest.
Verdict verify_replication(std::span<const Submission> subs, const ReplicationConfig& cfg);

/// Drops every submission whose decoy config differs from the authority's,
/// then takes the most common full-result digest among the survivors.
Verdict verify_decoy(std::span<const Submission> subs, const DecoySpec& decoy);

// -- Kalman track validation ------------------------------------------------

struct Measurement {
    double x = 0.0;
    double u = 0.0;
};

struct KalmanConfig {
    double measurement_variance = 1e-4; ///< R, applied at every layer
    double process_variance = 0.0;      ///< Q, added to both state variances per step
    double initial_variance = 1e8;      ///< P0 diagonal
};

struct KalmanResult {
    double a = 0.0;
    double b = 0.0;
    std::array<double, 4> covariance{}; ///< row-major 2x2
    /// Sum of innovation^2 / S over all measurements after the first two,
    /// which only pin down the state under a diffuse prior.
    double chi2 = 0.0;
    /// Same sum including the first two terms.
    double chi2_total = 0.0;
    std::size_t dof = 0; ///< measurements - 2
};

/// Static-state linear Kalman filter for u = a + b x. Throws
/// std::invalid_argument for fewer than two measurements or R <= 0.
KalmanResult kalman_filter_track(std::span<const Measurement> hits, const KalmanConfig& cfg);

/// Measurement variance seen by the filter for one config: smearing plus
/// the uniform quantization of the strip pitch.
double config_measurement_variance(const ConfigFlag& config, double pitch = kPitch);

/// chi2 / dof of one track, or nothing when it has fewer than three hits.
std::optional<double> track_chi2_per_dof(const TrackRecord& track, const KalmanConfig& cfg);

/// Mean of track_chi2_per_dof over the tracks that have one.
std::optional<double> mean_track_chi2_per_dof(std::span<const TrackRecord> tracks, const KalmanConfig& cfg);

// -- Reference data ----------------------------------------------------------

inline constexpr std::uint32_t kDefaultHistogramBins = 16;
inline constexpr double kDefaultChi2Threshold = 3.0;

struct ReferenceConfigStats {
    std::vector<std::uint64_t> histogram;
    std::optional<double> mean_chi2_per_dof;
    double measurement_variance = 0.0;
    std::vector<TrackRecord> tracks; ///< the measured hit sequences
};

struct ReferenceDataset {
    std::uint32_t bins = kDefaultHistogramBins;
    std::vector<ReferenceConfigStats> per_config;
};

/// Slope counts in `bins` equal bins over [-1, 1]; out-of-range slopes land
/// in the edge bins.
std::vector<std::uint64_t> slope_histogram(std::span<const TrackRecord> tracks, std::uint32_t bins);

/// Sum_b (n_sim - n_ref)^2 / (n_sim + n_ref + 1), divided by the bin count.
double histogram_chi2_per_dof(std::span<const std::uint64_t> sim, std::span<const std::uint64_t> ref);

/// Seed of the independent trusted run that stands in for detector data.
std::uint64_t truth_seed(std::uint64_t work_seed);

/// Trusted oracle run of the round's parameters under truth_seed.
/// smear_scale != 1 widens the "real" detector resolution relative to the
/// nominal configs, modeling data that disagrees with the simulation.
ReferenceDataset build_reference(const SimulationParameters& params, std::uint32_t bins = kDefaultHistogramBins,
                                 double smear_scale = 1.0, unsigned threads = 1);

struct ReferenceCheck {
    bool accepted = false;
    std::optional<RejectReason> reason;
    double worst_histogram_chi2 = 0.0;
    double worst_kalman_ratio = 1.0; ///< furthest from 1 in log terms
};

/// Per config: the slope histogram must satisfy chi2/dof <= threshold and the
/// mean Kalman chi2/dof must lie within [1/threshold, threshold] times the
/// reference mean.
ReferenceCheck verify_reference(const Submission& sub, const ReferenceDataset& ref, double chi2_threshold);

/// verify_reference over all submissions, then clustering of the passers.
Verdict verify_reference_all(std::span<const Submission> subs, const ReferenceDataset& ref, double chi2_threshold);

/// Next strategy after one produced no accepted submission:
/// Reference -> Decoy -> Replication -> AuthorityCompute (terminal).
Strategy fallback_escalate(Strategy failed);

} // namespace hepchain
