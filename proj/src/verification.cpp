#include "hepchain/verification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hepchain/splitmix64.hpp"

namespace hepchain {

const char* to_string(Strategy s)
{
    switch (s) {
    case Strategy::Replication: return "replication";
    case Strategy::Decoy: return "decoy";
    case Strategy::Reference: return "reference";
    case Strategy::AuthorityCompute: return "authority";
    }
    return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view name)
{
    for (auto s : {Strategy::Replication, Strategy::Decoy, Strategy::Reference, Strategy::AuthorityCompute})
        if (name == to_string(s)) return s;
    return std::nullopt;
}

const char* to_string(RejectReason r)
{
    switch (r) {
    case RejectReason::Minority: return "Minority";
    case RejectReason::BelowQuorum: return "BelowQuorum";
    case RejectReason::DecoyMismatch: return "DecoyMismatch";
    case RejectReason::HistogramMismatch: return "HistogramMismatch";
    case RejectReason::KalmanMismatch: return "KalmanMismatch";
    case RejectReason::EmptySubmission: return "EmptySubmission";
    }
    return "?";
}

const char* to_string(VerdictFailure f)
{
    switch (f) {
    case VerdictFailure::NoSubmissions: return "NoSubmissions";
    case VerdictFailure::NoQuorum: return "NoQuorum";
    case VerdictFailure::AllFiltered: return "AllFiltered";
    case VerdictFailure::NoneMatchReference: return "NoneMatchReference";
    }
    return "?";
}

void validate_replication(const ReplicationConfig& cfg)
{
    if (cfg.min_quorum < 1) throw std::invalid_argument("min_quorum must be >= 1");
    if (cfg.target_nresults < cfg.min_quorum) throw std::invalid_argument("target_nresults must be >= min_quorum");
}

namespace {

struct Candidate {
    Address miner;
    HashDigest digest;
};

/// Largest digest group; ties go to the smallest digest.
std::optional<std::pair<HashDigest, std::size_t>> largest_cluster(std::span<const Candidate> candidates)
{
    std::map<HashDigest, std::size_t> sizes;
    for (const auto& c : candidates) ++sizes[c.digest];
    std::optional<std::pair<HashDigest, std::size_t>> best;
    for (const auto& [digest, n] : sizes)
        if (!best || n > best->second) best = {digest, n};
    return best;
}

void finish(Verdict& v)
{
    std::sort(v.accepted.begin(), v.accepted.end());
    std::sort(v.rejected.begin(), v.rejected.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
}

/// Accepts the largest cluster of `survivors`, marking the rest Minority.
void accept_cluster(Verdict& v, std::span<const Candidate> survivors, std::uint32_t min_quorum,
                    RejectReason below_quorum)
{
    auto best = largest_cluster(survivors);
    if (!best || best->second < min_quorum) {
        for (const auto& c : survivors) v.rejected.emplace_back(c.miner, below_quorum);
        return;
    }
    v.winning_digest = best->first;
    for (const auto& c : survivors) {
        if (c.digest == best->first)
            v.accepted.push_back(c.miner);
        else
            v.rejected.emplace_back(c.miner, RejectReason::Minority);
    }
}

} // namespace

Verdict verify_replication(std::span<const Submission> subs, const ReplicationConfig& cfg)
{
    Verdict v;
    v.strategy_used = Strategy::Replication;
    if (subs.empty()) {
        v.failure = VerdictFailure::NoSubmissions;
        return v;
    }
    std::vector<Candidate> all;
    for (const auto& s : subs) all.push_back({s.miner, s.result.digest});
    accept_cluster(v, all, cfg.min_quorum, RejectReason::BelowQuorum);
    if (v.accepted.empty()) v.failure = VerdictFailure::NoQuorum;
    finish(v);
    return v;
}

Verdict verify_decoy(std::span<const Submission> subs, const DecoySpec& decoy)
{
    Verdict v;
    v.strategy_used = Strategy::Decoy;
    if (subs.empty()) {
        v.failure = VerdictFailure::NoSubmissions;
        return v;
    }
    const HashDigest expected = config_digest(decoy.decoy_result);
    std::vector<Candidate> survivors;
    for (const auto& s : subs) {
        const auto& pc = s.result.per_config;
        auto it = std::find_if(pc.begin(), pc.end(),
                               [&](const ConfigResult& c) { return c.config_index == decoy.decoy_index; });
        if (it != pc.end() && config_digest(*it) == expected)
            survivors.push_back({s.miner, s.result.digest});
        else
            v.rejected.emplace_back(s.miner, RejectReason::DecoyMismatch);
    }
    accept_cluster(v, survivors, 1, RejectReason::BelowQuorum);
    if (v.accepted.empty()) v.failure = VerdictFailure::AllFiltered;
    finish(v);
    return v;
}

KalmanResult kalman_filter_track(std::span<const Measurement> hits, const KalmanConfig& cfg)
{
    if (hits.size() < 2) throw std::invalid_argument("kalman_filter_track: need at least two measurements");
    if (!(cfg.measurement_variance > 0.0)) throw std::invalid_argument("kalman_filter_track: R must be > 0");
    if (!(cfg.initial_variance > 0.0)) throw std::invalid_argument("kalman_filter_track: P0 must be > 0");

    const double R = cfg.measurement_variance;
    double s0 = 0.0, s1 = 0.0;
    double p00 = cfg.initial_variance, p01 = 0.0, p11 = cfg.initial_variance;

    KalmanResult out;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        const double x = hits[k].x;
        p00 += cfg.process_variance;
        p11 += cfg.process_variance;

        // H = [1, x]
        const double ph0 = p00 + p01 * x; // (P H^T)_0
        const double ph1 = p01 + p11 * x; // (P H^T)_1
        const double S = ph0 + ph1 * x + R;
        const double r = hits[k].u - (s0 + s1 * x);
        const double k0 = ph0 / S, k1 = ph1 / S;
        s0 += k0 * r;
        s1 += k1 * r;

        // Joseph form: P = (I - K H) P (I - K H)^T + K R K^T
        const double a00 = 1.0 - k0, a01 = -k0 * x;
        const double a10 = -k1, a11 = 1.0 - k1 * x;
        const double t00 = a00 * p00 + a01 * p01, t01 = a00 * p01 + a01 * p11;
        const double t10 = a10 * p00 + a11 * p01, t11 = a10 * p01 + a11 * p11;
        const double n00 = t00 * a00 + t01 * a01 + k0 * k0 * R;
        const double n01 = t00 * a10 + t01 * a11 + k0 * k1 * R;
        const double n11 = t10 * a10 + t11 * a11 + k1 * k1 * R;
        p00 = n00;
        p01 = n01;
        p11 = n11;

        const double term = r * r / S;
        out.chi2_total += term;
        if (k >= 2) out.chi2 += term;
    }
    out.a = s0;
    out.b = s1;
    out.covariance = {p00, p01, p01, p11};
    out.dof = hits.size() - 2;
    return out;
}

double config_measurement_variance(const ConfigFlag& config, double pitch)
{
    return config.smear_sigma * config.smear_sigma + pitch * pitch / 12.0;
}

std::optional<double> track_chi2_per_dof(const TrackRecord& track, const KalmanConfig& cfg)
{
    if (track.hits.size() < 3) return std::nullopt;
    std::vector<Measurement> m;
    m.reserve(track.hits.size());
    for (const auto& h : track.hits) m.push_back({plane_position(h.layer), h.u});
    auto res = kalman_filter_track(m, cfg);
    return res.chi2 / static_cast<double>(res.dof);
}

std::optional<double> mean_track_chi2_per_dof(std::span<const TrackRecord> tracks, const KalmanConfig& cfg)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : tracks)
        if (auto c = track_chi2_per_dof(t, cfg)) {
            sum += *c;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::vector<std::uint64_t> slope_histogram(std::span<const TrackRecord> tracks, std::uint32_t bins)
{
    std::vector<std::uint64_t> h(bins, 0);
    for (const auto& t : tracks) {
        const double pos = (t.b + 1.0) / 2.0 * bins;
        const auto bin = static_cast<std::int64_t>(std::floor(pos));
        h[static_cast<std::size_t>(std::clamp<std::int64_t>(bin, 0, bins - 1))]++;
    }
    return h;
}

double histogram_chi2_per_dof(std::span<const std::uint64_t> sim, std::span<const std::uint64_t> ref)
{
    if (sim.size() != ref.size() || sim.empty()) throw std::invalid_argument("histogram size mismatch");
    double sum = 0.0;
    for (std::size_t b = 0; b < sim.size(); ++b) {
        const double d = static_cast<double>(sim[b]) - static_cast<double>(ref[b]);
        sum += d * d / (static_cast<double>(sim[b]) + static_cast<double>(ref[b]) + 1.0);
    }
    return sum / static_cast<double>(sim.size());
}

std::uint64_t truth_seed(std::uint64_t work_seed) { return stream_key(work_seed, 0x7472757468ull, 0); }

ReferenceDataset build_reference(const SimulationParameters& params, std::uint32_t bins, double smear_scale,
                                 unsigned threads)
{
    SimulationParameters truth = params;
    truth.work_seed = truth_seed(params.work_seed);
    for (auto& c : truth.configs) c.smear_sigma *= smear_scale;
    const auto run = run_pipeline(truth, threads);

    ReferenceDataset ref;
    ref.bins = bins;
    for (std::size_t i = 0; i < params.configs.size(); ++i) {
        ReferenceConfigStats stats;
        stats.measurement_variance = config_measurement_variance(params.configs[i]);
        stats.tracks = run.per_config[i].tracks;
        stats.histogram = slope_histogram(stats.tracks, bins);
        stats.mean_chi2_per_dof = mean_track_chi2_per_dof(stats.tracks, {stats.measurement_variance});
        ref.per_config.push_back(std::move(stats));
    }
    return ref;
}

ReferenceCheck verify_reference(const Submission& sub, const ReferenceDataset& ref, double chi2_threshold)
{
    ReferenceCheck out;
    auto reject = [&](RejectReason r) {
        out.accepted = false;
        out.reason = r;
        return out;
    };
    if (sub.result.total_tracks() == 0) return reject(RejectReason::EmptySubmission);
    if (sub.result.per_config.size() != ref.per_config.size()) return reject(RejectReason::HistogramMismatch);

    for (std::size_t i = 0; i < ref.per_config.size(); ++i) {
        const auto& stats = ref.per_config[i];
        const auto& mine = sub.result.per_config[i];
        if (mine.config_index != i) return reject(RejectReason::HistogramMismatch);

        const double hist = histogram_chi2_per_dof(slope_histogram(mine.tracks, ref.bins), stats.histogram);
        out.worst_histogram_chi2 = std::max(out.worst_histogram_chi2, hist);
        if (hist > chi2_threshold) return reject(RejectReason::HistogramMismatch);

        const auto sim_mean = mean_track_chi2_per_dof(mine.tracks, {stats.measurement_variance});
        if (stats.mean_chi2_per_dof.has_value() != sim_mean.has_value()) return reject(RejectReason::KalmanMismatch);
        if (!sim_mean) continue;
        const double ratio = *stats.mean_chi2_per_dof > 0.0 ? *sim_mean / *stats.mean_chi2_per_dof
                             : *sim_mean == 0.0           ? 1.0
                                                          : INFINITY;
        if (std::abs(std::log(ratio)) > std::abs(std::log(out.worst_kalman_ratio))) out.worst_kalman_ratio = ratio;
        if (!(ratio >= 1.0 / chi2_threshold && ratio <= chi2_threshold)) return reject(RejectReason::KalmanMismatch);
    }
    out.accepted = true;
    return out;
}

Verdict verify_reference_all(std::span<const Submission> subs, const ReferenceDataset& ref, double chi2_threshold)
{
    Verdict v;
    v.strategy_used = Strategy::Reference;
    if (subs.empty()) {
        v.failure = VerdictFailure::NoSubmissions;
        return v;
    }
    std::vector<Candidate> passed;
    for (const auto& s : subs) {
        auto check = verify_reference(s, ref, chi2_threshold);
        if (check.accepted)
            passed.push_back({s.miner, s.result.digest});
        else
            v.rejected.emplace_back(s.miner, *check.reason);
    }
    accept_cluster(v, passed, 1, RejectReason::BelowQuorum);
    if (v.accepted.empty()) v.failure = VerdictFailure::NoneMatchReference;
    finish(v);
    return v;
}

Strategy fallback_escalate(Strategy failed)
{
    switch (failed) {
    case Strategy::Reference: return Strategy::Decoy;
    case Strategy::Decoy: return Strategy::Replication;
    case Strategy::Replication: return Strategy::AuthorityCompute;
    case Strategy::AuthorityCompute: return Strategy::AuthorityCompute;
    }
    return Strategy::AuthorityCompute;
}

} // namespace hepchain
