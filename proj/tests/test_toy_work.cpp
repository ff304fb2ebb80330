#include <gtest/gtest.h>

#include <map>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "hepchain/chain.hpp"
#include "hepchain/io.hpp"
#include "hepchain/splitmix64.hpp"
#include "hepchain/toy_work.hpp"

using namespace hepchain;

namespace {

SimulationParameters small_params(std::uint64_t seed)
{
    SimulationParameters p;
    p.work_seed = seed;
    p.n_events = 3;
    p.beam_energy = 10.0;
    p.energy_cut = 1.0;
    p.n_layers = 6;
    p.configs = {{0, 0.02, 8.0}};
    return p;
}

// Round-1 parameters of the bundled default scenario.
SimulationParameters default_round1()
{
    SimulationParameters p;
    p.work_seed = derive_work_seed(block_hash(make_genesis()), 1);
    p.n_events = 20;
    p.beam_energy = 10.0;
    p.energy_cut = 1.0;
    p.n_layers = 6;
    for (std::uint32_t i = 0; i < 4; ++i) p.configs.push_back({i, 0.02 + i * 0.005, 8.0});
    return p;
}

std::string read_fixture(const std::string& name)
{
    std::ifstream in(std::string(HEPCHAIN_SOURCE_DIR) + "/tests/fixtures/" + name);
    std::string line;
    std::getline(in, line);
    return line;
}

} // namespace

TEST(SplitMix64, ReferenceOutputs)
{
    SplitMix64 rng(0);
    EXPECT_EQ(rng(), 0xe220a8397b1dcdafull);
    EXPECT_EQ(rng(), 0x6e789e6aa1b965f4ull);
    EXPECT_EQ(rng(), 0x06c45d188009454full);
    EXPECT_EQ(stream_key(42, 1, 2), 0xf4269628263f4c12ull);
}

TEST(SplitMix64, DrawRanges)
{
    SplitMix64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double o = rng.open_unit();
        EXPECT_GT(o, 0.0);
        EXPECT_LT(o, 1.0);
        EXPECT_LT(rng.below(7), 7u);
    }
}

TEST(ToyWork, PrimariesMatchIndependentReference)
{
    const auto p = small_params(42);
    const auto prims = generate_events(p, p.configs[0]);
    const std::vector<Primary> expected{
        {0, 15.091710892258597, 0.30719356927697494},  {0, 6.407222884405264, -0.627290042307419},
        {1, 4.353966690845686, -0.05856990068179524},  {2, 1.055641348199908, -0.9683256290739033},
        {2, 11.92994993512218, -0.08460000547430346},  {2, 0.672900043268741, -0.38583467529900606},
    };
    ASSERT_EQ(prims.size(), expected.size());
    for (std::size_t i = 0; i < prims.size(); ++i) {
        EXPECT_EQ(prims[i].event, expected[i].event);
        EXPECT_NEAR(prims[i].energy, expected[i].energy, 1e-12);
        EXPECT_NEAR(prims[i].slope, expected[i].slope, 1e-15);
    }
}

TEST(ToyWork, TransportMatchesIndependentReference)
{
    const auto p = small_params(42);
    const auto prims = generate_events(p, p.configs[0]);
    const auto out = transport_and_respond(prims, p, p.configs[0]);
    EXPECT_EQ(out.step_count, 52u);
    ASSERT_EQ(out.hits.size(), 52u);
    EXPECT_EQ(out.hits.front().layer, 0u);
    EXPECT_NEAR(out.hits.front().u, 0.3116121221333624, 1e-12);
    EXPECT_NEAR(out.hits.front().e_dep, 1.5091710892258599, 1e-12);
    EXPECT_EQ(out.hits.back().layer, 3u);
    EXPECT_NEAR(out.hits.back().u, 0.26863391233024697, 1e-12);
    double su = 0, se = 0;
    for (const auto& h : out.hits) {
        su += h.u;
        se += h.e_dep;
    }
    EXPECT_NEAR(su, -4.16091397367662, 1e-9);
    EXPECT_NEAR(se, 16.693677014904914, 1e-9);
}

// Brute-force oracle, 100000 trials of one primary (E 8, cut 1, split 8,
// 3 layers): P(steps = 3..7) and mean 4.451580 (se 0.003807).
TEST(ToyWork, SmallTransportMatchesMonteCarloDistribution)
{
    auto p = small_params(0);
    p.n_layers = 3;
    const std::map<std::uint64_t, double> oracle{{3, 0.2914}, {4, 0.2366}, {5, 0.23951}, {6, 0.194}, {7, 0.03849}};
    const int n = 100000;
    std::map<std::uint64_t, int> counts;
    double total = 0.0;
    const std::vector<Primary> one{{0, 8.0, 0.0}};
    for (int t = 0; t < n; ++t) {
        p.work_seed = stream_key(99, t, 0);
        const auto steps = transport_and_respond(one, p, p.configs[0]).step_count;
        ++counts[steps];
        total += static_cast<double>(steps);
    }
    for (const auto& [steps, count] : counts) EXPECT_TRUE(oracle.count(steps)) << steps;
    for (const auto& [steps, prob] : oracle) {
        const double got = counts[steps] / double(n);
        const double sigma = std::sqrt(2.0 * prob * (1.0 - prob) / n);
        EXPECT_NEAR(got, prob, 3.0 * sigma) << steps;
    }
    EXPECT_NEAR(total / n, 4.451580, 3.0 * std::sqrt(2.0) * 0.003807);
}

TEST(ToyWork, NoHitOutsideDetector)
{
    auto p = small_params(3);
    p.n_events = 50;
    const auto out = transport_and_respond(generate_events(p, p.configs[0]), p, p.configs[0]);
    for (const auto& h : out.hits) {
        EXPECT_LT(h.layer, p.n_layers);
        EXPECT_GT(h.e_dep, 0.0);
    }
}

TEST(ToyWork, HigherCutTransportsLess)
{
    auto p = small_params(8);
    p.n_events = 40;
    std::uint64_t previous = ~0ull;
    for (double cut : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        p.energy_cut = cut;
        const auto steps = run_config(p, p.configs[0]).step_count;
        EXPECT_LE(steps, previous) << "cut " << cut;
        previous = steps;
    }
}

TEST(ToyWork, DigitizeQuantizes)
{
    std::vector<HitRecord> hits{{0, 0.01234, 0.26}, {1, -0.0049, 0.049}};
    const auto d = digitize(hits);
    EXPECT_NEAR(d[0].u_q, 0.01, 1e-15);
    EXPECT_EQ(d[0].adc, 5u);
    EXPECT_NEAR(d[1].u_q, 0.0, 1e-15);
    EXPECT_EQ(d[1].adc, 0u);
}

TEST(ToyWork, ReconstructsNoiselessStraightTracks)
{
    SimulationParameters p = small_params(0);
    p.configs[0].smear_sigma = 0.0;
    std::vector<DigiRecord> digis;
    for (double slope : {-0.4, 0.1, 0.6})
        for (std::uint32_t l = 0; l < p.n_layers; ++l)
            digis.push_back({l, std::round(slope * plane_position(l) / kPitch) * kPitch, 10});
    const auto tracks = reconstruct_tracks(digis, p, p.configs[0]);
    ASSERT_EQ(tracks.size(), 3u);
    // slopes on the pitch grid digitize without loss
    EXPECT_NEAR(tracks[0].b, -0.4, 1e-9);
    EXPECT_NEAR(tracks[1].b, 0.1, 1e-9);
    EXPECT_NEAR(tracks[2].b, 0.6, 1e-9);
    for (const auto& t : tracks) {
        EXPECT_NEAR(t.a, 0.0, 1e-9);
        EXPECT_EQ(t.n_hits, p.n_layers);
        EXPECT_EQ(t.adc_sum, 10u * p.n_layers);
    }
    EXPECT_TRUE(reconstruct_tracks({}, p, p.configs[0]).empty());
}

TEST(ToyWork, FitLineIsLeastSquares)
{
    TrackRecord t;
    t.hits = {{0, 1.0}, {1, 3.0}, {2, 5.0}, {3, 7.5}};
    fit_line(t);
    // x = 1..4, closed-form OLS
    EXPECT_NEAR(t.b, 2.15, 1e-12);
    EXPECT_NEAR(t.a, -1.25, 1e-12);
    EXPECT_EQ(t.n_hits, 4u);
}

TEST(ToyWork, PipelineIndependentOfThreadCount)
{
    const auto p = default_round1();
    const auto one = run_pipeline(p, 1);
    for (unsigned t : {2u, 3u, 8u}) EXPECT_EQ(run_pipeline(p, t), one) << t << " threads";
}

TEST(ToyWork, DifferentSeedsDifferentDigests)
{
    auto p = default_round1();
    const auto a = run_pipeline(p).digest;
    p.work_seed += 1;
    EXPECT_NE(run_pipeline(p).digest, a);
}

TEST(ToyWork, GoldenDigestForDefaultRound1)
{
    const auto r = run_pipeline(default_round1());
    EXPECT_EQ(r.digest.to_hex(), read_fixture("default_round1_digest.txt"));
}

TEST(ToyWork, DigestIgnoresOrderAndSubQuantumNoise)
{
    auto r = run_pipeline(default_round1());
    auto shuffled = r;
    std::reverse(shuffled.per_config.begin(), shuffled.per_config.end());
    for (auto& c : shuffled.per_config) std::reverse(c.tracks.begin(), c.tracks.end());
    EXPECT_EQ(canonical_digest(shuffled), r.digest);

    auto jittered = r;
    jittered.per_config[0].tracks[0].a += 1e-9;
    EXPECT_EQ(canonical_digest(jittered), r.digest);

    auto changed = r;
    changed.per_config[0].tracks[0].a += 1e-3;
    EXPECT_NE(canonical_digest(changed), r.digest);
    auto steps = r;
    steps.per_config[1].step_count += 1;
    EXPECT_NE(canonical_digest(steps), r.digest);
}

TEST(ToyWork, EncodeDecodeRoundTrip)
{
    const auto r = run_pipeline(default_round1());
    const auto bytes = encode_result(r);
    const auto back = decode_result(bytes);
    EXPECT_EQ(back.digest, r.digest);
    EXPECT_EQ(encode_result(back), bytes);

    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_ANY_THROW(decode_result(truncated));
    auto extra = bytes;
    extra.push_back(0);
    EXPECT_ANY_THROW(decode_result(extra));
}

TEST(ToyWork, ResultJsonRoundTripChecksDigest)
{
    const auto r = run_pipeline(default_round1());
    auto j = result_to_json(r);
    EXPECT_EQ(result_from_json(j).digest, r.digest);
    j["digest"] = sha256("other").to_hex();
    EXPECT_THROW(result_from_json(j), FormatError);
}

TEST(ToyWork, ConfigDigestSeesOnlyItsConfig)
{
    const auto r = run_pipeline(default_round1());
    EXPECT_NE(config_digest(r.per_config[0]), config_digest(r.per_config[1]));
    EXPECT_EQ(config_digest(r.per_config[2]), config_digest(run_config(default_round1(), default_round1().configs[2])));
}

TEST(ToyWork, ParameterValidation)
{
    auto p = default_round1();
    p.energy_cut = 0.0;
    EXPECT_THROW(run_pipeline(p), ParameterError);
    p = default_round1();
    p.configs.clear();
    EXPECT_THROW(run_pipeline(p), ParameterError);
    p = default_round1();
    p.configs[1].index = 3;
    EXPECT_THROW(run_pipeline(p), ParameterError);
    p = default_round1();
    p.n_layers = 1;
    EXPECT_THROW(run_pipeline(p), ParameterError);
}

// Brute-force Monte Carlo of the branching process, 200000 primaries,
// independent RNG: mean 10.653210, standard error 0.016398.
TEST(ToyWorkCost, ExpectationMatchesMonteCarlo)
{
    auto p = small_params(0);
    const double exact = expected_steps_per_primary(p, p.configs[0]);
    EXPECT_NEAR(exact, 10.653210, 4 * 0.016398);
}

TEST(ToyWorkCost, EstimateWithinTenPercentOfMeasuredMean)
{
    auto p = default_round1();
    const double estimate = estimate_cost(p);
    double total = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        p.work_seed = stream_key(17, s, 0);
        total += static_cast<double>(run_pipeline(p).total_steps());
    }
    const double measured = total / 200.0;
    EXPECT_NEAR(estimate / measured, 1.0, 0.10);
}

TEST(ToyWorkCost, EstimateDecreasesWithCut)
{
    auto p = default_round1();
    double previous = std::numeric_limits<double>::infinity();
    for (double cut : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        p.energy_cut = cut;
        const double c = estimate_cost(p);
        EXPECT_LT(c, previous);
        previous = c;
    }
    p.energy_cut = 100.0;
    EXPECT_LT(estimate_cost(p), 1.0);
}
