#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hepchain/io.hpp"
#include "hepchain/toy_work.hpp"

namespace hepchain {

namespace {

std::int64_t quantize(double x) { return std::llround(x / kDigestQuantum); }
double dequantize(std::int64_t q) { return static_cast<double>(q) * kDigestQuantum; }

void encode_track(ByteWriter& w, const TrackRecord& t)
{
    w.i64(quantize(t.a));
    w.i64(quantize(t.b));
    w.u64(t.adc_sum);
    w.u32(t.n_hits);
    w.u32(static_cast<std::uint32_t>(t.hits.size()));
    for (const auto& h : t.hits) {
        w.u32(h.layer);
        w.i64(quantize(h.u));
    }
}

void encode_config(ByteWriter& w, const ConfigResult& c)
{
    w.u32(c.config_index);
    w.u64(c.step_count);
    w.u32(static_cast<std::uint32_t>(c.tracks.size()));
    for (const auto& t : c.tracks) encode_track(w, t);
}

// Tracks in order of their quantized encoding, so the digest ignores order.
void encode_config_canonical(ByteWriter& w, const ConfigResult& c)
{
    std::vector<std::vector<std::uint8_t>> tracks;
    tracks.reserve(c.tracks.size());
    for (const auto& t : c.tracks) {
        ByteWriter tw;
        encode_track(tw, t);
        tracks.push_back(tw.take());
    }
    std::sort(tracks.begin(), tracks.end());
    w.u32(c.config_index);
    w.u64(c.step_count);
    w.u32(static_cast<std::uint32_t>(tracks.size()));
    for (const auto& t : tracks) w.bytes(t);
}

ConfigResult decode_config(ByteReader& r)
{
    ConfigResult c;
    c.config_index = r.u32();
    c.step_count = r.u64();
    std::uint32_t n_tracks = r.u32();
    c.tracks.reserve(n_tracks);
    for (std::uint32_t i = 0; i < n_tracks; ++i) {
        TrackRecord t;
        t.a = dequantize(r.i64());
        t.b = dequantize(r.i64());
        t.adc_sum = r.u64();
        t.n_hits = r.u32();
        std::uint32_t n_hits = r.u32();
        t.hits.reserve(n_hits);
        for (std::uint32_t k = 0; k < n_hits; ++k) {
            TrackHit h;
            h.layer = r.u32();
            h.u = dequantize(r.i64());
            t.hits.push_back(h);
        }
        c.tracks.push_back(std::move(t));
    }
    return c;
}

} // namespace

std::vector<std::uint8_t> encode_result(const SimulationResult& result)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(result.per_config.size()));
    for (const auto& c : result.per_config) encode_config(w, c);
    return w.take();
}

SimulationResult decode_result(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    SimulationResult result;
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) result.per_config.push_back(decode_config(r));
    if (!r.at_end()) throw std::invalid_argument("decode_result: trailing bytes");
    result.digest = canonical_digest(result);
    return result;
}

HashDigest canonical_digest(const SimulationResult& result)
{
    std::vector<const ConfigResult*> configs;
    for (const auto& c : result.per_config) configs.push_back(&c);
    std::stable_sort(configs.begin(), configs.end(),
                     [](const ConfigResult* x, const ConfigResult* y) { return x->config_index < y->config_index; });
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(configs.size()));
    for (const auto* c : configs) encode_config_canonical(w, *c);
    return sha256(w.data());
}

HashDigest config_digest(const ConfigResult& entry)
{
    ByteWriter w;
    encode_config_canonical(w, entry);
    return sha256(w.data());
}

nlohmann::json result_to_json(const SimulationResult& result)
{
    nlohmann::json configs = nlohmann::json::array();
    for (const auto& c : result.per_config) {
        nlohmann::json tracks = nlohmann::json::array();
        for (const auto& t : c.tracks) {
            nlohmann::json hits = nlohmann::json::array();
            for (const auto& h : t.hits) hits.push_back({h.layer, h.u});
            tracks.push_back({{"a", t.a}, {"b", t.b}, {"adc_sum", t.adc_sum}, {"n_hits", t.n_hits}, {"hits", hits}});
        }
        configs.push_back({{"config", c.config_index}, {"step_count", c.step_count}, {"tracks", tracks}});
    }
    return {{"digest", result.digest.to_hex()}, {"per_config", configs}};
}

SimulationResult result_from_json(const nlohmann::json& j)
{
    SimulationResult result;
    for (const auto& cj : j.at("per_config")) {
        ConfigResult c;
        c.config_index = cj.at("config").get<std::uint32_t>();
        c.step_count = cj.at("step_count").get<std::uint64_t>();
        for (const auto& tj : cj.at("tracks")) {
            TrackRecord t;
            t.a = tj.at("a").get<double>();
            t.b = tj.at("b").get<double>();
            t.adc_sum = tj.at("adc_sum").get<std::uint64_t>();
            t.n_hits = tj.at("n_hits").get<std::uint32_t>();
            for (const auto& hj : tj.at("hits")) t.hits.push_back({hj.at(0).get<std::uint32_t>(), hj.at(1).get<double>()});
            c.tracks.push_back(std::move(t));
        }
        result.per_config.push_back(std::move(c));
    }
    auto stated = HashDigest::from_hex(j.at("digest").get<std::string>());
    result.digest = canonical_digest(result);
    if (!stated || *stated != result.digest) throw FormatError("result digest does not match body");
    return result;
}

} // namespace hepchain
