#include "hepchain/toy_work.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "hepchain/splitmix64.hpp"

namespace hepchain {

void validate_parameters(const SimulationParameters& params)
{
    if (!(params.beam_energy > 0.0)) throw ParameterError("beam_energy must be > 0");
    if (!(params.energy_cut > 0.0)) throw ParameterError("energy_cut must be > 0");
    if (params.n_layers < 2) throw ParameterError("n_layers must be >= 2");
    if (params.configs.empty()) throw ParameterError("at least one config is required");
    for (std::size_t i = 0; i < params.configs.size(); ++i) {
        const auto& c = params.configs[i];
        if (c.index != i) throw ParameterError("config indices must be 0..C-1 in order");
        if (!(c.smear_sigma >= 0.0)) throw ParameterError("smear_sigma must be >= 0");
        if (!(c.split_scale > 0.0)) throw ParameterError("split_scale must be > 0");
    }
}

void encode(ByteWriter& w, const SimulationParameters& params)
{
    w.u64(params.work_seed);
    w.u32(params.n_events);
    w.f64(params.beam_energy);
    w.f64(params.energy_cut);
    w.u32(params.n_layers);
    w.u32(static_cast<std::uint32_t>(params.configs.size()));
    for (const auto& c : params.configs) {
        w.u32(c.index);
        w.f64(c.smear_sigma);
        w.f64(c.split_scale);
    }
}

SimulationParameters decode_parameters(ByteReader& r)
{
    SimulationParameters p;
    p.work_seed = r.u64();
    p.n_events = r.u32();
    p.beam_energy = r.f64();
    p.energy_cut = r.f64();
    p.n_layers = r.u32();
    std::uint32_t n = r.u32();
    p.configs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        ConfigFlag c;
        c.index = r.u32();
        c.smear_sigma = r.f64();
        c.split_scale = r.f64();
        p.configs.push_back(c);
    }
    return p;
}

namespace {

SplitMix64 event_stream(const SimulationParameters& params, const ConfigFlag& config,
                        std::uint32_t event, StreamDomain domain)
{
    std::uint64_t lane = (std::uint64_t{config.index} << 2) | static_cast<std::uint64_t>(domain);
    return SplitMix64(stream_key(params.work_seed, lane, event));
}

struct Particle {
    double energy;
    double slope;
    std::uint32_t next_layer;
};

} // namespace

std::uint64_t SimulationResult::total_steps() const
{
    std::uint64_t n = 0;
    for (const auto& c : per_config) n += c.step_count;
    return n;
}

std::size_t SimulationResult::total_tracks() const
{
    std::size_t n = 0;
    for (const auto& c : per_config) n += c.tracks.size();
    return n;
}

std::vector<Primary> generate_events(const SimulationParameters& params, const ConfigFlag& config)
{
    std::vector<Primary> out;
    for (std::uint32_t ev = 0; ev < params.n_events; ++ev) {
        auto rng = event_stream(params, config, ev, StreamDomain::Generation);
        std::uint64_t count = 1 + rng() % 3;
        for (std::uint64_t i = 0; i < count; ++i) {
            Primary p;
            p.event = ev;
            p.energy = params.beam_energy * -std::log(rng.open_unit());
            p.slope = rng.uniform(-1.0, 1.0);
            out.push_back(p);
        }
    }
    return out;
}

TransportOutput transport_and_respond(std::span<const Primary> primaries,
                                      const SimulationParameters& params,
                                      const ConfigFlag& config)
{
    TransportOutput out;
    const std::uint32_t n_layers = params.n_layers;
    std::vector<Particle> stack;

    std::size_t i = 0;
    while (i < primaries.size()) {
        const std::uint32_t ev = primaries[i].event;
        auto rng = event_stream(params, config, ev, StreamDomain::Transport);

        for (; i < primaries.size() && primaries[i].event == ev; ++i) {
            stack.push_back({primaries[i].energy, primaries[i].slope, 0});
            while (!stack.empty()) {
                Particle p = stack.back();
                stack.pop_back();
                for (std::uint32_t layer = p.next_layer; layer < n_layers; ++layer) {
                    if (p.energy < params.energy_cut) break;
                    ++out.step_count;
                    const double x = plane_position(layer);
                    const double e_dep = kDepositFraction * p.energy;
                    const double noise = rng.normal();
                    out.hits.push_back({layer, p.slope * x + config.smear_sigma * noise, e_dep});
                    p.energy -= e_dep;
                    if (layer + 1 == n_layers) break;
                    const double split_p = p.energy / (p.energy + config.split_scale);
                    if (rng.bernoulli(split_p)) {
                        const double half = 0.5 * p.energy;
                        stack.push_back({half, p.slope + kChildSlopeKick, layer + 1});
                        stack.push_back({half, p.slope - kChildSlopeKick, layer + 1});
                        break;
                    }
                }
            }
        }
    }
    return out;
}

std::vector<DigiRecord> digitize(std::span<const HitRecord> hits, double pitch, double adc_gain)
{
    std::vector<DigiRecord> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        DigiRecord d;
        d.layer = h.layer;
        d.u_q = std::round(h.u / pitch) * pitch;
        d.adc = static_cast<std::uint64_t>(std::floor(h.e_dep / adc_gain));
        out.push_back(d);
    }
    return out;
}

void fit_line(TrackRecord& track)
{
    const auto n = static_cast<double>(track.hits.size());
    double sx = 0, su = 0;
    for (const auto& h : track.hits) {
        sx += plane_position(h.layer);
        su += h.u;
    }
    const double mx = sx / n, mu = su / n;
    double sxx = 0, sxu = 0;
    for (const auto& h : track.hits) {
        const double dx = plane_position(h.layer) - mx;
        sxx += dx * dx;
        sxu += dx * (h.u - mu);
    }
    track.b = sxx > 0 ? sxu / sxx : 0.0;
    track.a = mu - track.b * mx;
    track.n_hits = static_cast<std::uint32_t>(track.hits.size());
}

bool track_less(const TrackRecord& lhs, const TrackRecord& rhs)
{
    if (lhs.b != rhs.b) return lhs.b < rhs.b;
    if (lhs.a != rhs.a) return lhs.a < rhs.a;
    if (lhs.n_hits != rhs.n_hits) return lhs.n_hits < rhs.n_hits;
    if (lhs.adc_sum != rhs.adc_sum) return lhs.adc_sum < rhs.adc_sum;
    return std::lexicographical_compare(
        lhs.hits.begin(), lhs.hits.end(), rhs.hits.begin(), rhs.hits.end(),
        [](const TrackHit& x, const TrackHit& y) {
            return x.layer != y.layer ? x.layer < y.layer : x.u < y.u;
        });
}

std::vector<TrackRecord> reconstruct_tracks(std::span<const DigiRecord> digis,
                                            const SimulationParameters& params,
                                            const ConfigFlag& config, double pitch)
{
    struct Slot {
        DigiRecord digi;
        bool claimed = false;
    };
    std::vector<std::vector<Slot>> layers(params.n_layers);
    for (const auto& d : digis)
        if (d.layer < params.n_layers) layers[d.layer].push_back({d});
    for (auto& layer : layers)
        std::sort(layer.begin(), layer.end(), [](const Slot& x, const Slot& y) {
            return x.digi.u_q != y.digi.u_q ? x.digi.u_q < y.digi.u_q : x.digi.adc < y.digi.adc;
        });

    const double window = 3.0 * (config.smear_sigma + pitch);
    std::vector<TrackRecord> tracks;
    if (layers.empty()) return tracks;

    for (auto& seed : layers[0]) {
        if (seed.claimed) continue;
        seed.claimed = true;
        TrackRecord track;
        track.hits.push_back({seed.digi.layer, seed.digi.u_q});
        track.adc_sum = seed.digi.adc;

        for (std::uint32_t l = 1; l < params.n_layers; ++l) {
            const double x = plane_position(l);
            double predicted;
            if (track.hits.size() >= 2) {
                fit_line(track);
                predicted = track.a + track.b * x;
            } else {
                // single hit: extrapolate through the beam vertex at x = 0
                const auto& h = track.hits.front();
                predicted = h.u * x / plane_position(h.layer);
            }
            Slot* best = nullptr;
            double best_dist = std::numeric_limits<double>::infinity();
            for (auto& slot : layers[l]) {
                if (slot.claimed) continue;
                const double dist = std::abs(slot.digi.u_q - predicted);
                if (dist <= window && dist < best_dist) {
                    best = &slot;
                    best_dist = dist;
                }
            }
            if (!best) continue;
            best->claimed = true;
            track.hits.push_back({l, best->digi.u_q});
            track.adc_sum += best->digi.adc;
        }

        if (track.hits.size() < 2) continue;
        fit_line(track);
        tracks.push_back(std::move(track));
    }

    std::sort(tracks.begin(), tracks.end(), track_less);
    return tracks;
}

ConfigResult run_config(const SimulationParameters& params, const ConfigFlag& config)
{
    ConfigResult out;
    out.config_index = config.index;
    const auto primaries = generate_events(params, config);

    std::size_t begin = 0;
    while (begin < primaries.size()) {
        std::size_t end = begin;
        while (end < primaries.size() && primaries[end].event == primaries[begin].event) ++end;
        auto transported =
            transport_and_respond(std::span(primaries).subspan(begin, end - begin), params, config);
        out.step_count += transported.step_count;
        auto digis = digitize(transported.hits);
        auto tracks = reconstruct_tracks(digis, params, config);
        std::move(tracks.begin(), tracks.end(), std::back_inserter(out.tracks));
        begin = end;
    }
    std::sort(out.tracks.begin(), out.tracks.end(), track_less);
    return out;
}

SimulationResult run_pipeline(const SimulationParameters& params, unsigned threads)
{
    validate_parameters(params);
    SimulationResult result;
    result.per_config.resize(params.configs.size());

    const std::size_t n = params.configs.size();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) result.per_config[i] = run_config(params, params.configs[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;)
                    result.per_config[i] = run_config(params, params.configs[i]);
            });
    }
    canonicalize(result);
    return result;
}

void canonicalize(SimulationResult& result)
{
    std::sort(result.per_config.begin(), result.per_config.end(),
              [](const ConfigResult& x, const ConfigResult& y) { return x.config_index < y.config_index; });
    for (auto& c : result.per_config) std::sort(c.tracks.begin(), c.tracks.end(), track_less);
    result.digest = canonical_digest(result);
}

double expected_steps_per_primary(const SimulationParameters& params, const ConfigFlag& config)
{
    const std::uint32_t n = params.n_layers;
    const double cut = params.energy_cut;
    const double scale = config.split_scale;
    const double keep = 1.0 - kDepositFraction;

    // Expected crossings of a particle entering `layer` with `splits`
    // ancestors' halvings; its energy is e0 * keep^layer / 2^splits.
    std::vector<double> memo(static_cast<std::size_t>(n) * (n + 1));
    auto integrand = [&](double e0) {
        std::fill(memo.begin(), memo.end(), -1.0);
        auto f = [&](auto&& self, std::uint32_t layer, std::uint32_t splits) -> double {
            double& slot = memo[static_cast<std::size_t>(layer) * (n + 1) + splits];
            if (slot >= 0.0) return slot;
            const double e = e0 * std::pow(keep, layer) * std::ldexp(1.0, -static_cast<int>(splits));
            double v = 0.0;
            if (e >= cut) {
                v = 1.0;
                if (layer + 1 < n) {
                    const double after = keep * e;
                    const double p = after / (after + scale);
                    v += p * 2.0 * self(self, layer + 1, splits + 1) + (1.0 - p) * self(self, layer + 1, splits);
                }
            }
            slot = v;
            return v;
        };
        return f(f, 0, 0);
    };

    // E = beam * (-ln u), u uniform on (0,1): midpoint rule in u.
    constexpr int kNodes = 4000;
    double sum = 0.0;
    for (int k = 0; k < kNodes; ++k) {
        const double u = (k + 0.5) / kNodes;
        sum += integrand(params.beam_energy * -std::log(u));
    }
    return sum / kNodes;
}

double estimate_cost(const SimulationParameters& params)
{
    constexpr double kMeanPrimaries = 2.0;
    double per_event = 0.0;
    for (const auto& c : params.configs) per_event += kMeanPrimaries * expected_steps_per_primary(params, c);
    return static_cast<double>(params.n_events) * per_event;
}

} // namespace hepchain
