#include "pwtl/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json_io.hpp"
#include "pwtl/error.hpp"

namespace pwtl {

namespace {

constexpr double kPhaseRange = kMaxPhaseSeconds - kMinPhaseSeconds;

double clamp01(double v, std::size_t* clamped) {
    if (v < 0.0 || v > 1.0 || std::isnan(v)) {
        if (clamped != nullptr) {
            ++*clamped;
        }
        return std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    }
    return v;
}

}  // namespace

bool IntersectionSignal::valid() const {
    auto in_range = [](int d) { return d >= kMinPhaseSeconds && d <= kMaxPhaseSeconds; };
    return in_range(red) && in_range(green) && offset >= 0 && offset <= cycle() - 1;
}

GroupLights phase_at(const IntersectionSignal& sig, double t) {
    if (t < sig.offset) {
        return {Light::Red, Light::Green};
    }
    const double into_cycle = std::fmod(t - sig.offset, static_cast<double>(sig.cycle()));
    if (into_cycle < sig.green) {
        return {Light::Green, Light::Red};
    }
    return {Light::Red, Light::Green};
}

void check_config(const SignalConfiguration& cfg, const RoadNetwork& net) {
    const auto& ids = net.signalized_ids();
    for (const auto& id : ids) {
        auto it = cfg.find(id);
        if (it == cfg.end()) {
            throw ValidationError("signal configuration lacks intersection '" + id + "'");
        }
        if (!it->second.valid()) {
            throw ValidationError("signal configuration for '" + id + "' is out of range");
        }
    }
    for (const auto& [id, sig] : cfg) {
        if (!std::binary_search(ids.begin(), ids.end(), id)) {
            throw ValidationError("signal configuration names '" + id +
                                  "', which is not a signalized intersection");
        }
    }
}

PhaseState phases_at(const RoadNetwork& net, const SignalConfiguration& cfg, double t) {
    PhaseState phases = PhaseState::all_green(net);
    const auto& ids = net.signalized_ids();
    const auto& junctions = net.signalized_junctions();
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const auto lights = phase_at(cfg.at(ids[k]), t);
        const Junction& j = net.junctions()[junctions[k]];
        for (std::size_t r = 0; r < j.incoming.size(); ++r) {
            phases.set(j.incoming[r], j.group[r] == SignalGroup::A ? lights.group_a : lights.group_b);
        }
    }
    return phases;
}

IntersectionSignal sample_signal(Rng& rng) {
    IntersectionSignal sig;
    sig.red = static_cast<int>(rng.uniform_int(kMinPhaseSeconds, kMaxPhaseSeconds));
    sig.green = static_cast<int>(rng.uniform_int(kMinPhaseSeconds, kMaxPhaseSeconds));
    sig.offset = static_cast<int>(rng.uniform_int(0, sig.cycle() - 1));
    return sig;
}

SignalConfiguration sample_config(const RoadNetwork& net, Rng& rng) {
    if (net.signalized_ids().empty()) {
        throw std::invalid_argument("sample_config: network has no signalized intersection");
    }
    SignalConfiguration cfg;
    for (const auto& id : net.signalized_ids()) {
        cfg.emplace(id, sample_signal(rng));
    }
    return cfg;
}

std::vector<double> encode_signals(std::span<const IntersectionSignal> signals) {
    std::vector<double> x;
    x.reserve(3 * signals.size());
    for (const auto& s : signals) {
        x.push_back((s.red - kMinPhaseSeconds) / kPhaseRange);
        x.push_back((s.green - kMinPhaseSeconds) / kPhaseRange);
        x.push_back(static_cast<double>(s.offset) / (s.cycle() - 1));
    }
    return x;
}

std::vector<IntersectionSignal> ordered_signals(const SignalConfiguration& cfg,
                                                std::span<const std::string> ids) {
    std::vector<IntersectionSignal> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = cfg.find(id);
        if (it == cfg.end()) {
            throw ValidationError("signal configuration lacks intersection '" + id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

std::vector<double> encode(const SignalConfiguration& cfg, const RoadNetwork& net) {
    return encode_signals(ordered_signals(cfg, net.signalized_ids()));
}

std::vector<IntersectionSignal> decode_signals(std::span<const double> x, std::size_t* clamped) {
    if (x.size() % 3 != 0) {
        throw std::invalid_argument("decode: vector length must be a multiple of 3");
    }
    if (clamped != nullptr) {
        *clamped = 0;
    }
    std::vector<IntersectionSignal> out;
    out.reserve(x.size() / 3);
    for (std::size_t i = 0; i < x.size(); i += 3) {
        IntersectionSignal s;
        s.red = kMinPhaseSeconds + static_cast<int>(std::lround(clamp01(x[i], clamped) * kPhaseRange));
        s.green =
            kMinPhaseSeconds + static_cast<int>(std::lround(clamp01(x[i + 1], clamped) * kPhaseRange));
        s.offset = static_cast<int>(std::lround(clamp01(x[i + 2], clamped) * (s.cycle() - 1)));
        out.push_back(s);
    }
    return out;
}

SignalConfiguration decode(std::span<const double> x, const RoadNetwork& net, std::size_t* clamped) {
    const auto& ids = net.signalized_ids();
    if (x.size() != 3 * ids.size()) {
        throw std::invalid_argument("decode: expected " + std::to_string(3 * ids.size()) +
                                    " coordinates, got " + std::to_string(x.size()));
    }
    const auto signals = decode_signals(x, clamped);
    SignalConfiguration cfg;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        cfg.emplace(ids[k], signals[k]);
    }
    return cfg;
}

SignalConfiguration read_signal_config(const std::filesystem::path& path) {
    const auto doc = detail::read_json_file(path);
    const std::string file = path.string();
    if (!doc.is_object()) {
        throw ParseError(file + ": expected an object mapping intersection id -> schedule");
    }
    SignalConfiguration cfg;
    for (const auto& [id, entry] : doc.items()) {
        const std::string ctx = file + " '" + id + "'";
        IntersectionSignal sig{detail::member<int>(entry, "red", ctx),
                               detail::member<int>(entry, "green", ctx),
                               detail::member<int>(entry, "offset", ctx)};
        if (!sig.valid()) {
            throw ValidationError(ctx + ": red/green must be in [20, 54] and offset in [0, red+green-1]");
        }
        cfg.emplace(id, sig);
    }
    return cfg;
}

void write_signal_config(const SignalConfiguration& cfg, const std::filesystem::path& path) {
    detail::Json doc = detail::Json::object();
    for (const auto& [id, sig] : cfg) {
        doc[id] = {{"red", sig.red}, {"green", sig.green}, {"offset", sig.offset}};
    }
    detail::write_json_file(doc, path);
}

}  // namespace pwtl
