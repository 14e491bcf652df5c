#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pwtl/network.hpp"
#include "pwtl/rng.hpp"

namespace pwtl {

inline constexpr int kMinPhaseSeconds = 20;
inline constexpr int kMaxPhaseSeconds = 54;

enum class Light : std::uint8_t { Green, Red };

/// Two-group fixed-time schedule of one intersection, in whole seconds.
///
/// Group A is red from t = 0 until `offset`, then alternates `green` seconds
/// of green and `red` seconds of red. Group B always shows the opposite
/// light; there is no all-red clearance.
struct IntersectionSignal {
    int red = kMinPhaseSeconds;
    int green = kMinPhaseSeconds;
    int offset = 0;

    int cycle() const { return red + green; }
    bool valid() const;
    friend bool operator==(const IntersectionSignal&, const IntersectionSignal&) = default;
};

struct GroupLights {
    Light group_a = Light::Green;
    Light group_b = Light::Red;
};

GroupLights phase_at(const IntersectionSignal& sig, double t);

/// Intersection id -> schedule, one entry per signalized intersection.
using SignalConfiguration = std::map<std::string, IntersectionSignal>;

/// Throws ValidationError unless cfg covers exactly the signalized
/// intersections of net with valid schedules.
void check_config(const SignalConfiguration& cfg, const RoadNetwork& net);

/// Light shown at the downstream end of every edge; edges without a signal
/// are always green.
class PhaseState {
public:
    PhaseState() = default;
    explicit PhaseState(std::size_t edge_count) : lights_(edge_count, Light::Green) {}

    Light at(std::size_t edge) const { return lights_[edge]; }
    bool red(std::size_t edge) const { return lights_[edge] == Light::Red; }
    void set(std::size_t edge, Light light) { lights_[edge] = light; }
    std::size_t size() const { return lights_.size(); }

    static PhaseState all_green(const RoadNetwork& net) { return PhaseState(net.edge_count()); }

private:
    std::vector<Light> lights_;
};

PhaseState phases_at(const RoadNetwork& net, const SignalConfiguration& cfg, double t);

/// Independent uniform draws: red, green on {20..54}, offset on
/// {0..red+green-1}, intersections in id order. Throws std::invalid_argument
/// when the network has no signalized intersection.
SignalConfiguration sample_config(const RoadNetwork& net, Rng& rng);
IntersectionSignal sample_signal(Rng& rng);

/// Three coordinates per intersection: (red-20)/34, (green-20)/34,
/// offset/(red+green-1).
std::vector<double> encode_signals(std::span<const IntersectionSignal> signals);
std::vector<double> encode(const SignalConfiguration& cfg, const RoadNetwork& net);

/// Inverse of encode on the integer lattice. Coordinates outside [0, 1] are
/// clamped and counted in `clamped`. Throws std::invalid_argument when the
/// length is not a multiple of 3 (or not 3K for the network overload).
std::vector<IntersectionSignal> decode_signals(std::span<const double> x, std::size_t* clamped = nullptr);
SignalConfiguration decode(std::span<const double> x, const RoadNetwork& net,
                           std::size_t* clamped = nullptr);

/// Signals in the canonical (sorted id) order.
std::vector<IntersectionSignal> ordered_signals(const SignalConfiguration& cfg,
                                                std::span<const std::string> ids);

SignalConfiguration read_signal_config(const std::filesystem::path& path);
void write_signal_config(const SignalConfiguration& cfg, const std::filesystem::path& path);

}  // namespace pwtl
