#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pwtl/fundamental.hpp"

namespace pwtl {

/// Target length of one road cell [m].
inline constexpr double kTargetCellLength = 10.0;
inline constexpr double kMinCellLength = 5.0;
inline constexpr double kMaxCellLength = 20.0;

struct Node {
    std::string id;
    double x = 0.0;  ///< [m]
    double y = 0.0;  ///< [m]

    friend bool operator==(const Node&, const Node&) = default;
};

/// One directed road. A two-way street is two RoadEdge entries.
struct RoadEdge {
    std::string id;
    std::string from;
    std::string to;
    double length_m = 0.0;
    int lanes = 1;
    double free_flow_speed = 0.0;        ///< v_max of this road [m/s]
    std::optional<double> rho_cr;        ///< overrides the network default
    std::optional<double> a;             ///< overrides the network default
    std::optional<double> inflow_demand; ///< constant entry demand [cars/s, all lanes]

    friend bool operator==(const RoadEdge&, const RoadEdge&) = default;
};

struct TurnWeight {
    std::string from_edge;
    std::string to_edge;
    double weight = 0.0;

    friend bool operator==(const TurnWeight&, const TurnWeight&) = default;
};

struct Intersection {
    std::string id;
    std::string node;
    std::vector<std::string> incoming;
    std::vector<std::string> outgoing;
    std::vector<TurnWeight> turn_weights;  ///< sparse; missing pairs weigh 0
    bool signalized = false;
    std::vector<std::string> group_a;
    std::vector<std::string> group_b;

    friend bool operator==(const Intersection&, const Intersection&) = default;
};

/// Raw network description as read from (or written to) a network file.
/// May be invalid; see validate().
struct NetworkData {
    std::vector<Node> nodes;
    std::vector<RoadEdge> edges;
    std::vector<Intersection> intersections;
    double default_rho_cr = kCalibratedFd.rho_cr;
    double default_a = kCalibratedFd.a;

    friend bool operator==(const NetworkData&, const NetworkData&) = default;
};

struct Violation {
    std::string entity;   ///< id of the offending node / edge / intersection
    std::string message;
};

/// Every invariant violation found in `data`; empty iff the data is valid.
std::vector<Violation> validate(const NetworkData& data);

/// max(2, round(length / 10 m)).
int cell_count_for(double length_m);

enum class SignalGroup : std::uint8_t { A, B };

/// Intersection compiled to edge indices for the solver.
struct Junction {
    std::size_t intersection = 0;        ///< index into intersections()
    std::vector<std::size_t> incoming;   ///< edge indices
    std::vector<std::size_t> outgoing;   ///< edge indices
    std::vector<double> weight;          ///< incoming x outgoing, row-major
    std::vector<double> speed_factor;    ///< (1 - cos(turn angle)) / 2, same layout
    std::vector<SignalGroup> group;      ///< per incoming edge (A when unsignalized)
    bool signalized = false;

    double w(std::size_t in, std::size_t out) const { return weight[in * outgoing.size() + out]; }
    double factor(std::size_t in, std::size_t out) const {
        return speed_factor[in * outgoing.size() + out];
    }
};

/// Validated, immutable road network with its discretisation.
///
/// Safe to share read-only between any number of concurrent simulations.
class RoadNetwork {
public:
    /// Throws ValidationError listing every violation.
    explicit RoadNetwork(NetworkData data);

    const NetworkData& data() const { return data_; }
    std::span<const Node> nodes() const { return data_.nodes; }
    std::span<const RoadEdge> edges() const { return data_.edges; }
    std::span<const Intersection> intersections() const { return data_.intersections; }
    std::span<const Junction> junctions() const { return junctions_; }

    std::size_t edge_count() const { return data_.edges.size(); }
    const RoadEdge& edge(std::size_t e) const { return data_.edges[e]; }
    std::optional<std::size_t> find_edge(std::string_view id) const;
    /// Throws std::out_of_range for an unknown id.
    std::size_t edge_index(std::string_view id) const;
    const Node& node(std::string_view id) const;

    int cell_count(std::size_t e) const { return cells_[e]; }
    double cell_length(std::size_t e) const { return cell_length_[e]; }
    std::size_t total_cells() const { return total_cells_; }
    /// Fundamental diagram of road e (v_max = its free-flow speed).
    const FdParams& fd(std::size_t e) const { return fd_[e]; }
    double max_free_flow_speed() const;

    /// Junction whose outgoing list contains e; empty for an entry road.
    std::optional<std::size_t> upstream_junction(std::size_t e) const { return upstream_[e]; }
    /// Junction whose incoming list contains e; empty for an exit road.
    std::optional<std::size_t> downstream_junction(std::size_t e) const { return downstream_[e]; }
    bool is_entry(std::size_t e) const { return !upstream_[e].has_value(); }
    bool is_exit(std::size_t e) const { return !downstream_[e].has_value(); }

    /// Signalized intersection ids, sorted; the canonical configuration order.
    const std::vector<std::string>& signalized_ids() const { return signalized_ids_; }
    /// Junction indices matching signalized_ids() element-wise.
    const std::vector<std::size_t>& signalized_junctions() const { return signalized_junctions_; }

    /// Copy with a different network-wide (rho_cr, a) default.
    RoadNetwork with_fd_defaults(double rho_cr, double a) const;

private:
    NetworkData data_;
    std::unordered_map<std::string, std::size_t> edge_by_id_;
    std::unordered_map<std::string, std::size_t> node_by_id_;
    std::vector<int> cells_;
    std::vector<double> cell_length_;
    std::vector<FdParams> fd_;
    std::vector<Junction> junctions_;
    std::vector<std::optional<std::size_t>> upstream_;
    std::vector<std::optional<std::size_t>> downstream_;
    std::vector<std::string> signalized_ids_;
    std::vector<std::size_t> signalized_junctions_;
    std::size_t total_cells_ = 0;
};

/// Parses a network file. Throws ParseError on malformed input.
NetworkData read_network_data(const std::filesystem::path& path);

/// read_network_data + validation. Throws ParseError or ValidationError.
RoadNetwork load_network(const std::filesystem::path& path);

void save_network(const NetworkData& data, const std::filesystem::path& path);

/// Angle in degrees, in [0, 180], between the ray from the shared node back
/// toward e_in's upstream node and the ray toward e_out's downstream node.
/// Straight through is 180, a U-turn is 0. Throws std::invalid_argument when
/// e_in does not end where e_out starts.
double turn_angle(const RoadNetwork& net, std::string_view e_in, std::string_view e_out);

/// (1 - cos(angle)) / 2: 0 for a U-turn, 0.5 at 90 degrees, 1 straight on.
double turn_speed_factor(double angle_deg);

}  // namespace pwtl
