#include "pwtl/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json_io.hpp"
#include "pwtl/error.hpp"

namespace pwtl {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

double angle_at(const Node& center, const Node& upstream, const Node& downstream) {
    const double ax = upstream.x - center.x;
    const double ay = upstream.y - center.y;
    const double bx = downstream.x - center.x;
    const double by = downstream.y - center.y;
    const double cross = ax * by - ay * bx;
    const double dot = ax * bx + ay * by;
    return std::abs(std::atan2(cross, dot)) * 180.0 / std::numbers::pi;
}

}  // namespace

int cell_count_for(double length_m) {
    const double cells = std::round(length_m / kTargetCellLength);
    return std::max(2, static_cast<int>(cells));
}

double turn_speed_factor(double angle_deg) {
    return (1.0 - std::cos(angle_deg * std::numbers::pi / 180.0)) / 2.0;
}

std::vector<Violation> validate(const NetworkData& data) {
    std::vector<Violation> out;
    auto flag = [&](const std::string& entity, std::string message) {
        out.push_back({entity, std::move(message)});
    };

    if (data.edges.empty()) {
        flag("", "network has no edges");
    }
    if (!finite_positive(data.default_rho_cr) || !finite_positive(data.default_a)) {
        flag("fd_defaults", "default rho_cr and a must be positive");
    }

    std::unordered_map<std::string, const Node*> nodes;
    for (const auto& n : data.nodes) {
        if (!nodes.emplace(n.id, &n).second) {
            flag(n.id, "duplicate node id");
        }
        if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
            flag(n.id, "node coordinates must be finite");
        }
    }

    std::unordered_map<std::string, const RoadEdge*> edges;
    for (const auto& e : data.edges) {
        if (!edges.emplace(e.id, &e).second) {
            flag(e.id, "duplicate edge id");
        }
        const bool has_from = nodes.contains(e.from);
        const bool has_to = nodes.contains(e.to);
        if (!has_from) {
            flag(e.id, "unknown from-node '" + e.from + "'");
        }
        if (!has_to) {
            flag(e.id, "unknown to-node '" + e.to + "'");
        }
        if (has_from && has_to) {
            const Node& a = *nodes.at(e.from);
            const Node& b = *nodes.at(e.to);
            if (e.from == e.to || (a.x == b.x && a.y == b.y)) {
                flag(e.id, "edge endpoints coincide");
            }
        }
        if (!finite_positive(e.length_m)) {
            flag(e.id, "length must be positive");
        } else {
            const double dx = e.length_m / cell_count_for(e.length_m);
            if (dx < kMinCellLength || dx > kMaxCellLength) {
                flag(e.id, "cell length " + std::to_string(dx) + " m outside [5, 20] m");
            }
        }
        if (e.lanes < 1) {
            flag(e.id, "lanes must be >= 1");
        }
        if (!finite_positive(e.free_flow_speed)) {
            flag(e.id, "free-flow speed must be positive");
        }
        if ((e.rho_cr && !finite_positive(*e.rho_cr)) || (e.a && !finite_positive(*e.a))) {
            flag(e.id, "fundamental-diagram override must be positive");
        }
        if (e.inflow_demand && !(std::isfinite(*e.inflow_demand) && *e.inflow_demand >= 0.0)) {
            flag(e.id, "inflow demand must be non-negative");
        }
    }

    std::set<std::string> seen_ids;
    std::unordered_map<std::string, std::string> incoming_owner;
    std::unordered_map<std::string, std::string> outgoing_owner;
    for (const auto& in : data.intersections) {
        if (!seen_ids.insert(in.id).second) {
            flag(in.id, "duplicate intersection id");
        }
        if (!nodes.contains(in.node)) {
            flag(in.id, "unknown node '" + in.node + "'");
        }
        const std::set<std::string> inc(in.incoming.begin(), in.incoming.end());
        const std::set<std::string> outg(in.outgoing.begin(), in.outgoing.end());
        if (inc.size() != in.incoming.size() || outg.size() != in.outgoing.size()) {
            flag(in.id, "duplicate edge in incoming/outgoing list");
        }
        for (const auto& id : in.incoming) {
            auto it = edges.find(id);
            if (it == edges.end()) {
                flag(in.id, "unknown incoming edge '" + id + "'");
                continue;
            }
            if (it->second->to != in.node) {
                flag(in.id, "incoming edge '" + id + "' does not end at node '" + in.node + "'");
            }
            if (!incoming_owner.emplace(id, in.id).second) {
                flag(in.id, "edge '" + id + "' is incoming at more than one intersection");
            }
        }
        for (const auto& id : in.outgoing) {
            auto it = edges.find(id);
            if (it == edges.end()) {
                flag(in.id, "unknown outgoing edge '" + id + "'");
                continue;
            }
            if (it->second->from != in.node) {
                flag(in.id, "outgoing edge '" + id + "' does not start at node '" + in.node + "'");
            }
            if (!outgoing_owner.emplace(id, in.id).second) {
                flag(in.id, "edge '" + id + "' is outgoing at more than one intersection");
            }
        }

        std::unordered_map<std::string, double> row_sum;
        for (const auto& tw : in.turn_weights) {
            if (!inc.contains(tw.from_edge) || !outg.contains(tw.to_edge)) {
                flag(in.id, "turn weight [" + tw.from_edge + ", " + tw.to_edge +
                                "] references an edge not listed at this intersection");
                continue;
            }
            if (!std::isfinite(tw.weight) || tw.weight < 0.0) {
                flag(in.id, "turn weight [" + tw.from_edge + ", " + tw.to_edge + "] must be >= 0");
                continue;
            }
            row_sum[tw.from_edge] += tw.weight;
        }
        for (const auto& [edge, sum] : row_sum) {
            if (!(sum > 0.0)) {
                flag(in.id, "turn weights of incoming edge '" + edge + "' sum to zero");
            }
        }

        if (in.signalized) {
            const std::set<std::string> a(in.group_a.begin(), in.group_a.end());
            const std::set<std::string> b(in.group_b.begin(), in.group_b.end());
            if (a.empty() || b.empty()) {
                flag(in.id, "signal groups A and B must both be non-empty");
            }
            std::vector<std::string> both;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
            if (!both.empty()) {
                flag(in.id, "signal groups overlap on '" + both.front() + "'");
            }
            std::set<std::string> cover = a;
            cover.insert(b.begin(), b.end());
            if (cover != inc) {
                flag(in.id, "signal groups must cover exactly the incoming edges");
            }
        } else if (!in.group_a.empty() || !in.group_b.empty()) {
            flag(in.id, "unsignalized intersection declares signal groups");
        }
    }
    return out;
}

RoadNetwork::RoadNetwork(NetworkData data) : data_(std::move(data)) {
    if (auto problems = validate(data_); !problems.empty()) {
        std::ostringstream msg;
        msg << "invalid network (" << problems.size() << " violation(s)):";
        for (const auto& v : problems) {
            msg << "\n  " << (v.entity.empty() ? "<network>" : v.entity) << ": " << v.message;
        }
        throw ValidationError(msg.str());
    }

    for (std::size_t i = 0; i < data_.nodes.size(); ++i) {
        node_by_id_.emplace(data_.nodes[i].id, i);
    }
    const std::size_t n_edges = data_.edges.size();
    cells_.resize(n_edges);
    cell_length_.resize(n_edges);
    fd_.resize(n_edges);
    upstream_.assign(n_edges, std::nullopt);
    downstream_.assign(n_edges, std::nullopt);
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = data_.edges[e];
        edge_by_id_.emplace(edge.id, e);
        cells_[e] = cell_count_for(edge.length_m);
        cell_length_[e] = edge.length_m / cells_[e];
        fd_[e] = {edge.free_flow_speed, edge.rho_cr.value_or(data_.default_rho_cr),
                  edge.a.value_or(data_.default_a)};
        total_cells_ += static_cast<std::size_t>(cells_[e]);
    }

    junctions_.reserve(data_.intersections.size());
    for (std::size_t j = 0; j < data_.intersections.size(); ++j) {
        const auto& in = data_.intersections[j];
        Junction junction;
        junction.intersection = j;
        junction.signalized = in.signalized;
        for (const auto& id : in.incoming) {
            junction.incoming.push_back(edge_by_id_.at(id));
            downstream_[junction.incoming.back()] = j;
            const bool in_b = std::find(in.group_b.begin(), in.group_b.end(), id) != in.group_b.end();
            junction.group.push_back(in_b ? SignalGroup::B : SignalGroup::A);
        }
        for (const auto& id : in.outgoing) {
            junction.outgoing.push_back(edge_by_id_.at(id));
            upstream_[junction.outgoing.back()] = j;
        }
        const std::size_t n_in = junction.incoming.size();
        const std::size_t n_out = junction.outgoing.size();
        junction.weight.assign(n_in * n_out, 0.0);
        junction.speed_factor.assign(n_in * n_out, 0.0);
        for (const auto& tw : in.turn_weights) {
            const auto r = static_cast<std::size_t>(
                std::find(in.incoming.begin(), in.incoming.end(), tw.from_edge) - in.incoming.begin());
            const auto c = static_cast<std::size_t>(
                std::find(in.outgoing.begin(), in.outgoing.end(), tw.to_edge) - in.outgoing.begin());
            junction.weight[r * n_out + c] += tw.weight;
        }
        const Node& center = node(in.node);
        for (std::size_t r = 0; r < n_in; ++r) {
            const Node& up = node(data_.edges[junction.incoming[r]].from);
            for (std::size_t c = 0; c < n_out; ++c) {
                const Node& down = node(data_.edges[junction.outgoing[c]].to);
                junction.speed_factor[r * n_out + c] = turn_speed_factor(angle_at(center, up, down));
            }
        }
        junctions_.push_back(std::move(junction));
    }

    std::vector<std::pair<std::string, std::size_t>> signalized;
    for (std::size_t j = 0; j < junctions_.size(); ++j) {
        if (junctions_[j].signalized) {
            signalized.emplace_back(data_.intersections[j].id, j);
        }
    }
    std::sort(signalized.begin(), signalized.end());
    for (auto& [id, j] : signalized) {
        signalized_ids_.push_back(id);
        signalized_junctions_.push_back(j);
    }
}

std::optional<std::size_t> RoadNetwork::find_edge(std::string_view id) const {
    auto it = edge_by_id_.find(std::string(id));
    if (it == edge_by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t RoadNetwork::edge_index(std::string_view id) const {
    if (auto e = find_edge(id)) {
        return *e;
    }
    throw std::out_of_range("unknown edge '" + std::string(id) + "'");
}

const Node& RoadNetwork::node(std::string_view id) const {
    auto it = node_by_id_.find(std::string(id));
    if (it == node_by_id_.end()) {
        throw std::out_of_range("unknown node '" + std::string(id) + "'");
    }
    return data_.nodes[it->second];
}

double RoadNetwork::max_free_flow_speed() const {
    double best = 0.0;
    for (const auto& e : data_.edges) {
        best = std::max(best, e.free_flow_speed);
    }
    return best;
}

RoadNetwork RoadNetwork::with_fd_defaults(double rho_cr, double a) const {
    NetworkData copy = data_;
    copy.default_rho_cr = rho_cr;
    copy.default_a = a;
    return RoadNetwork(std::move(copy));
}

double turn_angle(const RoadNetwork& net, std::string_view e_in, std::string_view e_out) {
    const auto& in = net.edge(net.edge_index(e_in));
    const auto& out = net.edge(net.edge_index(e_out));
    if (in.to != out.from) {
        throw std::invalid_argument("edges '" + in.id + "' and '" + out.id +
                                    "' do not meet at a common intersection");
    }
    return angle_at(net.node(in.to), net.node(in.from), net.node(out.to));
}

// --- file format -----------------------------------------------------------

namespace {

using detail::Json;
using detail::member;

std::string id_of(const Json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(ctx + ": missing field '" + key + "'");
    }
    const Json& v = obj.at(key);
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<long long>());
    }
    throw ParseError(ctx + ": field '" + key + "' must be a string or integer id");
}

std::vector<std::string> id_list(const Json& obj, const char* key, const std::string& ctx,
                                 bool required) {
    std::vector<std::string> out;
    if (!obj.contains(key)) {
        if (required) {
            throw ParseError(ctx + ": missing field '" + key + "'");
        }
        return out;
    }
    const Json& arr = obj.at(key);
    if (!arr.is_array()) {
        throw ParseError(ctx + ": field '" + key + "' must be an array");
    }
    for (const auto& v : arr) {
        if (v.is_string()) {
            out.push_back(v.get<std::string>());
        } else if (v.is_number_integer()) {
            out.push_back(std::to_string(v.get<long long>()));
        } else {
            throw ParseError(ctx + ": '" + key + "' entries must be ids");
        }
    }
    return out;
}

const Json& array_field(const Json& doc, const char* key, const std::string& ctx) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
        throw ParseError(ctx + ": missing array '" + key + "'");
    }
    return doc.at(key);
}

std::optional<double> optional_number(const Json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return std::nullopt;
    }
    return member<double>(obj, key, ctx);
}

}  // namespace

NetworkData read_network_data(const std::filesystem::path& path) {
    const Json doc = detail::read_json_file(path);
    const std::string file = path.string();
    if (!doc.is_object()) {
        throw ParseError(file + ": top level must be an object");
    }
    NetworkData data;
    if (doc.contains("fd_defaults")) {
        const auto& fd = doc.at("fd_defaults");
        data.default_rho_cr = member<double>(fd, "rho_cr", file + " fd_defaults");
        data.default_a = member<double>(fd, "a", file + " fd_defaults");
    }

    const auto& nodes = array_field(doc, "nodes", file);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string ctx = file + " nodes[" + std::to_string(i) + "]";
        data.nodes.push_back({id_of(nodes[i], "id", ctx), member<double>(nodes[i], "x", ctx),
                              member<double>(nodes[i], "y", ctx)});
    }

    const auto& edges = array_field(doc, "edges", file);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const std::string ctx = file + " edges[" + std::to_string(i) + "]";
        RoadEdge edge;
        edge.id = id_of(e, "id", ctx);
        edge.from = id_of(e, "from", ctx);
        edge.to = id_of(e, "to", ctx);
        edge.length_m = member<double>(e, "length_m", ctx);
        edge.lanes = member<int>(e, "lanes", ctx);
        edge.free_flow_speed = member<double>(e, "free_flow_speed_mps", ctx);
        edge.rho_cr = optional_number(e, "rho_cr", ctx);
        edge.a = optional_number(e, "a", ctx);
        edge.inflow_demand = optional_number(e, "inflow_cps", ctx);
        data.edges.push_back(std::move(edge));
    }

    if (doc.contains("intersections")) {
        const auto& inters = array_field(doc, "intersections", file);
        for (std::size_t i = 0; i < inters.size(); ++i) {
            const auto& j = inters[i];
            const std::string ctx = file + " intersections[" + std::to_string(i) + "]";
            Intersection in;
            in.id = id_of(j, "id", ctx);
            in.node = id_of(j, "node", ctx);
            in.incoming = id_list(j, "incoming", ctx, true);
            in.outgoing = id_list(j, "outgoing", ctx, true);
            if (j.contains("turn_weights")) {
                const auto& tws = j.at("turn_weights");
                if (!tws.is_array()) {
                    throw ParseError(ctx + ": 'turn_weights' must be an array");
                }
                for (const auto& tw : tws) {
                    if (!tw.is_array() || tw.size() != 3 || !tw[2].is_number()) {
                        throw ParseError(ctx + ": turn weight entries must be [e_in, e_out, weight]");
                    }
                    auto as_id = [&](const Json& v) {
                        if (v.is_string()) {
                            return v.get<std::string>();
                        }
                        if (v.is_number_integer()) {
                            return std::to_string(v.get<long long>());
                        }
                        throw ParseError(ctx + ": turn weight edge ids must be strings or integers");
                    };
                    in.turn_weights.push_back({as_id(tw[0]), as_id(tw[1]), tw[2].get<double>()});
                }
            }
            in.signalized = j.value("signalized", false);
            in.group_a = id_list(j, "group_a", ctx, false);
            in.group_b = id_list(j, "group_b", ctx, false);
            data.intersections.push_back(std::move(in));
        }
    }
    return data;
}

RoadNetwork load_network(const std::filesystem::path& path) {
    auto data = read_network_data(path);
    try {
        return RoadNetwork(std::move(data));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_network(const NetworkData& data, const std::filesystem::path& path) {
    Json doc;
    doc["fd_defaults"] = {{"rho_cr", data.default_rho_cr}, {"a", data.default_a}};
    Json nodes = Json::array();
    for (const auto& n : data.nodes) {
        nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
    }
    Json edges = Json::array();
    for (const auto& e : data.edges) {
        Json obj = {{"id", e.id},
                    {"from", e.from},
                    {"to", e.to},
                    {"length_m", e.length_m},
                    {"lanes", e.lanes},
                    {"free_flow_speed_mps", e.free_flow_speed}};
        if (e.rho_cr) {
            obj["rho_cr"] = *e.rho_cr;
        }
        if (e.a) {
            obj["a"] = *e.a;
        }
        if (e.inflow_demand) {
            obj["inflow_cps"] = *e.inflow_demand;
        }
        edges.push_back(std::move(obj));
    }
    Json inters = Json::array();
    for (const auto& in : data.intersections) {
        Json tws = Json::array();
        for (const auto& tw : in.turn_weights) {
            tws.push_back({tw.from_edge, tw.to_edge, tw.weight});
        }
        Json obj = {{"id", in.id},
                    {"node", in.node},
                    {"incoming", in.incoming},
                    {"outgoing", in.outgoing},
                    {"turn_weights", tws},
                    {"signalized", in.signalized}};
        if (in.signalized || !in.group_a.empty() || !in.group_b.empty()) {
            obj["group_a"] = in.group_a;
            obj["group_b"] = in.group_b;
        }
        inters.push_back(std::move(obj));
    }
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    doc["intersections"] = std::move(inters);
    detail::write_json_file(doc, path);
}

}  // namespace pwtl
