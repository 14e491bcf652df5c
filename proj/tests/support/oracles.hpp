#pragma once

// Reference implementations written independently of the library code paths.
// They work from the raw network description and favour clarity over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pwtl/network.hpp"
#include "pwtl/signals.hpp"
#include "pwtl/solver.hpp"
#include "pwtl/state.hpp"

namespace pwtl::oracle {

inline double ideal_speed(double v_max, double rho_cr, double a, double rho) {
    return v_max * std::exp(-std::pow(rho / rho_cr, a) / a);
}

// Speed reduction factor for the movement in -> out, straight from the cosine
// of the angle between the rays node->in.from and node->out.to.
inline double turn_factor(const NetworkData& data, const Intersection& in, const RoadEdge& e_in,
                          const RoadEdge& e_out) {
    auto node = [&](const std::string& id) {
        return *std::find_if(data.nodes.begin(), data.nodes.end(), [&](const Node& n) { return n.id == id; });
    };
    const Node c = node(in.node);
    const Node u = node(e_in.from);
    const Node d = node(e_out.to);
    const double ax = u.x - c.x, ay = u.y - c.y, bx = d.x - c.x, by = d.y - c.y;
    const double cosine = (ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by));
    return (1.0 - cosine) / 2.0;
}

// Brute-force evaluation of the intersection coupling for every edge.
inline VirtualBoundary virtual_boundaries(const RoadNetwork& net, const SimState& state,
                                          const PhaseState& phases, const SimParams& params) {
    const NetworkData& data = net.data();
    auto idx = [&](const std::string& id) { return net.edge_index(id); };
    auto first = [&](const std::string& id) {
        return std::pair{state.edges[idx(id)].rho.front(), state.edges[idx(id)].v.front()};
    };
    auto last = [&](const std::string& id) {
        return std::pair{state.edges[idx(id)].rho.back(), state.edges[idx(id)].v.back()};
    };

    VirtualBoundary vb(data.edges.size());
    for (const RoadEdge& e : data.edges) {
        bool fed = false, drained = false;
        for (const Intersection& in : data.intersections) {
            fed |= std::find(in.outgoing.begin(), in.outgoing.end(), e.id) != in.outgoing.end();
            drained |= std::find(in.incoming.begin(), in.incoming.end(), e.id) != in.incoming.end();
        }
        const std::size_t k = idx(e.id);
        if (!fed) {
            const auto [rho, v] = first(e.id);
            vb[k].inflow = e.inflow_demand ? *e.inflow_demand : rho * v * e.lanes;
            vb[k].upstream_speed = v;
        }
        if (!drained) {
            vb[k].downstream_density = last(e.id).first;
        }
    }

    for (const Intersection& in : data.intersections) {
        std::map<std::pair<std::string, std::string>, double> w;
        for (const TurnWeight& t : in.turn_weights) {
            w[{t.from_edge, t.to_edge}] += t.weight;
        }
        auto weight = [&](const std::string& a, const std::string& b) {
            const auto it = w.find({a, b});
            return it == w.end() ? 0.0 : it->second;
        };
        auto edge = [&](const std::string& id) -> const RoadEdge& { return data.edges[idx(id)]; };

        for (const std::string& o : in.outgoing) {
            double q0 = 0.0, speed_flux = 0.0, limit_flux = 0.0;
            for (const std::string& i : in.incoming) {
                if (phases.red(idx(i))) continue;
                double total = 0.0;
                for (const std::string& o2 : in.outgoing) total += weight(i, o2);
                if (total <= 0.0) continue;
                const auto [rho, v] = last(i);
                const double part = rho * v * edge(i).lanes * weight(i, o) / total;
                q0 += part;
                speed_flux += v * part;
                limit_flux += edge(i).free_flow_speed * turn_factor(data, in, edge(i), edge(o)) * part;
            }
            const double v0 = q0 > 0.0 ? std::min(speed_flux, limit_flux) / q0 : first(o).second;
            vb[idx(o)].inflow = q0;
            vb[idx(o)].upstream_speed = std::clamp(v0, 0.0, edge(o).free_flow_speed);
        }

        for (const std::string& i : in.incoming) {
            double ghost = last(i).first;
            if (phases.red(idx(i))) {
                if (params.red_downstream == RedDownstream::JamDensity) ghost = params.rho_jam;
            } else {
                double num = 0.0, den = 0.0;
                for (const std::string& o : in.outgoing) {
                    const double r1 = first(o).first;
                    num += r1 * r1 * weight(i, o);
                    den += r1 * weight(i, o);
                }
                if (den > 0.0) ghost = num / den;
            }
            vb[idx(i)].downstream_density = std::clamp(ghost, params.rho_floor, params.rho_jam);
        }
    }
    return vb;
}

// Light of group A at time t, by walking the schedule second by second.
inline Light group_a_light(const IntersectionSignal& s, double t) {
    if (t < s.offset) return Light::Red;
    double clock = s.offset;
    while (true) {
        if (t < clock + s.green) return Light::Green;
        clock += s.green;
        if (t < clock + s.red) return Light::Red;
        clock += s.red;
    }
}

// Streaming mean (Welford); independent of the batch summation in aggregate().
struct RunningMean {
    double mean = 0.0;
    long long n = 0;
    void push(double x) {
        ++n;
        mean += (x - mean) / static_cast<double>(n);
    }
};

inline double total_cars(const RoadNetwork& net, const SimState& s) {
    double cars = 0.0;
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        for (const double rho : s.edges[e].rho) cars += rho * net.edge(e).lanes * net.cell_length(e);
    }
    return cars;
}

}  // namespace pwtl::oracle
