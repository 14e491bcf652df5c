#include "pwtl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"
#include "json_io.hpp"
#include "pwtl/error.hpp"
#include "pwtl/rng.hpp"

namespace pwtl {

namespace {

// Step counts are derived from floating-point ratios; absorb round-off.
constexpr double kStepEps = 1e-9;

std::int64_t steps_for(double seconds, double dt) {
    return static_cast<std::int64_t>(std::ceil(seconds / dt - kStepEps));
}

}  // namespace

void SimParams::validate() const {
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(relaxation_time) || !positive(anticipation) || !positive(density_guard) ||
        !positive(dt)) {
        throw std::invalid_argument("relaxation time, anticipation, density guard and dt must be positive");
    }
    if (!(rho_floor >= 0.0) || !(rho_floor < rho_jam) || !std::isfinite(rho_jam)) {
        throw std::invalid_argument("density bounds must satisfy 0 <= rho_floor < rho_jam");
    }
    if (!(init_noise >= 0.0 && init_noise < 1.0)) {
        throw std::invalid_argument("init_noise must be in [0, 1)");
    }
}

CflReport check_cfl(const RoadNetwork& net, double dt) {
    CflReport report;
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const double ratio = net.edge(e).free_flow_speed * dt / net.cell_length(e);
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (ratio > 1.0) {
            report.violations.push_back({net.edge(e).id, ratio});
        }
    }
    return report;
}

SimState initialize(const RoadNetwork& net, const ObservedSpeeds& observed, const SimParams& params,
                    std::optional<double> default_speed) {
    params.validate();
    Rng rng(params.seed);
    SimState state;
    state.edges.resize(net.edge_count());
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edge(e);
        double base = 0.0;
        if (auto it = observed.find(edge.id); it != observed.end()) {
            base = it->second;
        } else if (default_speed) {
            base = *default_speed;
        } else {
            throw ValidationError("no observed speed for edge '" + edge.id + "'");
        }
        if (!(base > 0.0) || !std::isfinite(base)) {
            throw ValidationError("observed speed for edge '" + edge.id + "' must be positive");
        }
        const FdParams& fd = net.fd(e);
        const auto n = static_cast<std::size_t>(net.cell_count(e));
        auto& cells = state.edges[e];
        cells.rho.resize(n);
        cells.v.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = params.init_noise > 0.0 ? rng.uniform(-params.init_noise, params.init_noise)
                                                     : 0.0;
            double speed = std::min(base * (1.0 + u), fd.v_max);
            speed = std::max(speed, 1e-9 * fd.v_max);
            cells.v[i] = speed;
            cells.rho[i] = std::clamp(invert_speed(fd, speed).density, params.rho_floor, params.rho_jam);
        }
    }
    return state;
}

SimState equilibrium_state(const RoadNetwork& net, double rho) {
    SimState state;
    state.edges.resize(net.edge_count());
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto n = static_cast<std::size_t>(net.cell_count(e));
        state.edges[e].rho.assign(n, rho);
        state.edges[e].v.assign(n, ideal_speed(net.fd(e), rho));
    }
    return state;
}

VirtualBoundary virtual_boundaries(const RoadNetwork& net, const SimState& state,
                                   const PhaseState& phases, const SimParams& params) {
    VirtualBoundary vb(net.edge_count());

    // Network boundary roads: zero-gradient ghosts.
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& cells = state.edges[e];
        if (net.is_entry(e)) {
            const auto& edge = net.edge(e);
            vb[e].inflow = edge.inflow_demand.value_or(cells.rho.front() * cells.v.front() * edge.lanes);
            vb[e].upstream_speed = cells.v.front();
        }
        if (net.is_exit(e)) {
            vb[e].downstream_density = cells.rho.back();
        }
    }

    for (const Junction& j : net.junctions()) {
        const std::size_t n_in = j.incoming.size();
        const std::size_t n_out = j.outgoing.size();

        // Outgoing roads: inflow flux and speed, turning limit as a cap.
        std::vector<double> row_sum(n_in, 0.0);
        std::vector<double> flux(n_in, 0.0);
        for (std::size_t r = 0; r < n_in; ++r) {
            const std::size_t e = j.incoming[r];
            if (phases.red(e)) {
                continue;  // red roads feed nobody
            }
            for (std::size_t c = 0; c < n_out; ++c) {
                row_sum[r] += j.w(r, c);
            }
            const auto& cells = state.edges[e];
            flux[r] = cells.rho.back() * cells.v.back() * net.edge(e).lanes;
        }
        for (std::size_t c = 0; c < n_out; ++c) {
            const std::size_t out = j.outgoing[c];
            double q0 = 0.0;
            double speed_flux = 0.0;
            double limit_flux = 0.0;
            for (std::size_t r = 0; r < n_in; ++r) {
                if (row_sum[r] <= 0.0) {
                    continue;
                }
                const std::size_t e = j.incoming[r];
                const double part = flux[r] * j.w(r, c) / row_sum[r];
                q0 += part;
                speed_flux += state.edges[e].v.back() * part;
                limit_flux += net.edge(e).free_flow_speed * j.factor(r, c) * part;
            }
            double v0 = q0 > 0.0 ? std::min(speed_flux, limit_flux) / q0 : state.edges[out].v.front();
            vb[out].inflow = q0;
            vb[out].upstream_speed = std::clamp(v0, 0.0, net.edge(out).free_flow_speed);
        }

        // Incoming roads: downstream ghost density.
        for (std::size_t r = 0; r < n_in; ++r) {
            const std::size_t e = j.incoming[r];
            const auto& cells = state.edges[e];
            double ghost = cells.rho.back();
            if (phases.red(e)) {
                if (params.red_downstream == RedDownstream::JamDensity) {
                    ghost = params.rho_jam;
                }
            } else {
                double num = 0.0;
                double den = 0.0;
                for (std::size_t c = 0; c < n_out; ++c) {
                    const double rho1 = state.edges[j.outgoing[c]].rho.front();
                    num += rho1 * rho1 * j.w(r, c);
                    den += rho1 * j.w(r, c);
                }
                if (den > 0.0) {
                    ghost = num / den;
                }
            }
            vb[e].downstream_density = std::clamp(ghost, params.rho_floor, params.rho_jam);
        }
    }
    return vb;
}

void step_into(const RoadNetwork& net, const SimState& state, const VirtualBoundary& vb,
               const PhaseState& phases, const SimParams& params, SimState& next) {
    const double dt = params.dt;
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edge(e);
        const FdParams& fd = net.fd(e);
        const double dx = net.cell_length(e);
        const double lanes = edge.lanes;
        const auto& cur = state.edges[e];
        auto& nxt = next.edges[e];
        const std::size_t n = cur.rho.size();

        for (std::size_t i = 0; i < n; ++i) {
            const double rho = cur.rho[i];
            const double v = cur.v[i];
            const double q = rho * v * lanes;
            const double q_up = i == 0 ? vb[e].inflow : cur.rho[i - 1] * cur.v[i - 1] * lanes;
            const double v_up = i == 0 ? vb[e].upstream_speed : cur.v[i - 1];
            const double rho_down = i + 1 == n ? vb[e].downstream_density : cur.rho[i + 1];

            const double rho_new = rho - dt / (lanes * dx) * (q - q_up);
            const double v_new = v - dt / (2.0 * dx) * (v * v - v_up * v_up) +
                                 dt / params.relaxation_time * (ideal_speed(fd, rho_down) - v) -
                                 dt * params.anticipation / (rho + params.density_guard) *
                                     (rho_down - rho) / dx;
            if (!std::isfinite(rho_new) || !std::isfinite(v_new)) {
                std::ostringstream msg;
                msg << "non-finite state at t=" << state.t << " s, edge '" << edge.id << "', cell " << i;
                throw NumericalError(msg.str());
            }
            nxt.rho[i] = rho_new;
            nxt.v[i] = v_new;
        }
        if (phases.red(e)) {
            nxt.v[n - 1] = 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            nxt.rho[i] = std::clamp(nxt.rho[i], params.rho_floor, params.rho_jam);
            nxt.v[i] = std::clamp(nxt.v[i], 0.0, fd.v_max);
        }
    }
    next.step = state.step + 1;
    next.t = static_cast<double>(next.step) * dt;
}

SimState step(const RoadNetwork& net, const SimState& state, const VirtualBoundary& vb,
              const PhaseState& phases, const SimParams& params) {
    SimState next = state;
    step_into(net, state, vb, phases, params, next);
    return next;
}

RunResult run(const RoadNetwork& net, const SimState& initial, const SignalConfiguration& cfg,
              const SimParams& params, const RunOptions& options) {
    params.validate();
    if (!(options.horizon > options.warmup) || !(options.warmup >= 0.0)) {
        throw std::invalid_argument("run: need horizon > warmup >= 0");
    }
    if (const auto cfl = check_cfl(net, params.dt); !cfl.ok()) {
        std::ostringstream msg;
        msg << "CFL condition violated for dt=" << params.dt << " s:";
        for (const auto& v : cfl.violations) {
            msg << " " << v.edge_id << " (ratio " << v.ratio << ")";
        }
        throw CflError(msg.str());
    }
    check_config(cfg, net);
    if (initial.edges.size() != net.edge_count()) {
        throw std::invalid_argument("run: initial state does not match the network");
    }

    RunResult result;
    result.steps = steps_for(options.horizon, params.dt);
    result.warmup_steps = steps_for(options.warmup, params.dt);

    std::vector<double> probes = options.probe_times;
    std::sort(probes.begin(), probes.end());
    std::size_t next_probe = 0;

    SimState cur = initial;
    cur.step = 0;
    cur.t = 0.0;
    SimState nxt = cur;
    std::vector<StepMetrics> series;
    series.reserve(static_cast<std::size_t>(std::max<std::int64_t>(result.steps - result.warmup_steps, 0)));

    for (std::int64_t k = 0; k < result.steps; ++k) {
        while (next_probe < probes.size() && probes[next_probe] <= cur.t + kStepEps) {
            result.snapshots.push_back(cur);
            ++next_probe;
        }
        if (k >= result.warmup_steps) {
            series.push_back(step_metrics(net, cur, options.queue, options.average));
        }
        const PhaseState phases = phases_at(net, cfg, cur.t);
        const VirtualBoundary vb = virtual_boundaries(net, cur, phases, params);
        step_into(net, cur, vb, phases, params, nxt);
        std::swap(cur, nxt);
    }
    while (next_probe < probes.size()) {
        result.snapshots.push_back(cur);
        ++next_probe;
    }
    result.metrics = aggregate(series);
    return result;
}

ObservedSpeeds read_observed_speeds(const std::filesystem::path& path) {
    const auto table = detail::read_csv_file(path);
    const auto c_edge = table.column("edge_id", path);
    const auto c_speed = table.column("speed_mps", path);
    ObservedSpeeds out;
    for (const auto& row : table.rows) {
        const double v = detail::parse_double(row.fields[c_speed], path, row.line);
        if (!out.emplace(row.fields[c_edge], v).second) {
            throw ParseError(path.string() + ":" + std::to_string(row.line) + ": duplicate edge '" +
                             row.fields[c_edge] + "'");
        }
    }
    return out;
}

void write_heatmap_csv(const RoadNetwork& net, const SimState& state, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << "edge_id,cell_index,rho,v\n";
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& cells = state.edges[e];
        for (std::size_t i = 0; i < cells.rho.size(); ++i) {
            out << net.edge(e).id << ',' << i << ',' << detail::format_double(cells.rho[i]) << ','
                << detail::format_double(cells.v[i]) << '\n';
        }
    }
}

void write_heatmap_pgm(const RoadNetwork& net, const SimState& state, double rho_max,
                       const std::filesystem::path& path) {
    std::size_t width = 0;
    for (const auto& cells : state.edges) {
        width = std::max(width, cells.rho.size());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << "P5\n" << width << ' ' << net.edge_count() << "\n255\n";
    for (const auto& cells : state.edges) {
        for (std::size_t i = 0; i < width; ++i) {
            unsigned char px = 0;
            if (i < cells.rho.size()) {
                const double level = std::clamp(cells.rho[i] / rho_max, 0.0, 1.0);
                px = static_cast<unsigned char>(std::lround(level * 255.0));
            }
            out.put(static_cast<char>(px));
        }
    }
}

void write_metrics(const RunResult& result, const std::filesystem::path& path) {
    detail::Json doc = {{"avg_speed_mps", result.metrics.avg_speed},
                        {"queue_length", result.metrics.queue_length},
                        {"samples", result.metrics.samples},
                        {"steps", result.steps},
                        {"warmup_steps", result.warmup_steps}};
    detail::write_json_file(doc, path);
}

}  // namespace pwtl
