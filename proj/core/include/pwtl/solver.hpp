#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwtl/metrics.hpp"
#include "pwtl/network.hpp"
#include "pwtl/signals.hpp"
#include "pwtl/state.hpp"

namespace pwtl {

/// What an incoming road "sees" downstream while its light is red.
enum class RedDownstream {
    JamDensity,  ///< a virtual jam: rho(N+1) = rho_jam
    CopyLast,    ///< zero gradient: rho(N+1) = rho(N)
};

struct SimParams {
    double relaxation_time = 1.0;  ///< nu [s]
    double anticipation = 7.0;     ///< C [m^2/s]
    double density_guard = 0.008;  ///< chi [cars/m]
    double dt = 0.5;               ///< [s]
    double rho_jam = 0.2;          ///< upper clamp [cars/m per lane]
    double rho_floor = 1e-4;       ///< lower clamp [cars/m per lane]
    double init_noise = 0.05;      ///< relative half-width of initial speed noise
    std::uint64_t seed = 0;        ///< initial-noise seed
    RedDownstream red_downstream = RedDownstream::JamDensity;

    /// Throws std::invalid_argument when a parameter is out of range.
    void validate() const;
};

struct CflViolation {
    std::string edge_id;
    double ratio = 0.0;  ///< v_max * dt / dx
};

struct CflReport {
    std::vector<CflViolation> violations;
    double max_ratio = 0.0;

    bool ok() const { return violations.empty(); }
};

/// Checks v_max(e) * dt / dx(e) <= 1 for every road.
CflReport check_cfl(const RoadNetwork& net, double dt);

/// Observed mean speed per edge id [m/s].
using ObservedSpeeds = std::map<std::string, double>;

/// Initial state from observed speeds: each cell gets observed(e) * (1 + u),
/// u ~ U[-init_noise, init_noise] from params.seed, clamped to (0, v_max(e)],
/// and the density that the road's fundamental diagram maps to that speed.
///
/// Edges missing from `observed` use `default_speed`; without one, throws
/// ValidationError naming the edge.
SimState initialize(const RoadNetwork& net, const ObservedSpeeds& observed, const SimParams& params,
                    std::optional<double> default_speed = std::nullopt);

/// Uniform density rho on every cell with the matching equilibrium speed.
SimState equilibrium_state(const RoadNetwork& net, double rho);

/// Ghost values for one road: inflow flux q(0) (all lanes), upstream speed
/// v(0) and downstream density rho(N+1).
struct EdgeBoundary {
    double inflow = 0.0;
    double upstream_speed = 0.0;
    double downstream_density = 0.0;
};

using VirtualBoundary = std::vector<EdgeBoundary>;

/// Intersection coupling for the current state.
///
/// Outgoing roads receive the turn-weighted flux of the incoming roads, with
/// a flux-weighted speed capped by the turning-speed limit. Incoming roads see
/// a density-weighted average of the first cells downstream, or rho_jam when
/// their light is red. Red incoming roads contribute no flux. Entry and exit
/// roads use zero-gradient ghosts (or a configured constant inflow).
VirtualBoundary virtual_boundaries(const RoadNetwork& net, const SimState& state,
                                   const PhaseState& phases, const SimParams& params);

/// One explicit time step. Throws NumericalError naming the edge and cell
/// when a non-finite value is produced.
SimState step(const RoadNetwork& net, const SimState& state, const VirtualBoundary& vb,
              const PhaseState& phases, const SimParams& params);

/// Allocation-free variant of step: writes the next state into `next`, which
/// must have the same shape as `state`.
void step_into(const RoadNetwork& net, const SimState& state, const VirtualBoundary& vb,
               const PhaseState& phases, const SimParams& params, SimState& next);

struct RunOptions {
    double horizon = 340.0;  ///< simulated seconds
    double warmup = 100.0;   ///< metrics only for t >= warmup
    QueueFnParams queue;
    SpeedAverage average = SpeedAverage::Unweighted;
    std::vector<double> probe_times;  ///< snapshot the state at these times
};

struct RunResult {
    CongestionMetrics metrics;
    std::int64_t steps = 0;
    std::int64_t warmup_steps = 0;
    std::vector<SimState> snapshots;  ///< one per probe time, in order
};

/// Advances ceil(horizon / dt) steps, evaluating the signal schedule at each
/// step and averaging the step metrics of every state with t >= warmup.
///
/// Throws CflError when the time step violates the CFL bound,
/// std::invalid_argument for horizon <= warmup, ValidationError for a
/// configuration that does not match the network, and NumericalError when
/// the state stops being finite.
RunResult run(const RoadNetwork& net, const SimState& initial, const SignalConfiguration& cfg,
              const SimParams& params, const RunOptions& options = {});

/// Reads `edge_id,speed_mps` rows.
ObservedSpeeds read_observed_speeds(const std::filesystem::path& path);

/// One row per cell: edge_id,cell_index,rho,v.
void write_heatmap_csv(const RoadNetwork& net, const SimState& state, const std::filesystem::path& path);

/// Binary greyscale image, one row per edge, one column per cell, density
/// scaled to [0, rho_max] (black = empty, white = rho_max).
void write_heatmap_pgm(const RoadNetwork& net, const SimState& state, double rho_max,
                       const std::filesystem::path& path);

/// {avg_speed_mps, queue_length, steps, warmup_steps}.
void write_metrics(const RunResult& result, const std::filesystem::path& path);

}  // namespace pwtl
