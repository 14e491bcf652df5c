#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwtl/dataset.hpp"
#include "pwtl/signals.hpp"
#include "pwtl/solver.hpp"
#include "pwtl/surrogate.hpp"

namespace pwtl {

/// Differential Evolution settings (rand/1/bin).
struct DeConfig {
    std::size_t population = 0;  ///< 0 selects min(15 * dim, 150), at least 4
    double mutation = 0.5;       ///< F in (0, 2]
    double crossover = 0.9;      ///< CR in [0, 1]
    int max_generations = 300;
    double tolerance = 1e-8;     ///< stop when std(values) <= tolerance * |mean(values)|
    std::uint64_t seed = 0;
    std::size_t max_evaluations = 0;  ///< 0 means unlimited
    std::size_t workers = 1;          ///< parallel evaluations within a generation

    std::size_t population_for(std::size_t dim) const;
    /// Throws std::invalid_argument when a setting is out of range.
    void validate() const;
};

/// Minimised objective on [0,1]^dim. Must be safe to call concurrently when
/// DeConfig::workers > 1.
using ObjectiveFn = std::function<double(std::span<const double>)>;

struct DeResult {
    std::vector<double> best;
    double best_value = 0.0;
    std::vector<double> history;  ///< best-so-far after initialisation and after each generation
    int generations = 0;
    std::size_t evaluations = 0;
    bool converged = false;  ///< stopped on the population-spread criterion
};

/// Classic rand/1/bin with greedy selection and clipping to [0,1]. Member 0
/// of the initial population is `seed_point` when given; all trial vectors of
/// a generation are built first, evaluated (possibly in parallel), then
/// selected, so the result does not depend on the worker count.
DeResult differential_evolution(const ObjectiveFn& objective, std::size_t dim, const DeConfig& config,
                                const std::optional<std::vector<double>>& seed_point = std::nullopt);

enum class Goal { MaximizeSpeed, MinimizeQueue };

const char* to_string(Goal g);  ///< "speed" or "queue"
Goal parse_goal(const std::string& text);

/// Maps an encoded configuration to the goal metric in natural units
/// (m/s for speed, cells for queue).
using ConfigEvaluator = std::function<double(std::span<const double>)>;

/// Prediction of the bundle's model for the goal metric. Throws
/// std::invalid_argument when the model does not predict that metric.
ConfigEvaluator surrogate_evaluator(const SurrogateBundle& bundle, Goal goal);

/// Decodes the point to an integer configuration and simulates it.
ConfigEvaluator simulation_evaluator(const RoadNetwork& net, const SimState& initial, const SimParams& params,
                                     const RunOptions& options, Goal goal);

struct OptimizeResult {
    SignalConfiguration config;
    std::vector<double> encoded;  ///< encoding of `config` (on the integer lattice)
    double predicted = 0.0;       ///< evaluator value at `encoded`
    double seed_value = 0.0;      ///< evaluator value at the seed point
    DeResult search;
};

/// Seeds DE with the best successful training row for the goal, searches in
/// encoded space, decodes the best vector to integers and re-evaluates it.
/// Throws std::invalid_argument when the table has no successful row or its
/// intersections differ from the network's.
OptimizeResult optimize_config(const RoadNetwork& net, const ConfigEvaluator& evaluator, Goal goal,
                               const DeConfig& de, const Dataset& training);

/// Full simulation of a configuration (horizon 340 s, warmup 100 s unless
/// overridden). Errors as run().
CongestionMetrics validate_config(const RoadNetwork& net, const SimState& initial, const SimParams& params,
                                  const SignalConfiguration& cfg, const RunOptions& options = {});

struct OptimizeReport {
    Goal goal = Goal::MaximizeSpeed;
    std::string evaluator;  ///< "linear", "mlp" or "simulation"
    double predicted = 0.0;
    double seed_value = 0.0;
    std::optional<CongestionMetrics> simulated;
    int generations = 0;
    std::size_t evaluations = 0;
    SignalConfiguration config;
};

void write_optimize_report(const OptimizeReport& report, const std::filesystem::path& path);

}  // namespace pwtl
