#include "pwtl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json_io.hpp"
#include "pwtl/error.hpp"
#include "pwtl/parallel.hpp"
#include "pwtl/rng.hpp"

namespace pwtl {

namespace {

double finite_or_worst(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

bool spread_converged(const std::vector<double>& values, double tolerance) {
    double mean = 0.0;
    for (const double v : values) {
        if (!std::isfinite(v)) return false;
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size())) <= tolerance * std::abs(mean);
}

double goal_metric(Goal goal, double avg_speed, double queue) {
    return goal == Goal::MaximizeSpeed ? avg_speed : queue;
}

// Converts "larger is better" for speed into a minimisation.
double to_minimised(Goal goal, double metric) {
    return goal == Goal::MaximizeSpeed ? -metric : metric;
}

}  // namespace

std::size_t DeConfig::population_for(std::size_t dim) const {
    if (population != 0) {
        return population;
    }
    return std::max<std::size_t>(4, std::min<std::size_t>(15 * dim, 150));
}

void DeConfig::validate() const {
    if (population != 0 && population < 4) {
        throw std::invalid_argument("DE population must be at least 4");
    }
    if (!(mutation > 0.0 && mutation <= 2.0)) {
        throw std::invalid_argument("DE mutation factor must lie in (0, 2]");
    }
    if (!(crossover >= 0.0 && crossover <= 1.0)) {
        throw std::invalid_argument("DE crossover rate must lie in [0, 1]");
    }
    if (max_generations < 0) {
        throw std::invalid_argument("DE max_generations must be non-negative");
    }
    if (!(tolerance >= 0.0)) {
        throw std::invalid_argument("DE tolerance must be non-negative");
    }
}

DeResult differential_evolution(const ObjectiveFn& objective, std::size_t dim, const DeConfig& config,
                                const std::optional<std::vector<double>>& seed_point) {
    if (dim == 0) {
        throw std::invalid_argument("differential_evolution: dim must be at least 1");
    }
    config.validate();
    if (seed_point && seed_point->size() != dim) {
        throw std::invalid_argument("differential_evolution: seed point has the wrong dimension");
    }
    const std::size_t np = config.population_for(dim);
    const auto last = static_cast<std::int64_t>(np) - 1;
    Rng rng(config.seed);

    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            pop[i][j] = (i == 0 && seed_point) ? std::clamp((*seed_point)[j], 0.0, 1.0) : rng.uniform01();
        }
    }
    std::vector<double> values(np);
    parallel_for(np, config.workers, [&](std::size_t i) { values[i] = finite_or_worst(objective(pop[i])); });

    DeResult result;
    result.evaluations = np;
    std::size_t best = 0;
    for (std::size_t i = 1; i < np; ++i) {
        if (values[i] < values[best]) best = i;
    }
    result.history.push_back(values[best]);

    std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
    std::vector<double> trial_values(np);
    for (int gen = 0; gen < config.max_generations; ++gen) {
        if (spread_converged(values, config.tolerance)) {
            result.converged = true;
            break;
        }
        std::size_t budget = np;
        if (config.max_evaluations != 0) {
            if (result.evaluations >= config.max_evaluations) break;
            budget = std::min(np, config.max_evaluations - result.evaluations);
        }

        for (std::size_t i = 0; i < np; ++i) {
            std::size_t a, b, c;
            do { a = static_cast<std::size_t>(rng.uniform_int(0, last)); } while (a == i);
            do { b = static_cast<std::size_t>(rng.uniform_int(0, last)); } while (b == i || b == a);
            do { c = static_cast<std::size_t>(rng.uniform_int(0, last)); } while (c == i || c == a || c == b);
            const auto forced = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(dim) - 1));
            for (std::size_t j = 0; j < dim; ++j) {
                const bool take = j == forced || rng.uniform01() < config.crossover;
                const double mutant = pop[a][j] + config.mutation * (pop[b][j] - pop[c][j]);
                trials[i][j] = take ? std::clamp(mutant, 0.0, 1.0) : pop[i][j];
            }
        }
        parallel_for(budget, config.workers,
                     [&](std::size_t i) { trial_values[i] = finite_or_worst(objective(trials[i])); });
        result.evaluations += budget;

        for (std::size_t i = 0; i < budget; ++i) {
            if (trial_values[i] <= values[i]) {
                pop[i].swap(trials[i]);
                values[i] = trial_values[i];
                if (values[i] < values[best]) best = i;
            }
        }
        ++result.generations;
        result.history.push_back(values[best]);
    }
    result.best = pop[best];
    result.best_value = values[best];
    return result;
}

const char* to_string(Goal g) { return g == Goal::MaximizeSpeed ? "speed" : "queue"; }

Goal parse_goal(const std::string& text) {
    if (text == "speed") return Goal::MaximizeSpeed;
    if (text == "queue") return Goal::MinimizeQueue;
    throw std::invalid_argument("unknown objective '" + text + "' (expected speed|queue)");
}

ConfigEvaluator surrogate_evaluator(const SurrogateBundle& bundle, Goal goal) {
    if (!bundle.model) {
        throw std::invalid_argument("surrogate_evaluator: no model");
    }
    std::size_t column = 0;
    if (bundle.target == Target::Both) {
        column = goal == Goal::MaximizeSpeed ? 0 : 1;
    } else if ((bundle.target == Target::Speed) != (goal == Goal::MaximizeSpeed)) {
        throw std::invalid_argument(std::string("surrogate predicts ") + to_string(bundle.target) +
                                    " but the objective is " + to_string(goal));
    }
    const Regressor* model = bundle.model.get();
    return [model, column](std::span<const double> x) { return model->predict(x)[column]; };
}

ConfigEvaluator simulation_evaluator(const RoadNetwork& net, const SimState& initial, const SimParams& params,
                                     const RunOptions& options, Goal goal) {
    return [&net, &initial, params, options, goal](std::span<const double> x) {
        const SignalConfiguration cfg = decode(x, net);
        try {
            const RunResult r = run(net, initial, cfg, params, options);
            return goal_metric(goal, r.metrics.avg_speed, r.metrics.queue_length);
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::quiet_NaN();  // ranked worst by the search
        }
    };
}

OptimizeResult optimize_config(const RoadNetwork& net, const ConfigEvaluator& evaluator, Goal goal,
                               const DeConfig& de, const Dataset& training) {
    if (training.intersection_ids != net.signalized_ids()) {
        throw std::invalid_argument("training table intersections do not match the network");
    }
    const DatasetRow* seed_row = nullptr;
    for (const auto& row : training.rows) {
        if (!row.ok()) continue;
        const double m = to_minimised(goal, goal_metric(goal, row.avg_speed, row.queue_length));
        if (seed_row == nullptr ||
            m < to_minimised(goal, goal_metric(goal, seed_row->avg_speed, seed_row->queue_length))) {
            seed_row = &row;
        }
    }
    if (seed_row == nullptr) {
        throw std::invalid_argument("training table has no successful row to seed the search");
    }
    const std::vector<double> seed = encode_signals(seed_row->signals);

    const ObjectiveFn objective = [&](std::span<const double> x) { return to_minimised(goal, evaluator(x)); };

    OptimizeResult out;
    out.search = differential_evolution(objective, seed.size(), de, seed);
    out.config = decode(out.search.best, net);
    out.encoded = encode(out.config, net);
    out.predicted = evaluator(out.encoded);
    out.seed_value = evaluator(seed);
    return out;
}

CongestionMetrics validate_config(const RoadNetwork& net, const SimState& initial, const SimParams& params,
                                  const SignalConfiguration& cfg, const RunOptions& options) {
    return run(net, initial, cfg, params, options).metrics;
}

void write_optimize_report(const OptimizeReport& report, const std::filesystem::path& path) {
    using detail::Json;
    Json doc;
    doc["objective"] = to_string(report.goal);
    doc["evaluator"] = report.evaluator;
    doc["predicted_value"] = report.predicted;
    doc["seed_value"] = report.seed_value;
    if (report.simulated) {
        doc["simulated"] = {{"avg_speed_mps", report.simulated->avg_speed},
                            {"queue_length", report.simulated->queue_length},
                            {"samples", report.simulated->samples}};
    } else {
        doc["simulated"] = nullptr;
    }
    doc["generations"] = report.generations;
    doc["evaluations"] = report.evaluations;
    Json cfg = Json::object();
    for (const auto& [id, s] : report.config) {
        cfg[id] = {{"red", s.red}, {"green", s.green}, {"offset", s.offset}};
    }
    doc["configuration"] = std::move(cfg);
    detail::write_json_file(doc, path);
}

}  // namespace pwtl
