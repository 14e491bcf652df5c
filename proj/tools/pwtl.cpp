// pwtl: command-line driver for calibration, simulation, dataset generation,
// surrogate training and signal-timing optimization.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pwtl/dataset.hpp"
#include "pwtl/error.hpp"
#include "pwtl/fundamental.hpp"
#include "pwtl/network.hpp"
#include "pwtl/optimizer.hpp"
#include "pwtl/parallel.hpp"
#include "pwtl/signals.hpp"
#include "pwtl/solver.hpp"
#include "pwtl/surrogate.hpp"

namespace {

using namespace pwtl;

// Flags shared by every subcommand that simulates.
struct SimFlags {
    std::string network;
    std::string init;
    std::string fd;
    double horizon = 340.0;
    double warmup = 100.0;
    double dt = 0.5;
    std::uint64_t seed = 0;
    std::string red = "jam";

    void add(CLI::App* cmd, bool need_init = true) {
        cmd->add_option("--network", network, "Network JSON file")->required()->check(CLI::ExistingFile);
        auto* i = cmd->add_option("--init", init, "Observed speeds CSV (edge_id,speed_mps)")
                      ->check(CLI::ExistingFile);
        if (need_init) i->required();
        cmd->add_option("--fd", fd, "Calibrated diagram JSON; its rho_cr and a become the network defaults")
            ->check(CLI::ExistingFile);
        cmd->add_option("--horizon", horizon, "Simulated seconds")->capture_default_str()->check(
            CLI::PositiveNumber);
        cmd->add_option("--warmup", warmup, "Seconds excluded from the metrics")->capture_default_str()->check(
            CLI::NonNegativeNumber);
        cmd->add_option("--dt", dt, "Time step [s]")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Seed for the initial-state noise and all sampling")
            ->capture_default_str();
        cmd->add_option("--red-downstream", red, "Downstream density seen on red: jam|copy")
            ->capture_default_str()
            ->check(CLI::IsMember({"jam", "copy"}));
    }

    RoadNetwork load() const {
        RoadNetwork net = load_network(network);
        if (!fd.empty()) {
            const FdParams p = read_fd_params(fd);
            net = net.with_fd_defaults(p.rho_cr, p.a);
        }
        return net;
    }

    SimParams params() const {
        SimParams p;
        p.dt = dt;
        p.seed = seed;
        p.red_downstream = red == "copy" ? RedDownstream::CopyLast : RedDownstream::JamDensity;
        return p;
    }

    RunOptions run_options() const {
        RunOptions o;
        o.horizon = horizon;
        o.warmup = warmup;
        return o;
    }

    SimState initial(const RoadNetwork& net, const SimParams& p) const {
        return initialize(net, read_observed_speeds(init), p);
    }
};

void require_cfl(const RoadNetwork& net, double dt) {
    const CflReport report = check_cfl(net, dt);
    if (report.ok()) return;
    std::string msg = "time step " + std::to_string(dt) + " s violates the CFL bound v_max*dt/dx <= 1 on";
    for (const auto& v : report.violations) {
        msg += " " + v.edge_id + " (" + std::to_string(v.ratio) + ")";
    }
    msg += "; reduce --dt";
    throw CflError(msg);
}

void print_metrics(const CongestionMetrics& m) {
    std::printf("avg_speed_mps %.6f\nqueue_length %.6f\nsamples %lld\n", m.avg_speed, m.queue_length,
                static_cast<long long>(m.samples));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Payne-Whitham traffic simulator with traffic lights"};
    app.require_subcommand(1);

    // calibrate-fd
    auto* cal = app.add_subcommand("calibrate-fd", "Fit the speed-density diagram to loop-counter data");
    std::string counters, cal_out;
    std::optional<double> fix_vmax;
    cal->add_option("--counters", counters, "CSV with interval_s,count,avg_speed_mps")
        ->required()
        ->check(CLI::ExistingFile);
    cal->add_option("--fix-vmax", fix_vmax, "Hold v_max at this value [m/s]")->check(CLI::PositiveNumber);
    cal->add_option("--out", cal_out, "Output JSON")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one simulation and write its metrics");
    SimFlags sim_flags;
    std::string sim_lights, sim_out, heatmap;
    sim_flags.add(sim);
    sim->add_option("--lights", sim_lights, "Signal configuration JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--heatmap", heatmap, "Final-state density map (.pgm image, otherwise CSV)");
    sim->add_option("--out", sim_out, "Metrics JSON")->required();

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "Simulate random signal configurations");
    SimFlags gen_flags;
    std::int64_t runs = 100;
    std::size_t gen_jobs = default_workers();
    std::string gen_out;
    gen_flags.add(gen);
    gen->add_option("--runs", runs, "Number of simulations")->capture_default_str()->check(
        CLI::PositiveNumber);
    gen->add_option("--jobs", gen_jobs, "Worker threads (default: PWTL_JOBS or all cores)")
        ->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Dataset CSV")->required();

    // train-surrogate
    auto* train = app.add_subcommand("train-surrogate", "Fit a surrogate and report k-fold RMSE");
    std::string data_path, model_kind = "linear", target_name = "both", train_out, activation = "relu";
    std::size_t folds = 5;
    std::size_t train_jobs = default_workers();
    std::uint64_t train_seed = 0;
    bool grid = false;
    train->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--model", model_kind, "linear|mlp")->capture_default_str()->check(
        CLI::IsMember({"linear", "mlp"}));
    train->add_option("--target", target_name, "speed|queue|both")->capture_default_str()->check(
        CLI::IsMember({"speed", "queue", "both"}));
    train->add_option("--folds", folds, "Cross-validation folds")->capture_default_str()->check(
        CLI::Range(2, 100));
    train->add_option("--seed", train_seed, "Seed for fold split and MLP training")->capture_default_str();
    train->add_option("--activation", activation, "MLP activation: relu|tanh")->capture_default_str()->check(
        CLI::IsMember({"relu", "tanh"}));
    train->add_flag("--grid", grid, "MLP: grid-search activation, alpha and learning rate first");
    train->add_option("--jobs", train_jobs, "Worker threads for the folds")->check(CLI::PositiveNumber);
    train->add_option("--out", train_out, "Model JSON")->required();

    // optimize
    auto* opt = app.add_subcommand("optimize", "Differential Evolution over signal timings");
    SimFlags opt_flags;
    std::string opt_model, opt_data, opt_out, opt_report, objective = "speed";
    bool direct = false;
    DeConfig de;
    std::size_t max_evals = 0;
    opt_flags.add(opt, false);
    auto* model_opt = opt->add_option("--model", opt_model, "Surrogate model JSON")->check(CLI::ExistingFile);
    auto* direct_opt = opt->add_flag("--direct", direct, "Evaluate candidates with the simulator");
    model_opt->excludes(direct_opt);
    opt->add_option("--objective", objective, "speed (maximise) | queue (minimise)")
        ->capture_default_str()
        ->check(CLI::IsMember({"speed", "queue"}));
    opt->add_option("--data", opt_data, "Training dataset CSV (seeds the search)")
        ->required()
        ->check(CLI::ExistingFile);
    opt->add_option("--population", de.population, "Population size (0: min(15*dim, 150))")
        ->capture_default_str();
    opt->add_option("--generations", de.max_generations, "Maximum generations")->capture_default_str();
    opt->add_option("--mutation", de.mutation, "F")->capture_default_str();
    opt->add_option("--crossover", de.crossover, "CR")->capture_default_str();
    opt->add_option("--max-evals", max_evals, "Evaluation budget (default: 200 with --direct, else none)");
    opt->add_option("--jobs", de.workers, "Parallel evaluations")->check(CLI::PositiveNumber);
    opt->add_option("--out", opt_out, "Best configuration JSON")->required();
    opt->add_option("--report", opt_report, "Run report JSON (default: <out>.report.json)");

    // validate
    auto* val = app.add_subcommand("validate", "Re-simulate a configuration");
    SimFlags val_flags;
    std::string val_lights, val_out;
    val_flags.add(val);
    val->add_option("--lights", val_lights, "Signal configuration JSON")->required()->check(CLI::ExistingFile);
    val->add_option("--out", val_out, "Metrics JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cal) {
            const auto samples = read_counter_csv(counters);
            std::vector<DensitySpeed> points;
            for (const auto& s : samples) {
                points.push_back({density_from_counter(s), s.avg_speed});
            }
            FdParams init = kCalibratedFd;
            if (fix_vmax) init.v_max = *fix_vmax;
            const FitResult fit = fit_fd(points, init, fix_vmax);
            write_fit_result(fit, cal_out);
            std::printf("v_max %.6f\nrho_cr %.6f\na %.6f\nsse %.6g\n", fit.params.v_max, fit.params.rho_cr,
                        fit.params.a, fit.sse);
        } else if (*sim || *val) {
            const SimFlags& f = *sim ? sim_flags : val_flags;
            const RoadNetwork net = f.load();
            const SimParams params = f.params();
            require_cfl(net, params.dt);
            const SignalConfiguration cfg = read_signal_config(*sim ? sim_lights : val_lights);
            RunOptions options = f.run_options();
            if (*sim && !heatmap.empty()) options.probe_times = {f.horizon};
            const RunResult result = run(net, f.initial(net, params), cfg, params, options);
            write_metrics(result, *sim ? sim_out : val_out);
            if (*sim && !heatmap.empty()) {
                const SimState& last = result.snapshots.back();
                if (std::filesystem::path(heatmap).extension() == ".pgm") {
                    write_heatmap_pgm(net, last, params.rho_jam, heatmap);
                } else {
                    write_heatmap_csv(net, last, heatmap);
                }
            }
            print_metrics(result.metrics);
        } else if (*gen) {
            const RoadNetwork net = gen_flags.load();
            const SimParams params = gen_flags.params();
            require_cfl(net, params.dt);
            GenerateOptions options;
            options.runs = runs;
            options.seed = gen_flags.seed;
            options.workers = gen_jobs;
            options.run = gen_flags.run_options();
            const Dataset table = generate(net, gen_flags.initial(net, params), params, options);
            write_csv(table, gen_out);
            std::printf("runs %zu\nok %zu\n", table.rows.size(), table.ok_count());
            if (table.ok_count() == 0) {
                throw NumericalError("every run failed; see the status column of " + gen_out);
            }
        } else if (*train) {
            const Dataset table = read_csv(data_path);
            const Target target = parse_target(target_name);
            const TrainingData td = training_data(table, target);
            if (td.x.rows < folds) {
                throw ValidationError("dataset has " + std::to_string(td.x.rows) + " successful rows, fewer than " +
                                      std::to_string(folds) + " folds");
            }
            FitFn fit;
            MlpHyper hyper;
            hyper.activation = parse_activation(activation);
            if (model_kind == "linear") {
                fit = [](const Matrix& x, const Matrix& y) { return std::make_unique<LinearModel>(fit_linear(x, y)); };
            } else {
                if (grid) {
                    const GridSearchResult g = grid_search_mlp(td.x, td.y, hyper, folds, train_seed, train_jobs);
                    hyper = g.best;
                    std::printf("grid best: activation %s alpha %g learning_rate %g\n", to_string(hyper.activation),
                                hyper.alpha, hyper.learning_rate);
                }
                fit = [&hyper, train_seed](const Matrix& x, const Matrix& y) {
                    return std::make_unique<MlpModel>(fit_mlp(x, y, hyper, train_seed));
                };
            }
            const KFoldResult cv = kfold_rmse(fit, td.x, td.y, folds, train_seed, train_jobs);
            const char* names[] = {"speed", "queue"};
            for (std::size_t o = 0; o < cv.rmse.size(); ++o) {
                const char* name = target == Target::Both ? names[o] : to_string(target);
                std::printf("rmse_%s %.6g\n", name, cv.rmse[o]);
            }
            SurrogateBundle bundle;
            bundle.target = target;
            bundle.feature_ids = table.intersection_ids;
            bundle.model = fit(td.x, td.y);
            write_surrogate(bundle, train_out);
        } else if (*opt) {
            if (!direct && opt_model.empty()) {
                throw std::invalid_argument("optimize needs --model <file> or --direct");
            }
            const RoadNetwork net = opt_flags.load();
            const SimParams params = opt_flags.params();
            const Goal goal = parse_goal(objective);
            const Dataset table = read_csv(opt_data);
            de.seed = opt_flags.seed;
            de.max_evaluations = max_evals != 0 ? max_evals : (direct ? 200 : 0);

            std::optional<SimState> initial;
            if (!opt_flags.init.empty()) {
                require_cfl(net, params.dt);
                initial = opt_flags.initial(net, params);
            }
            SurrogateBundle bundle;
            ConfigEvaluator evaluator;
            std::string evaluator_name;
            if (direct) {
                if (!initial) throw std::invalid_argument("--direct needs --init");
                evaluator = simulation_evaluator(net, *initial, params, opt_flags.run_options(), goal);
                evaluator_name = "simulation";
            } else {
                bundle = read_surrogate(opt_model);
                if (bundle.feature_ids != net.signalized_ids()) {
                    throw ValidationError(opt_model + ": model features do not match the network's intersections");
                }
                evaluator = surrogate_evaluator(bundle, goal);
                evaluator_name = bundle.model->kind();
            }
            const OptimizeResult result = optimize_config(net, evaluator, goal, de, table);
            write_signal_config(result.config, opt_out);

            OptimizeReport report;
            report.goal = goal;
            report.evaluator = evaluator_name;
            report.predicted = result.predicted;
            report.seed_value = result.seed_value;
            report.generations = result.search.generations;
            report.evaluations = result.search.evaluations;
            report.config = result.config;
            if (initial) {
                report.simulated = validate_config(net, *initial, params, result.config, opt_flags.run_options());
            }
            write_optimize_report(report, opt_report.empty() ? opt_out + ".report.json" : opt_report);
            std::printf("predicted_%s %.6f\nseed_%s %.6f\n", to_string(goal), result.predicted, to_string(goal),
                        result.seed_value);
            if (report.simulated) print_metrics(*report.simulated);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
