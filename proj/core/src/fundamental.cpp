#include "pwtl/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "csv.hpp"
#include "json_io.hpp"
#include "simplex.hpp"

namespace pwtl {

bool FdParams::valid() const {
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    return positive(v_max) && positive(rho_cr) && positive(a);
}

double ideal_speed(const FdParams& p, double rho) {
    const double ratio = std::max(rho, 0.0) / p.rho_cr;
    return p.v_max * std::exp(-std::pow(ratio, p.a) / p.a);
}

SpeedInversion invert_speed(const FdParams& p, double speed) {
    if (!std::isfinite(speed) || speed <= 0.0) {
        throw std::domain_error("invert_speed: speed must be positive and finite");
    }
    if (speed >= p.v_max) {
        return {0.0, speed > p.v_max};
    }
    const double x = -p.a * std::log(speed / p.v_max);
    return {p.rho_cr * std::pow(x, 1.0 / p.a), false};
}

double density_from_counter(const CounterSample& s) {
    if (!(s.interval_s > 0.0)) {
        throw std::domain_error("density_from_counter: interval must be positive");
    }
    if (!(s.avg_speed > 0.0)) {
        throw std::domain_error("density_from_counter: average speed must be positive");
    }
    return s.count / (s.interval_s * s.avg_speed);
}

double fd_sse(const FdParams& p, std::span<const DensitySpeed> samples) {
    double sse = 0.0;
    for (const auto& s : samples) {
        const double r = s.speed - ideal_speed(p, s.density);
        sse += r * r;
    }
    return sse;
}

FitResult fit_fd(std::span<const DensitySpeed> samples, const FdParams& init,
                 std::optional<double> fixed_v_max, const FitOptions& options) {
    if (samples.size() < 3) {
        throw std::invalid_argument("fit_fd: at least 3 samples are required");
    }
    std::set<double> distinct;
    for (const auto& s : samples) {
        if (!std::isfinite(s.density) || !std::isfinite(s.speed)) {
            throw std::invalid_argument("fit_fd: non-finite sample");
        }
        distinct.insert(s.density);
    }
    if (distinct.size() < 3) {
        throw std::invalid_argument("fit_fd: at least 3 distinct densities are required");
    }
    FdParams start = init;
    if (fixed_v_max) {
        start.v_max = *fixed_v_max;
    }
    if (!start.valid()) {
        throw std::invalid_argument("fit_fd: initial parameters must be positive and finite");
    }

    const bool free_vmax = !fixed_v_max.has_value();
    auto unpack = [&](const std::vector<double>& x) {
        FdParams p = start;
        std::size_t k = 0;
        if (free_vmax) {
            p.v_max = std::exp(x[k++]);
        }
        p.rho_cr = std::exp(x[k++]);
        p.a = std::exp(x[k]);
        return p;
    };
    auto objective = [&](const std::vector<double>& x) {
        const double sse = fd_sse(unpack(x), samples);
        return std::isfinite(sse) ? sse : std::numeric_limits<double>::infinity();
    };

    std::vector<double> x;
    if (free_vmax) {
        x.push_back(std::log(start.v_max));
    }
    x.push_back(std::log(start.rho_cr));
    x.push_back(std::log(start.a));

    FitResult result;
    result.initial_sse = fd_sse(start, samples);
    double best = objective(x);
    int used = 0;
    bool converged = false;
    // Restart around the incumbent until a restart stops paying off.
    while (used < options.max_iterations) {
        auto run = detail::nelder_mead(objective, x, 0.1, options.max_iterations - used,
                                       options.sse_tolerance);
        used += std::max(run.iterations, 1);
        const bool improved = run.value < best * (1.0 - options.sse_tolerance) &&
                              run.value < best - 1e-300;
        if (run.value <= best) {
            x = run.x;
            best = run.value;
        }
        if (run.converged && !improved) {
            converged = true;
            break;
        }
    }

    result.params = unpack(x);
    result.sse = best;
    result.iterations = used;
    result.converged = converged;
    if (result.sse > result.initial_sse) {  // descent guarantee
        result.params = start;
        result.sse = result.initial_sse;
    }
    return result;
}

std::vector<CounterSample> read_counter_csv(const std::filesystem::path& path) {
    const auto table = detail::read_csv_file(path);
    const auto c_interval = table.column("interval_s", path);
    const auto c_count = table.column("count", path);
    const auto c_speed = table.column("avg_speed_mps", path);
    std::vector<CounterSample> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        out.push_back({detail::parse_double(row.fields[c_interval], path, row.line),
                       detail::parse_double(row.fields[c_count], path, row.line),
                       detail::parse_double(row.fields[c_speed], path, row.line)});
    }
    return out;
}

void write_fit_result(const FitResult& fit, const std::filesystem::path& path) {
    detail::Json doc = {
        {"v_max", fit.params.v_max}, {"rho_cr", fit.params.rho_cr}, {"a", fit.params.a},
        {"sse", fit.sse},           {"converged", fit.converged},
    };
    detail::write_json_file(doc, path);
}

FdParams read_fd_params(const std::filesystem::path& path) {
    const auto doc = detail::read_json_file(path);
    const std::string ctx = path.string();
    FdParams p{detail::member<double>(doc, "v_max", ctx), detail::member<double>(doc, "rho_cr", ctx),
               detail::member<double>(doc, "a", ctx)};
    if (!p.valid()) {
        throw ValidationError(ctx + ": fundamental-diagram parameters must be positive");
    }
    return p;
}

}  // namespace pwtl
