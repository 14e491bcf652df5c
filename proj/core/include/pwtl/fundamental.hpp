#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace pwtl {

/// Parameters of the exponential speed-density relation
/// V(rho) = v_max * exp(-(1/a) * (rho / rho_cr)^a).
struct FdParams {
    double v_max = 13.68;  ///< free-flow speed [m/s]
    double rho_cr = 0.05;  ///< critical density [cars/m per lane]
    double a = 1.24;       ///< abruptness exponent [-]

    bool valid() const;
    friend bool operator==(const FdParams&, const FdParams&) = default;
};

/// Values fitted on urban counter data; the library-wide defaults.
inline constexpr FdParams kCalibratedFd{13.68, 0.05, 1.24};

/// Equilibrium speed at density `rho` (>= 0).
double ideal_speed(const FdParams& p, double rho);

struct SpeedInversion {
    double density = 0.0;
    bool clamped = false;  ///< speed exceeded v_max and was clamped
};

/// Density whose ideal speed equals `speed`.
///
/// Speeds above v_max are clamped to v_max (density 0, `clamped` set).
/// Throws std::domain_error for speed <= 0 or non-finite input.
SpeedInversion invert_speed(const FdParams& p, double speed);

/// One aggregated traffic-counter record.
struct CounterSample {
    double interval_s = 0.0;
    double count = 0.0;
    double avg_speed = 0.0;  ///< [m/s]
};

/// count / (interval * avg_speed). Throws std::domain_error on a zero or
/// negative interval or speed.
double density_from_counter(const CounterSample& s);

struct DensitySpeed {
    double density = 0.0;
    double speed = 0.0;
};

struct FitOptions {
    int max_iterations = 2000;
    double sse_tolerance = 1e-10;  ///< relative spread of simplex SSE values
};

struct FitResult {
    FdParams params;
    double sse = 0.0;
    double initial_sse = 0.0;
    int iterations = 0;
    bool converged = false;
};

double fd_sse(const FdParams& p, std::span<const DensitySpeed> samples);

/// Least-squares fit of the speed-density relation.
///
/// Nelder-Mead simplex on log-parameters (positivity by construction),
/// restarted around the incumbent until a restart no longer improves it.
/// With `fixed_v_max`, only rho_cr and a are free. The result never has a
/// larger SSE than `init`.
///
/// Throws std::invalid_argument for fewer than 3 samples, fewer than 3
/// distinct densities, non-finite samples or a non-positive `init`.
FitResult fit_fd(std::span<const DensitySpeed> samples, const FdParams& init = kCalibratedFd,
                 std::optional<double> fixed_v_max = std::nullopt, const FitOptions& options = {});

/// Reads `interval_s,count,avg_speed_mps` rows.
std::vector<CounterSample> read_counter_csv(const std::filesystem::path& path);

/// Writes {v_max, rho_cr, a, sse, converged}.
void write_fit_result(const FitResult& fit, const std::filesystem::path& path);

/// Reads the fields written by write_fit_result (sse/converged optional).
FdParams read_fd_params(const std::filesystem::path& path);

}  // namespace pwtl
