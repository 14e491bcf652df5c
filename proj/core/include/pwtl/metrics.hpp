#pragma once

#include <cstdint>
#include <span>

#include "pwtl/network.hpp"
#include "pwtl/state.hpp"

namespace pwtl {

/// Logistic congestion indicator F(v) = 1 / (1 + exp(c (v - v_q))).
struct QueueFnParams {
    double steepness = 3.0;        ///< c
    double threshold_speed = 5.0;  ///< v_q [m/s]
};

double congestion_weight(const QueueFnParams& p, double v);

enum class SpeedAverage {
    Unweighted,       ///< plain mean over all cells
    DensityWeighted,  ///< weighted by cars per cell (rho * lanes * dx)
};

struct StepMetrics {
    double avg_speed = 0.0;  ///< [m/s]
    double queue = 0.0;      ///< sum of F(v) over all cells
};

StepMetrics step_metrics(const RoadNetwork& net, const SimState& state, const QueueFnParams& p = {},
                         SpeedAverage average = SpeedAverage::Unweighted);

struct CongestionMetrics {
    double avg_speed = 0.0;
    double queue_length = 0.0;
    std::int64_t samples = 0;
};

/// Arithmetic means over the series. Throws std::invalid_argument when empty.
CongestionMetrics aggregate(std::span<const StepMetrics> series);

/// Pearson correlation coefficient; NaN when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace pwtl
