#include "pwtl/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pwtl {

double congestion_weight(const QueueFnParams& p, double v) {
    return 1.0 / (1.0 + std::exp(p.steepness * (v - p.threshold_speed)));
}

StepMetrics step_metrics(const RoadNetwork& net, const SimState& state, const QueueFnParams& p,
                         SpeedAverage average) {
    double speed_sum = 0.0;
    double weight_sum = 0.0;
    double queue = 0.0;
    for (std::size_t e = 0; e < state.edges.size(); ++e) {
        const auto& cells = state.edges[e];
        const double cars_per_density = net.edge(e).lanes * net.cell_length(e);
        for (std::size_t i = 0; i < cells.v.size(); ++i) {
            const double w =
                average == SpeedAverage::Unweighted ? 1.0 : cells.rho[i] * cars_per_density;
            speed_sum += w * cells.v[i];
            weight_sum += w;
            queue += congestion_weight(p, cells.v[i]);
        }
    }
    return {weight_sum > 0.0 ? speed_sum / weight_sum : 0.0, queue};
}

CongestionMetrics aggregate(std::span<const StepMetrics> series) {
    if (series.empty()) {
        throw std::invalid_argument("aggregate: empty metric series");
    }
    double speed = 0.0;
    double queue = 0.0;
    for (const auto& s : series) {
        speed += s.avg_speed;
        queue += s.queue;
    }
    const auto n = static_cast<double>(series.size());
    return {speed / n, queue / n, static_cast<std::int64_t>(series.size())};
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("pearson: need two equally sized series of length >= 2");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace pwtl
