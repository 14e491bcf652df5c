#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace pwtl::detail {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead downhill simplex (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops when the spread of simplex values falls below
/// `tolerance` relative to the best value, when the simplex collapses, or
/// after `max_iterations` iterations.
template <typename Fn>
SimplexResult nelder_mead(Fn&& f, std::vector<double> start, double step, int max_iterations,
                          double tolerance) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i + 1][i] += step;
    }
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        vals[i] = f(pts[i]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    SimplexResult result;
    int it = 0;
    for (; it < max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        const double spread = vals[worst] - vals[best];
        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t d = 0; d < n; ++d) {
                size = std::max(size, std::abs(pts[i][d] - pts[best][d]));
            }
        }
        if (spread <= tolerance * std::abs(vals[best]) + 1e-300 || size < 1e-13) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t d = 0; d < n; ++d) {
                centroid[d] += pts[i][d] / static_cast<double>(n);
            }
        }
        auto along = [&](double coef, std::vector<double>& out) {
            for (std::size_t d = 0; d < n; ++d) {
                out[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
            }
            return f(out);
        };

        const double fr = along(-1.0, trial);
        if (fr < vals[best]) {
            const double fe = along(-2.0, trial2);
            if (fe < fr) {
                pts[worst] = trial2;
                vals[worst] = fe;
            } else {
                pts[worst] = trial;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = trial;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const double fc = outside ? along(-0.5, trial2) : along(0.5, trial2);
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = trial2;
                vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) {
                        continue;
                    }
                    for (std::size_t d = 0; d < n; ++d) {
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    }
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(
        std::distance(vals.begin(), std::min_element(vals.begin(), vals.end())));
    result.x = pts[best];
    result.value = vals[best];
    result.iterations = it;
    return result;
}

}  // namespace pwtl::detail
