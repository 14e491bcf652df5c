#pragma once

#include <cstdint>
#include <vector>

namespace pwtl {

/// Density [cars/m per lane] and speed [m/s] of every cell of one road,
/// index 0 being the upstream cell.
struct EdgeState {
    std::vector<double> rho;
    std::vector<double> v;

    friend bool operator==(const EdgeState&, const EdgeState&) = default;
};

struct SimState {
    std::vector<EdgeState> edges;  ///< indexed like RoadNetwork::edges()
    double t = 0.0;                ///< [s]
    std::int64_t step = 0;

    friend bool operator==(const SimState&, const SimState&) = default;
};

}  // namespace pwtl
