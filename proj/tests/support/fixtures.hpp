#pragma once

#include <filesystem>
#include <string>

#include "pwtl/network.hpp"
#include "pwtl/solver.hpp"

namespace pwtl::test {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(PWTL_FIXTURE_DIR) / name;
}

inline RoadNetwork load_fixture(const std::string& stem) { return load_network(fixture(stem + ".json")); }

/// Initial state of a fixture from its committed observed-speed file.
inline SimState fixture_state(const RoadNetwork& net, const std::string& stem, const SimParams& params = {}) {
    return initialize(net, read_observed_speeds(fixture(stem + "_speeds.csv")), params);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("pwtl_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace pwtl::test
