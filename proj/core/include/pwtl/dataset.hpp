#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pwtl/signals.hpp"
#include "pwtl/solver.hpp"

namespace pwtl {

/// One simulated (signal configuration -> congestion metrics) sample.
struct DatasetRow {
    std::int64_t run_id = 0;
    std::uint64_t seed = 0;                   ///< configuration draw seed
    std::vector<IntersectionSignal> signals;  ///< in Dataset::intersection_ids order
    double avg_speed = 0.0;                   ///< NaN when the run failed
    double queue_length = 0.0;                ///< NaN when the run failed
    std::string status = "ok";                ///< "ok" or "failed: <diagnostic>"

    bool ok() const { return status == "ok"; }
    friend bool operator==(const DatasetRow&, const DatasetRow&);
};

struct Dataset {
    std::vector<std::string> intersection_ids;  ///< sorted signalized ids
    std::vector<DatasetRow> rows;               ///< ordered by run_id

    std::size_t ok_count() const;
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct GenerateOptions {
    std::int64_t runs = 1;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    RunOptions run;  ///< horizon / warmup / queue parameters of each run
};

/// Runs `runs` simulations from the same initial state. Run i draws its
/// configuration from Rng(derive_seed(seed, i)). The table does not depend on
/// the worker count. A run that throws is recorded with status "failed: ..."
/// and NaN metrics; generation continues.
///
/// Throws std::invalid_argument for runs < 1 and CflError before any run
/// when the time step is unstable.
Dataset generate(const RoadNetwork& net, const SimState& initial, const SimParams& params,
                 const GenerateOptions& options);

/// Header: run_id,seed,<id>_red,<id>_green,<id>_offset,...,avg_speed,queue_length,status
void write_csv(const Dataset& table, const std::filesystem::path& path);

/// Throws ParseError naming a missing column or the line of a malformed row.
Dataset read_csv(const std::filesystem::path& path);

}  // namespace pwtl
