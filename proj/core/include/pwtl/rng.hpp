#pragma once

#include <cstdint>
#include <random>

namespace pwtl {

/// Seeded pseudo-random source with platform-independent draws.
///
/// std::mt19937_64 output is fixed by the standard, but the std::*_distribution
/// adaptors are not, so the bounded-integer, uniform-real and normal draws are
/// implemented here directly. Same seed, same sequence, on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal (Box-Muller, no caching).
    double normal();

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sub-stream `index` of a master seed. Any row or run can be
/// regenerated in isolation from (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace pwtl
