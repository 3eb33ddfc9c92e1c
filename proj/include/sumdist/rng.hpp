#pragma once

#include <cstdint>
#include <random>

namespace sumdist {

/// Seed plus stream id. Distinct streams derived from one seed behave as
/// statistically independent generators, so parallel stages can each take
/// their own fork without coordinating.
struct RngConfig {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Derives a child stream. fork(a) != fork(b) for a != b.
    [[nodiscard]] RngConfig fork(std::uint64_t tag) const;
};

/// Engine construction is the single point where (seed, stream) turns into
/// randomness; everything downstream is a pure function of it.
std::mt19937_64 make_engine(const RngConfig& rng);

} // namespace sumdist
