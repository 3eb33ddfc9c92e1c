#include "sumdist/rng.hpp"

namespace sumdist {

namespace {

// splitmix64; used only to decorrelate (seed, stream) pairs before seeding
// the real engine.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

RngConfig RngConfig::fork(std::uint64_t tag) const {
    return RngConfig{seed, mix(stream + 0x517cc1b727220a95ULL * (tag + 1))};
}

std::mt19937_64 make_engine(const RngConfig& rng) {
    const std::uint64_t a = mix(rng.seed);
    const std::uint64_t b = mix(rng.seed ^ mix(rng.stream + 1));
    // seed_seq keeps only 32 bits per value, so split explicitly
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace sumdist
