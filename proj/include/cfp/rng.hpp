#pragma once

#include <cstdint>
#include <random>

namespace cfp {

/// splitmix64 step; used only to expand seeds into independent stream states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seedable, portable random stream.
///
/// A (seed, stream) pair selects an independent substream: the seed is run
/// through splitmix64, xor-folded with the stream id, and expanded again
/// before seeding a std::mt19937_64 engine. Both the engine output and the
/// uniform-double conversion (53-bit mantissa) are fully specified, so
/// sequences are bit-identical across platforms and runs.
class SplitStream {
public:
    SplitStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(derive(seed, stream)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ (stream + 0x9e3779b97f4a7c15ULL);
        return splitmix64(s);
    }

    std::mt19937_64 engine_;
};

}  // namespace cfp
