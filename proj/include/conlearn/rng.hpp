#pragma once

#include <cstdint>
#include <limits>

namespace conlearn {

/// Keys a substream by (experiment seed, purpose tag, task index, sample index).
/// Two keys that differ in any component give unrelated streams, so data for a
/// task can be regenerated independently of the order tasks are visited in.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t tag = 0;
    std::uint64_t task = 0;
    std::uint64_t sample = 0;
};

/// Substream purposes. Values are part of the reproducibility contract.
enum class StreamTag : std::uint64_t {
    Features = 1,
    Noise = 2,
    TaskParameter = 3,
    Excitation = 4,
    Order = 5,
    Oracle = 6,
};

inline StreamKey make_key(std::uint64_t seed, StreamTag tag, std::uint64_t task = 0, std::uint64_t sample = 0)
{
    return {seed, static_cast<std::uint64_t>(tag), task, sample};
}

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// SplitMix64 generator seeded from a hashed StreamKey; satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(const StreamKey& key) noexcept
    {
        std::uint64_t h = mix64(key.seed + 0x9e3779b97f4a7c15ULL);
        h = mix64(h ^ (key.tag * 0xd1b54a32d192ed03ULL));
        h = mix64(h ^ (key.task + 0x8cb92ba72f3d8dd7ULL));
        h = mix64(h ^ (key.sample * 0xaef17502108ef2d9ULL + 1));
        state_ = h;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_ = 0;
};

} // namespace conlearn
