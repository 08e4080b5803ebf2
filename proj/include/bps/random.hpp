#pragma once

#include <cstdint>
#include <random>

namespace bps {

// Seed for run `index` of an experiment with the given master seed: the SplitMix64
// finalizer applied to master + (index+1) * golden-ratio increment. Golden tests pin
// the exact outputs; changing this function invalidates every frozen CSV.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Two-level derivation for nested fan-out (e.g. sweep point -> trial batch).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t outer,
                                    std::uint64_t inner) noexcept
{
    return derive_seed(derive_seed(master, outer), inner);
}

// Single-owner uniform stream. Every random quantity in the library is produced by an
// inverse-quantile transform of draws from this stream, so a run is reproducible from
// its seed alone and two processes can be coupled by sharing one stream.
//
// The engine is std::mt19937_64, whose output sequence for a given seed is fixed by the
// standard; the uniform conversion below is ours, so draws are identical on every platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    RandomStream(const RandomStream&) = delete;
    RandomStream& operator=(const RandomStream&) = delete;
    RandomStream(RandomStream&&) = default;
    RandomStream& operator=(RandomStream&&) = default;

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n), n >= 1. Used by the coin-level engine.
    std::uint64_t next_below(std::uint64_t n)
    {
        std::uint64_t x, r;
        do {
            x = engine_();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bps
