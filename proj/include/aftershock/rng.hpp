#pragma once

#include <cstdint>
#include <random>

namespace aftershock {

// SplitMix64 finaliser; used to derive independent substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic random stream identified by (seed, stream index).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Variates are produced by explicit transforms rather than the
/// implementation-defined std:: distributions:
///   - uniform: top 53 bits scaled to (0, 1)
///   - normal: Box-Muller (both outputs used)
///   - gamma: Marsaglia-Tsang squeeze, with U^(1/k) boost for shape k < 1
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t index)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL))) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept;

    /// Gamma(shape, scale = 1).
    double gamma(double shape) noexcept;

    std::uint64_t next_u64() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace aftershock
