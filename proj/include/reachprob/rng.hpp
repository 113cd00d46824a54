#pragma once

#include <cstdint>

namespace reachprob {

/// SplitMix64 mixing step (Steele/Lea/Flood finalizer). Bijective on u64.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// SplitMix64 pseudorandom stream. Chosen as the project-wide generator:
/// 64-bit state, portable integer arithmetic, identical output on every
/// platform and thread schedule for a given seed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random mantissa bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    /// tiny (control/successor counts) relative to 2^64, bias < 2^-50.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and up to four
/// coordinates (purpose tag, time index, grid point, control slot). Every
/// random draw in the project flows through streams derived this way, which
/// makes results independent of thread count and evaluation order.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag,
                                   std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ tag);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

namespace stream_tag {
/// Backward-recursion sampling: (tag, k of the field being produced,
/// flat grid index, control slot).
inline constexpr std::uint64_t kSolve = 0x534F4C56;
/// Forward rollouts: (tag, point index, rollout index, 0).
inline constexpr std::uint64_t kRollout = 0x524F4C4C;
/// Optimal-policy evaluation during rollouts: (tag, k, state hash, slot).
inline constexpr std::uint64_t kPolicy = 0x504F4C49;
} // namespace stream_tag

/// Control slot used when one disturbance stream is shared across all
/// controls at a grid point (common random numbers).
inline constexpr std::uint64_t kCommonNoiseSlot = ~0ull;

} // namespace reachprob
