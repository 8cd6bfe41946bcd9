#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cpminimax {

/// Version tag of the seed-derivation and sampling scheme below. Any change to
/// the derivation chain, the uniform mapping or the normal sampler must bump
/// this string, since stored seeds promise bit-identical output.
inline constexpr const char* kRngSchemeVersion = "cpminimax-rng/1";

std::uint64_t splitmix64(std::uint64_t x);

/// Chained seed derivation used by RandomStream::derive (scheme v1).
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> tags);

/// Deterministic random stream. Scheme v1:
///  - stream seed = splitmix64 chain over (master, tag_1, ..., tag_k), where
///    each step is s = splitmix64(s ^ (tag + 0x9E3779B97F4A7C15));
///  - engine: std::mt19937_64 seeded with the chained value;
///  - uniform(): top 53 bits mapped to [0, 1);
///  - normal(): Box-Muller on (1 - uniform(), uniform()) with the second
///    variate cached;
///  - uniform_int(lo, hi): rejection sampling on the raw 64-bit output.
/// mt19937_64 and this mapping are platform-independent.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream derive(std::uint64_t master,
                               std::initializer_list<std::uint64_t> tags);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal();

    /// Uniform integer on [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace cpminimax
