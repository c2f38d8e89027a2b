#pragma once
// Deterministic randomness shared by shuffling, noise injection, and the
// synthetic data generator. Everything random in this library flows through
// SplitMix64 so a whole run is replayable from a single 64-bit seed on any
// platform and toolchain (std::shuffle and the std distributions are
// implementation-defined, so they are deliberately not used here).

#include <cstdint>
#include <string_view>
#include <vector>

namespace tourrank {

// Generator identity recorded in run metadata. Bump the suffix if the
// algorithm or the shuffle ever changes, so old seeds are not silently
// replayed with different semantics.
inline constexpr std::string_view kRngId = "splitmix64-fisher-yates/1";

// SplitMix64 by Steele, Lea & Flood; 64-bit state, full-period, public domain.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw from [0, bound) by rejection sampling.
    constexpr std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

    // Uniform double in [0, 1), 53 bits of precision.
    constexpr double unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Documented mixing function used to derive sub-stream seeds, e.g.
// mix_seed(mix_seed(mix_seed(run_seed, round), stage), group).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x1d8e4e27c47d124fULL));
    return g.next();
}

// FNV-1a over arbitrary bytes; used to key per-request noise streams.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void seeded_shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace tourrank
