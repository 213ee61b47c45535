#pragma once

#include <cstdint>
#include <span>

namespace pertlat {

// splitmix64 step; the workhorse for seeding and site-keyed streams.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless mix of a seed with a tag (trial index, coordinate, ...).
inline uint64_t mix64(uint64_t seed, uint64_t tag) {
    uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL + tag * 0xD1B54A32D192ED03ULL);
    return splitmix64(s);
}

// Derived seed for independent trial workers.
inline uint64_t trial_seed(uint64_t master, uint64_t trial) {
    return mix64(master ^ 0xA0761D6478BD642FULL, trial);
}

// Deterministic per-site random stream, keyed by (seed, site coordinates).
// Windows of different sizes agree on shared sites because the stream
// depends on nothing but the key.
class SiteRng {
public:
    SiteRng(uint64_t seed, std::span<const int64_t> site) {
        uint64_t s = seed ^ 0x9E3779B97F4A7C15ULL;
        splitmix64(s);
        for (size_t j = 0; j < site.size(); ++j) {
            s ^= mix64(static_cast<uint64_t>(site[j]), j + 1);
            splitmix64(s);
        }
        state_ = s;
    }

    explicit SiteRng(uint64_t seed) : state_(seed ^ 0x2545F4914F6CDD1DULL) { splitmix64(state_); }

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on (0,1]; never returns 0 so log() is safe.
    double uniform01() {
        uint64_t x = next_u64() >> 11;
        return (static_cast<double>(x) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; pairs are cached.
    double normal();

private:
    uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace pertlat
