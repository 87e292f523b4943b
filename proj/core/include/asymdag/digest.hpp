#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace asymdag {

using Bytes = std::vector<uint8_t>;

// FNV-1a, 64 bit. Simulation-grade content addressing, not cryptographic.
inline uint64_t fnv64(const uint8_t* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}
inline uint64_t fnv64(const Bytes& b, uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv64(b.data(), b.size(), seed);
}
inline uint64_t fnv64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv64(reinterpret_cast<const uint8_t*>(s.data()), s.size(), seed);
}

// splitmix64: the seedable PRF used for scheduling choices and the coin.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic stream of pseudorandom words; replay-identical for a seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dull)) {}
    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        return splitmix64(state_);
    }
    // Bounded draw by rejection, so results do not depend on bound bias.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) return 0;
        uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % bound) - 1;
        uint64_t v;
        do {
            v = next();
        } while (v > limit);
        return v % bound;
    }

private:
    uint64_t state_;
};

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

inline Bytes bytes_of(const std::string& s) {
    return Bytes(s.begin(), s.end());
}
inline std::string string_of(const Bytes& b) {
    return std::string(b.begin(), b.end());
}

}  // namespace asymdag
