#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bpmap {

// xoshiro256** with splitmix64 seeding. Substreams are derived by mixing a
// stream id into the seeding path, so replicate r / attempt a pairs map to
// reproducible generators regardless of worker scheduling.
class Rng {
  public:
    Rng() : Rng(0) {}

    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    static Rng from_stream(uint64_t seed, uint64_t stream) {
        uint64_t x = seed;
        uint64_t a = splitmix64(x);
        uint64_t key = stream + 0x9E3779B97F4A7C15ull;
        key = mix(key);
        Rng r;
        uint64_t y = a ^ key;
        for (auto& w : r.state_) w = splitmix64(y);
        return r;
    }

    Rng substream(uint64_t id) const {
        uint64_t key = mix(state_[0] ^ mix(id + 0x9E3779B97F4A7C15ull));
        Rng r;
        uint64_t y = key ^ state_[2];
        for (auto& w : r.state_) w = splitmix64(y);
        return r;
    }

    uint64_t next_u64() {
        uint64_t* s = state_.data();
        uint64_t result = rotl(s[1] * 5, 7) * 9;
        uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n).
    uint64_t uniform_below(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in {lo, ..., hi} inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(uniform_below(static_cast<uint64_t>(hi - lo + 1)));
    }

  private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
};

}  // namespace bpmap
