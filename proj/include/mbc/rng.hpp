#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mbc {

// SplitMix64 finalizer; used to derive independent child seeds from a master
// seed so parallel restarts give identical results regardless of scheduling.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master + index * 0x9e3779b97f4a7c15ULL);
}

// Seedable generator with platform-independent draws. mt19937_64 output is
// fixed by the standard; the uniform mappings below avoid std distributions,
// whose results vary across library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t uniform_int(std::uint64_t n) { // [0, n)
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> out(k);
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(uniform_int(n - i));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace mbc
