#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace uipc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Every randomized component pulls a labelled stream from one user-facing
// seed, so subsystems cannot perturb each other's draws and any single
// stream can be reproduced in isolation.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0) {
    return splitmix64(splitmix64(base ^ fnv1a64(label)) ^ index);
}

// Deterministic random source. Distributions are hand-rolled on top of the
// (fully specified) mt19937_64 output; std::*_distribution is
// implementation-defined and would break bit-reproducibility across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), unbiased via rejection
    std::uint64_t uniform_int(std::uint64_t n) {
        for (;;) {
            std::uint64_t x = next_u64();
            std::uint64_t r = x % n;
            if (x - r <= UINT64_MAX - (n - 1)) return r;
        }
    }

    // Box-Muller (cosine branch only, so one normal costs two uniforms and
    // the stream layout stays trivial to reason about)
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
        return mean + stddev * z;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Moves a uniform sample of k elements (order randomized) to the front.
    template <class T>
    void partial_shuffle(std::vector<T>& v, std::size_t k) {
        if (k > v.size()) k = v.size();
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + uniform_int(v.size() - i);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace uipc
