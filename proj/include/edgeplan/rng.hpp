#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace edgeplan {

// splitmix64: stable seed derivation so sub-seeds never collide across
// (purpose, round, client) tuples regardless of platform.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = base;
    for (char c : purpose) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

// Deterministic generator with hand-rolled distributions. std::normal_distribution
// is implementation-defined, which would break bit-reproducibility guarantees.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed == 0 ? 0x1234567887654321ULL : seed) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_ + 0x2545f4914f6cdd1dULL);
        return state_;
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

    // Box-Muller, one value per call (the pair's second half is discarded to
    // keep the consumption pattern position-independent).
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// FNV-1a over raw bytes; used for scenario fingerprints in run manifests.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace edgeplan
