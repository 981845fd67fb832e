#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace polar {

// Seeded generator with distributions that do not depend on the standard
// library implementation, so generated worlds and scenarios are identical
// across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    // Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool coin(double p = 0.5) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(xs[i - 1], xs[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& xs) {
        return xs[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(xs.size()) - 1))];
    }

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from a base seed and a label.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace polar
