#pragma once

// Portable seeded randomness.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions and std::shuffle are not specified
// bit-for-bit, so bounded draws and shuffles are implemented here:
//
//   uniform_below(n): draw x from the engine, reject while
//                     x < (2^64 mod n), return x mod n.
//   shuffle:          Fisher-Yates from the back, swapping i with
//                     uniform_below(i + 1) for i = size-1 .. 1.
//
// Any implementation of MT19937-64 reproduces these sequences exactly.

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace ild {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = -n % n;  // 2^64 mod n
        while (true) {
            const std::uint64_t x = engine_();
            if (x >= limit) return x % n;
        }
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ild
