#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace metaprobe {

// Deterministic RNG with fully specified output on every platform.
// mt19937_64 is pinned by the standard; the bounded draw is rejection
// sampling, so no implementation-defined distribution is involved.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stable per-item seed derivation (splitmix64 over the base seed mixed
// with an FNV-1a hash of the key), so record order never shifts streams.
std::uint64_t derive_seed(std::uint64_t base, const std::string& key);

}  // namespace metaprobe
