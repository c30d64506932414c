#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace trilayer {

// Deterministic random source used by every randomized stage.
//
// Wraps std::mt19937_64, whose output sequence is fully specified by the
// standard, and derives all variates with explicit arithmetic instead of
// the standard distribution classes (whose algorithms are implementation
// defined). Results are therefore reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n > 0. Modulo reduction; the bias is
    // below 2^-40 for every n used in this project.
    std::uint64_t uniform_int(std::uint64_t n) { return engine_() % n; }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view text);

// splitmix64 finalizer; decorrelates related seed values.
std::uint64_t mix64(std::uint64_t x);

// Stable seed derivation. Every randomized stage of a run draws its seed
// from the global seed plus a textual label (stage name and entity ids),
// so stages never share a stream and adding an entity cannot shift the
// seed of another.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label);

}  // namespace trilayer
