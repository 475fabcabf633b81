#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cirl {

/// Deterministic, hand-rolled PRNG (splitmix64 core).
///
/// All sampling in the project goes through this type so that a fixed seed
/// reproduces identical runs byte-for-byte, independent of the standard
/// library's distribution implementations. Streams are derived from a root
/// seed with child(), which is how per-episode / per-iteration parallelism
/// stays deterministic: stream i is a pure function of (root_seed, i).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::next_below: n == 0");
        // Rejection-free modulo is fine here: n is tiny relative to 2^64, and
        // determinism matters more than the ~n/2^64 bias.
        return next_u64() % n;
    }

    /// Standard normal via Box-Muller on two fresh uniforms.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Index sample from an (unnormalized is not allowed) probability row.
    /// Inverse-CDF scan; the final index absorbs any rounding remainder.
    int next_categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("Rng::next_categorical: empty row");
        const double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size() - 1);
    }

    /// Deterministic child stream for index i. Documented contract: the
    /// stream is splitmix64 seeded with mix(parent_seed, i); identical
    /// (seed, i) pairs give identical streams within one build.
    static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    Rng child(std::uint64_t index) const { return Rng(child_seed(state_, index)); }

    std::uint64_t state() const { return state_; }

  private:
    std::uint64_t state_;
};

} // namespace cirl
