// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cmath>

namespace hypersindy {

// xoshiro256++ generator with splitmix64 seeding.
//
// All randomness in the project flows through this type so that runs are
// reproducible across platforms. Substreams are derived from a (seed, stream)
// pair: the stream id is mixed into the splitmix64 chain before the state is
// filled, so distinct ids give statistically independent sequences. The
// conventional stream ids used by the library live in the `streams` namespace
// below; per-item streams combine a tag with an index via `derive`.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        for (auto& word : state_) {
            word = splitmix64(x);
        }
    }

    static Rng derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
        return Rng(seed, tag * 0x100000001ULL + index);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in the open interval (0, 1); safe for logit transforms.
    double uniform_open01() {
        double u;
        do {
            u = uniform01();
        } while (u <= 0.0);
        return u;
    }

    // Standard normal via Box-Muller with a cached spare draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates shuffle of [0, n) indices written into `out`.
    template <typename Index>
    void shuffle_indices(Index* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = static_cast<Index>(i);
        }
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_u64() % i);
            const Index tmp = out[i - 1];
            out[i - 1] = out[j];
            out[j] = tmp;
        }
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stream tags. One substream per independent consumer of randomness; anything
// indexed (trajectories, epochs, ensemble replicates) combines the tag with
// the index through Rng::derive.
namespace streams {
inline constexpr std::uint64_t simulation = 1;   // trajectory generation
inline constexpr std::uint64_t init = 2;         // parameter initialization
inline constexpr std::uint64_t encoder_eps = 3;  // reparameterization noise
inline constexpr std::uint64_t mask_eps = 4;     // hard-concrete uniforms
inline constexpr std::uint64_t prior = 5;        // z ~ N(0, I) draws
inline constexpr std::uint64_t shuffle = 6;      // epoch shuffles
inline constexpr std::uint64_t bootstrap = 7;    // ensemble resampling
inline constexpr std::uint64_t generate = 8;     // trajectory generation from a model
inline constexpr std::uint64_t experiment = 9;   // multi-seed experiment fan-out
} // namespace streams

} // namespace hypersindy
