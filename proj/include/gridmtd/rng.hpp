#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace gridmtd {

/// Independent sub-streams drawn from the same trial seed.
enum class Stream : std::uint32_t { noise = 1, attack = 2, subset = 3, state = 4 };

/// Seed for trial `index` of an experiment: experiment_seed * 1e6 + index.
constexpr std::uint64_t stream_seed(std::uint64_t experiment_seed, std::uint64_t index) {
    return experiment_seed * 1'000'000ULL + index;
}

/// mt19937_64 with hand-written distributions. The standard library's
/// distributions are implementation-defined, so they are not used here;
/// the engine and std::seed_seq are fully specified and portable.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, Stream stream = Stream::noise) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n), unbiased by rejection.
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do v = engine_();
        while (v >= limit);
        return v % n;
    }

    /// Standard normal by Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gridmtd
