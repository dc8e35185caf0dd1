#ifndef TCBO_RANDOM_HPP
#define TCBO_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace tcbo {

// Seeded random stream. Normal variates use Box-Muller on top of the
// mt19937_64 stream so byte-level reproducibility does not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return (gen_() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
    }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace tcbo

#endif
