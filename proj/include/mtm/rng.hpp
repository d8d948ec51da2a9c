#ifndef MTM_RNG_HPP
#define MTM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mtm {

// One splitmix64 step; advances the state and returns the next value.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed-splitting rule used everywhere a sub-stream is derived from a
// master seed: fold each id into a splitmix64 state and take one more
// step. Streams for distinct id tuples are statistically independent.
inline std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids)
{
    std::uint64_t s = master;
    splitmix64(s);
    for (std::uint64_t id : ids) {
        s ^= id + 0x9e3779b97f4a7c15ULL;
        splitmix64(s);
    }
    return splitmix64(s);
}

// Deterministic random stream owned by exactly one consumer (one chain,
// one experiment run, one Monte Carlo row). All transforms are written
// out explicitly so a seed pins the full draw sequence bit-for-bit.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> ids)
    {
        return RngStream(mix_seed(master, ids));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53 random bits.
    double uniform01()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on the open interval (0, 1); safe inside log().
    double uniform01_open()
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller, cosine branch only. Two uniforms
    // per draw, no cached state.
    double normal()
    {
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * kPi * u2);
    }

    // Standard Gumbel; -log(-log(U)) with U in (0, 1).
    double gumbel()
    {
        return -std::log(-std::log(uniform01_open()));
    }

    // Uniform integer in [0, n); unbiased via threshold rejection.
    std::size_t uniform_index(std::size_t n)
    {
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (-bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::size_t>(r % bound);
        }
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
};

}  // namespace mtm

#endif  // MTM_RNG_HPP
