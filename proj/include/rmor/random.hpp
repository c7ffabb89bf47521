#pragma once
//
// Reproducible random numbers.
//
// The bit stream is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The standard distributions are not (their algorithms are
// implementation-defined), so the transforms below are written out here:
// uniforms take the top 53 bits, normals use the Box-Muller transform and
// bounded integers use rejection sampling.
//

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rmor {

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// uniform on [0, 1)
    double uniform()
    {
        return static_cast< double >(engine_() >> 11) * 0x1.0p-53;
    }

    /// uniform on (0, 1]
    double uniform_open_zero()
    {
        return (static_cast< double >(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        const double u1    = uniform_open_zero();
        const double u2    = uniform();
        const double r     = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_             = r * std::sin(theta);
        has_spare_         = true;
        return r * std::cos(theta);
    }

    /// uniform integer in [0, bound), bound > 0
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do
            x = engine_();
        while (x >= limit);
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
    double          spare_     = 0.0;
    bool            has_spare_ = false;
};

} // namespace rmor
