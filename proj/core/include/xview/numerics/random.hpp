#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "xview/numerics/array.hpp"

namespace xview::num {

// xoshiro256++ with splitmix64 seeding. The generator and every distribution
// below are implemented here so that sequences are reproducible bit-for-bit
// for a given seed, independent of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n); n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n);
    // Box-Muller; the spare deviate is cached.
    double normal(double mu = 0.0, double sigma = 1.0);

    Array normal_array(std::vector<std::size_t> shape, double mu = 0.0, double sigma = 1.0);

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic seed derivation: a named stream of a master seed. Mixing is
// splitmix64 over (master, path elements), so derive(m, {a,b}) differs from
// derive(m, {b,a}) and from derive(m, {a}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);
std::uint64_t derive_seed(std::uint64_t master, const std::vector<std::uint64_t>& path);

}  // namespace xview::num
