#include "xview/numerics/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xview::num {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
    // Lemire's multiply-shift with rejection; unbiased.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal(double mu, double sigma) {
    if (has_spare_) {
        has_spare_ = false;
        return mu + spare_ * sigma;
    }
    // 1-u keeps the log argument in (0,1].
    const double u = 1.0 - uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mu + r * std::cos(theta) * sigma;
}

Array Rng::normal_array(std::vector<std::size_t> shape, double mu, double sigma) {
    Array out(std::move(shape));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = normal(mu, sigma);
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = master ^ 0xA5A5A5A55A5A5A5Aull;
    splitmix64(state);
    for (std::uint64_t p : path) {
        state ^= splitmix64(state) ^ (p + 0x9E3779B97F4A7C15ull);
        splitmix64(state);
    }
    std::uint64_t s = state;
    return splitmix64(s);
}

std::uint64_t derive_seed(std::uint64_t master, const std::vector<std::uint64_t>& path) {
    std::uint64_t state = master ^ 0xA5A5A5A55A5A5A5Aull;
    splitmix64(state);
    for (std::uint64_t p : path) {
        state ^= splitmix64(state) ^ (p + 0x9E3779B97F4A7C15ull);
        splitmix64(state);
    }
    std::uint64_t s = state;
    return splitmix64(s);
}

}  // namespace xview::num
