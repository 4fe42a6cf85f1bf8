#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace wsvod {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG with explicitly coded distributions so that runs are
// reproducible across compilers and standard libraries (std::*_distribution
// algorithms are implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : s_(seed) {
        // decorrelate nearby seeds
        for (int i = 0; i < 4; ++i) splitmix64(s_);
    }

    uint64_t next_u64() { return splitmix64(s_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive
    int64_t uniform_int(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Independent stream derived from this one's seed and a label; does not
    // advance this generator.
    Rng fork(uint64_t stream) const {
        uint64_t h = s_ ^ (0xa0761d6478bd642fULL + stream * 0xe7037ed1a0b428dbULL);
        return Rng(h);
    }

private:
    uint64_t s_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace wsvod
