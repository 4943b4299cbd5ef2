#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mtt {

// Seeded PRNG with hand-rolled samplers on top of mt19937_64. The standard
// library distributions are not bit-reproducible across implementations, so
// every sampler used for scan generation is written out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    double uniform() {  // [0, 1)
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double a, double b) { return a + uniform() * (b - a); }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call (the spare is kept).
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mean + stddev * r * std::cos(2.0 * M_PI * u2);
    }

    // Knuth product method; fine for the lambda ~ 50 used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= uniform();
        } while (prod > limit);
        return k - 1;
    }

    // Bounded draw for shuffles; modulo bias is irrelevant at these sizes.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    // Independent stream for replica i or a named substream.
    Rng derive(std::uint64_t stream) const {
        return Rng(seed_ ^ splitmix64(0x51ed2701ULL + stream));
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mtt
