#ifndef ECX_RNG_HPP
#define ECX_RNG_HPP

#include <cstdint>

namespace ecx {

// Counter-based generator: every variate is a pure function of
// (seed, stream, counter), so Monte Carlo draws can be evaluated in any
// order, or in parallel, and still reproduce bit-identically.
//
// The mixing function is the splitmix64 finalizer, applied to the seed and
// the two coordinates in sequence.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        std::uint64_t h = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ stream);
        h = mix(h ^ counter);
        return h;
    }

    // Uniform in [0, 1): 53 significand bits.
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p, std::uint64_t stream, std::uint64_t counter) const {
        return uniform(stream, counter) < p;
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace ecx

#endif  // ECX_RNG_HPP
