#pragma once

#include <cstdint>
#include <random>

namespace proxidtr {

// mt19937_64 with a platform-independent mapping to doubles. The standard
// distributions are implementation-defined, so they are avoided here to keep
// datasets bit-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int bernoulli(double p) { return uniform() < p ? 1 : 0; }
    // Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

// Independent stream seed for (seed, stream id); used to split one seed into
// per-component or per-fold generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace proxidtr
