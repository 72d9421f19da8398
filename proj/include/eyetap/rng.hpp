#pragma once

#include <cstdint>
#include <random>

namespace eyetap {

/**
 * Deterministic random source.
 *
 * Engine: std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Uniform doubles take the top 53 bits; normals use the
 * Box-Muller transform with the second variate cached. Nothing here goes
 * through std::*_distribution, whose algorithms differ between standard
 * libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Log-normal parameterised by its median and the SD of log(X).
    double lognormal(double median, double dispersion);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// SplitMix64 mix of (seed, stream); used to give each consumer its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace eyetap
