#pragma once

#include <cstdint>

namespace lrst {

// Standard-normal helpers shared by the probit link and the samplers.
double norm_cdf(double x);
double log_norm_cdf(double x);
/// phi(x) / Phi(x); continued-fraction form in the far left tail.
double mills_ratio(double x);
double norm_quantile(double p);
/// log(n!) without touching the lgamma global state.
double log_factorial(std::int64_t n);

/// xoshiro256++ seeded through splitmix64. All distributions are derived via
/// inverse-CDF or standard transforms so streams reproduce bit-identically
/// for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform();
    /// Uniform on (0, 1), never exactly zero.
    double uniform_open();
    double normal();
    /// Bailey's polar transform; any df > 0.
    double student_t(double df);
    std::int64_t poisson(double mean);

    /// Independent deterministic substream for a named purpose.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

private:
    std::uint64_t state_[4];
};

}  // namespace lrst
