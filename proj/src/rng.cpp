#include "lrst/rng.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace lrst {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Acklam's rational approximation for the standard normal quantile.
double norm_quantile_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double mills_ratio(double x) {
    if (x >= -8.0) {
        const double phi = std::exp(-0.5 * x * x - kLogSqrt2Pi);
        return phi / norm_cdf(x);
    }
    // Laplace continued fraction: Phi(x) = phi(x) / (-x + 1/(-x + 2/(-x + ...)))
    double f = 0.0;
    for (int k = 24; k >= 1; --k) {
        f = static_cast<double>(k) / (-x + f);
    }
    return -x + f;
}

double log_norm_cdf(double x) {
    if (x >= -8.0) {
        return std::log(norm_cdf(x));
    }
    return -0.5 * x * x - kLogSqrt2Pi - std::log(mills_ratio(x));
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("norm_quantile: p must be in (0, 1)");
    }
    double x = norm_quantile_approx(p);
    // One Halley step against erfc brings the result to machine precision.
    const double e = norm_cdf(x) - p;
    const double u = e * std::exp(0.5 * x * x + kLogSqrt2Pi);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double log_factorial(std::int64_t n) {
    static const auto table = [] {
        std::array<double, 256> t{};
        t[0] = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            t[i] = t[i - 1] + std::log(static_cast<double>(i));
        }
        return t;
    }();
    if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
    if (n < 256) return table[static_cast<std::size_t>(n)];
    // Stirling series, accurate to well below 1e-12 at this size.
    const double x = static_cast<double>(n) + 1.0;
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return (x - 0.5) * std::log(x) - x + kLogSqrt2Pi +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0xa5a5a5a5a5a5a5a5ULL * (tag + 1));
    return splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return norm_quantile(uniform_open()); }

double Rng::student_t(double df) {
    if (df <= 0.0) throw std::invalid_argument("student_t: df must be positive");
    const double u = uniform_open();
    const double v = uniform_open();
    const double radius = std::sqrt(df * (std::pow(u, -2.0 / df) - 1.0));
    return radius * std::cos(2.0 * M_PI * v);
}

std::int64_t Rng::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) {
        throw std::invalid_argument("poisson: invalid mean");
    }
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        // Knuth product-of-uniforms method.
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform_open();
        while (prod > limit) {
            ++k;
            prod *= uniform_open();
        }
        return k;
    }
    // Hormann's PTRS transformed rejection, exact for mean >= 10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        double u = uniform_open() - 0.5;
        double v = uniform_open();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (kf < 0.0) continue;
        const std::int64_t k = static_cast<std::int64_t>(kf);
        if (us >= 0.07 && v <= v_r) return k;
        if (us < 0.013 && v > us) continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = -mean + kf * std::log(mean) - log_factorial(k);
        if (lhs <= rhs) return k;
    }
}

}  // namespace lrst
