#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lrst/losses.hpp"
#include "lrst/rng.hpp"
#include "lrst/tensor.hpp"
#include "lrst/tucker.hpp"

namespace lrst {

/// Spectrum request for the low-rank generator: either an l_inf target or a
/// (lambda_min, lambda_max) pair matched within 5 percent by resampling.
struct SpectrumTarget {
    enum class Kind { none, linf, lambda_pair } kind = Kind::none;
    double linf = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    static SpectrumTarget none() { return {}; }
    static SpectrumTarget max_entry(double v) { return {Kind::linf, v, 0.0, 0.0}; }
    static SpectrumTarget lambdas(double lo, double hi) { return {Kind::lambda_pair, 0.0, lo, hi}; }
};

/// HOSVD of a +-2 clipped standard normal tensor, rescaled to the requested
/// spectrum. Exact multilinear rank r. A positive spikiness_cap resamples
/// (deterministic derived substreams) until Spiki(T) stays below the cap,
/// i.e. until the draw satisfies the spikiness assumption at that mu1.
DenseTensor gen_lowrank(const std::vector<Index>& dims, const std::vector<Index>& ranks,
                        std::uint64_t seed, const SpectrumTarget& target = SpectrumTarget::none(),
                        double spikiness_cap = 0.0);

enum class ValueLaw { gaussian, constant };

/// Entries nonzero independently with probability alpha; values amp * N(0,1)
/// or the constant amp. realized_alpha, when given, receives the max slice
/// fill fraction.
SparseTensor gen_sparse(const std::vector<Index>& dims, double alpha, double amp,
                        std::uint64_t seed, ValueLaw law, double* realized_alpha = nullptr);

struct NoiseLaw {
    enum class Kind { none, gaussian, student_t } kind = Kind::none;
    double sigma = 0.0;   // gaussian std deviation
    double df = 3.0;      // student-t degrees of freedom
    double scale = 1.0;   // student-t scale

    static NoiseLaw none() { return {}; }
    static NoiseLaw gaussian(double sigma) { return {Kind::gaussian, sigma, 0.0, 0.0}; }
    static NoiseLaw student_t(double df, double scale) { return {Kind::student_t, 0.0, df, scale}; }
};

/// Adds i.i.d. noise. For student_t the post-scale standard deviation
/// scale * sqrt(df / (df - 2)) is reported through effective_sigma; df <= 2
/// is rejected.
DenseTensor add_noise(const DenseTensor& t, const NoiseLaw& law, std::uint64_t seed,
                      double* effective_sigma = nullptr);

DenseTensor sample_bernoulli(const DenseTensor& logits, const LinkFunction& link,
                             std::uint64_t seed);

/// Independent Poisson draws with mean I * exp(t); rejects means above 1e12.
DenseTensor sample_poisson(const DenseTensor& t, double intensity, std::uint64_t seed);

/// Everything needed to regenerate one synthetic problem.
struct InstanceSpec {
    ModelKind model = ModelKind::gaussian;
    std::vector<Index> dims;
    std::vector<Index> rank;
    double alpha = 0.0;
    double amp = 1.0;
    ValueLaw value_law = ValueLaw::gaussian;
    double sparse_linf = 0.0;  // > 0: rescale the sparse draw to this max entry
    double spikiness_cap = 0.0;
    SpectrumTarget spectrum;
    NoiseLaw noise;
    LinkFunction link;
    double intensity = 10.0;
    std::uint64_t seed = 0;
};

struct Instance {
    DenseTensor observation;
    DenseTensor truth_t;
    SparseTensor truth_s;
    InstanceSpec spec;
    double realized_alpha = 0.0;
    double effective_sigma = 0.0;
    double truth_spikiness = 0.0;
    double truth_lambda_min = 0.0;
    double truth_lambda_max = 0.0;
};

/// Composes T*, S* and the model-specific observation from the spec;
/// substreams are derived from spec.seed with fixed tags.
Instance make_instance(const InstanceSpec& spec);

/// Loss model observing this instance (Gaussian A, Bernoulli A + link, or
/// Poisson counts + intensity).
LossModel instance_model(const Instance& inst);

}  // namespace lrst
