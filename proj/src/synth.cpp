#include "lrst/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lrst {

namespace {

enum SeedTag : std::uint64_t {
    kTagLowrank = 1,
    kTagSparse = 2,
    kTagNoise = 3,
    kTagObservation = 4,
    kTagAttempt = 100,
};

DenseTensor clipped_normal_tensor(const Shape& shape, std::uint64_t seed) {
    Rng rng(seed);
    DenseTensor t(shape);
    for (double& v : t.data()) {
        v = std::clamp(rng.normal(), -2.0, 2.0);
    }
    return t;
}

}  // namespace

DenseTensor gen_lowrank(const std::vector<Index>& dims, const std::vector<Index>& ranks,
                        std::uint64_t seed, const SpectrumTarget& target, double spikiness_cap) {
    const Shape shape(dims);
    const std::uint64_t base = Rng::derive_seed(seed, kTagLowrank);
    const bool want_pair = target.kind == SpectrumTarget::Kind::lambda_pair;
    if (target.kind == SpectrumTarget::Kind::linf && target.linf <= 0.0) {
        throw std::invalid_argument("gen_lowrank: l_inf target must be positive");
    }
    if (want_pair && !(target.lambda_max >= target.lambda_min && target.lambda_min > 0.0)) {
        throw std::invalid_argument("gen_lowrank: invalid lambda targets");
    }
    // Rescaling is global (preserves incoherence) and fixes only the overall
    // scale, so draws are resampled until the raw spectrum ratio and the
    // spikiness cap are satisfied.
    const double want_ratio = want_pair ? target.lambda_max / target.lambda_min : 0.0;
    constexpr int kMaxAttempts = 500;
    constexpr double kRatioTol = 0.04;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const std::uint64_t s =
            attempt == 0 ? base : Rng::derive_seed(base, kTagAttempt + attempt);
        DenseTensor t = tucker_to_dense(hosvd(clipped_normal_tensor(shape, s), ranks));
        if (spikiness_cap > 0.0 && spikiness(t) > spikiness_cap) continue;
        if (!want_pair) {
            if (target.kind == SpectrumTarget::Kind::linf) {
                t *= target.linf / t.max_abs();
            }
            return t;
        }
        SpectralSummary summary;
        try {
            summary = spectral_summary(t, ranks);
        } catch (const RankDeficientError&) {
            continue;
        }
        if (std::abs(summary.kappa0 - want_ratio) <= kRatioTol * want_ratio) {
            t *= std::sqrt(target.lambda_min * target.lambda_max /
                           (summary.lambda_min * summary.lambda_max));
            return t;
        }
    }
    std::ostringstream msg;
    msg << "gen_lowrank: no draw matched the requested spectrum within " << kMaxAttempts
        << " attempts";
    throw std::runtime_error(msg.str());
}

SparseTensor gen_sparse(const std::vector<Index>& dims, double alpha, double amp,
                        std::uint64_t seed, ValueLaw law, double* realized_alpha) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw std::invalid_argument("gen_sparse: alpha must be in [0, 1]");
    }
    const Shape shape(dims);
    Rng rng(Rng::derive_seed(seed, kTagSparse));
    std::vector<SparseTensor::Entry> entries;
    for (Index flat = 0; flat < shape.size(); ++flat) {
        if (rng.uniform() < alpha) {
            const double value = law == ValueLaw::gaussian ? amp * rng.normal() : amp;
            if (value != 0.0) entries.push_back({flat, value});
        }
    }
    SparseTensor out(shape, std::move(entries));
    if (realized_alpha != nullptr) {
        *realized_alpha = out.max_slice_fraction();
    }
    return out;
}

DenseTensor add_noise(const DenseTensor& t, const NoiseLaw& law, std::uint64_t seed,
                      double* effective_sigma) {
    DenseTensor out = t;
    double sigma = 0.0;
    switch (law.kind) {
        case NoiseLaw::Kind::none:
            break;
        case NoiseLaw::Kind::gaussian: {
            if (law.sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
            sigma = law.sigma;
            if (law.sigma > 0.0) {
                Rng rng(Rng::derive_seed(seed, kTagNoise));
                for (double& v : out.data()) v += law.sigma * rng.normal();
            }
            break;
        }
        case NoiseLaw::Kind::student_t: {
            if (law.df <= 2.0) {
                throw std::invalid_argument("add_noise: student_t requires df > 2 for a finite variance");
            }
            if (law.scale < 0.0) throw std::invalid_argument("add_noise: scale must be >= 0");
            sigma = law.scale * std::sqrt(law.df / (law.df - 2.0));
            Rng rng(Rng::derive_seed(seed, kTagNoise));
            for (double& v : out.data()) v += law.scale * rng.student_t(law.df);
            break;
        }
    }
    if (effective_sigma != nullptr) *effective_sigma = sigma;
    return out;
}

DenseTensor sample_bernoulli(const DenseTensor& logits, const LinkFunction& link,
                             std::uint64_t seed) {
    Rng rng(Rng::derive_seed(seed, kTagObservation));
    DenseTensor out(logits.shape());
    for (Index i = 0; i < logits.size(); ++i) {
        out[i] = rng.uniform() < link.prob(logits[i]) ? 1.0 : 0.0;
    }
    return out;
}

DenseTensor sample_poisson(const DenseTensor& t, double intensity, std::uint64_t seed) {
    if (intensity <= 0.0) {
        throw std::invalid_argument("sample_poisson: intensity must be positive");
    }
    Rng rng(Rng::derive_seed(seed, kTagObservation));
    DenseTensor out(t.shape());
    for (Index i = 0; i < t.size(); ++i) {
        const double mean = intensity * std::exp(t[i]);
        if (!(mean <= 1e12)) {
            throw std::invalid_argument("sample_poisson: mean exceeds 1e12");
        }
        out[i] = static_cast<double>(rng.poisson(mean));
    }
    return out;
}

Instance make_instance(const InstanceSpec& spec) {
    Instance inst;
    inst.spec = spec;
    inst.truth_t = gen_lowrank(spec.dims, spec.rank, spec.seed, spec.spectrum, spec.spikiness_cap);
    inst.truth_s =
        gen_sparse(spec.dims, spec.alpha, spec.amp, spec.seed, spec.value_law, &inst.realized_alpha);
    if (spec.sparse_linf > 0.0 && inst.truth_s.nnz() > 0) {
        double max_abs = 0.0;
        for (const auto& e : inst.truth_s.entries()) max_abs = std::max(max_abs, std::abs(e.value));
        std::vector<SparseTensor::Entry> scaled = inst.truth_s.entries();
        for (auto& e : scaled) e.value *= spec.sparse_linf / max_abs;
        inst.truth_s = SparseTensor(Shape(spec.dims), std::move(scaled));
    }

    const DenseTensor signal = inst.truth_t + inst.truth_s.to_dense();
    switch (spec.model) {
        case ModelKind::gaussian:
            inst.observation = add_noise(signal, spec.noise, spec.seed, &inst.effective_sigma);
            break;
        case ModelKind::bernoulli:
            inst.observation = sample_bernoulli(signal, spec.link, spec.seed);
            break;
        case ModelKind::poisson:
            inst.observation = sample_poisson(signal, spec.intensity, spec.seed);
            break;
    }

    inst.truth_spikiness = spikiness(inst.truth_t);
    const SpectralSummary summary = spectral_summary(inst.truth_t, spec.rank);
    inst.truth_lambda_min = summary.lambda_min;
    inst.truth_lambda_max = summary.lambda_max;
    return inst;
}

LossModel instance_model(const Instance& inst) {
    switch (inst.spec.model) {
        case ModelKind::gaussian:
            return GaussianLoss{inst.observation};
        case ModelKind::bernoulli:
            return BernoulliLoss(inst.observation, inst.spec.link);
        case ModelKind::poisson:
            return PoissonLoss(inst.observation, inst.spec.intensity);
    }
    throw std::logic_error("instance_model: unreachable");
}

}  // namespace lrst
