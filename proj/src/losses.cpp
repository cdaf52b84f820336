#include "lrst/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrst/rng.hpp"

namespace lrst {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
// Most negative exponent that keeps e^x normal; bounds prune outputs when
// the root sits at -infinity and k_pr is the +infinity sentinel.
constexpr double kMinLogArg = -708.0;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double norm_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

double LinkFunction::prob(double x) const {
    const double z = x / sigma;
    if (kind == LinkKind::logistic) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    return norm_cdf(z);
}

double LinkFunction::dprob(double x) const {
    const double z = x / sigma;
    if (kind == LinkKind::logistic) {
        const double p = 1.0 / (1.0 + std::exp(-z));
        return p * (1.0 - p) / sigma;
    }
    return norm_pdf(z) / sigma;
}

double LinkFunction::inverse(double p) const {
    p = clamp_prob(p);
    if (kind == LinkKind::logistic) {
        return sigma * std::log(p / (1.0 - p));
    }
    return sigma * norm_quantile(p);
}

double LinkFunction::entry_grad(double a, double x) const {
    const double z = x / sigma;
    if (kind == LinkKind::logistic) {
        // simplified form (p - a) / sigma; the quotient form cancels badly
        return (1.0 / (1.0 + std::exp(-z)) - a) / sigma;
    }
    // probit: phi/Phi ratios stay finite through mills_ratio
    const double from_one = -a * mills_ratio(z) / sigma;
    const double from_zero = (1.0 - a) * mills_ratio(-z) / sigma;
    return from_one + from_zero;
}

double LinkFunction::entry_loss(double a, double x) const {
    const double z = x / sigma;
    if (kind == LinkKind::logistic) {
        // -a log p - (1-a) log(1-p) with log1p-stable pieces
        const double log_p = -std::log1p(std::exp(-std::abs(z))) + std::min(z, 0.0);
        const double log_q = log_p - z;
        return -a * log_p - (1.0 - a) * log_q;
    }
    return -a * log_norm_cdf(z) - (1.0 - a) * log_norm_cdf(-z);
}

BernoulliLoss::BernoulliLoss(DenseTensor observations, LinkFunction link_fn)
    : a(std::move(observations)), link(link_fn) {
    for (double v : a.data()) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("BernoulliLoss: observations must be 0/1");
        }
    }
    if (link.sigma <= 0.0) {
        throw std::invalid_argument("BernoulliLoss: link scale must be positive");
    }
}

PoissonLoss::PoissonLoss(DenseTensor counts, double intensity_param)
    : y(std::move(counts)), intensity(intensity_param) {
    if (intensity <= 0.0) {
        throw std::invalid_argument("PoissonLoss: intensity must be positive");
    }
    for (double v : y.data()) {
        if (v < 0.0 || v != std::floor(v)) {
            throw std::invalid_argument("PoissonLoss: counts must be non-negative integers");
        }
    }
}

ModelKind model_kind(const LossModel& model) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianLoss>) return ModelKind::gaussian;
            if constexpr (std::is_same_v<T, BernoulliLoss>) return ModelKind::bernoulli;
            if constexpr (std::is_same_v<T, PoissonLoss>) return ModelKind::poisson;
        },
        model);
}

const Shape& model_shape(const LossModel& model) {
    return std::visit(
        [](const auto& m) -> const Shape& {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PoissonLoss>) {
                return m.y.shape();
            } else {
                return m.a.shape();
            }
        },
        model);
}

double loss_value(const LossModel& model, const DenseTensor& x) {
    if (x.shape() != model_shape(model)) {
        throw std::invalid_argument("loss_value: shape mismatch");
    }
    double total = 0.0;
    if (const auto* g = std::get_if<GaussianLoss>(&model)) {
        for (Index i = 0; i < x.size(); ++i) {
            const double d = x[i] - g->a[i];
            total += 0.5 * d * d;
        }
    } else if (const auto* b = std::get_if<BernoulliLoss>(&model)) {
        for (Index i = 0; i < x.size(); ++i) {
            total += b->link.entry_loss(b->a[i], x[i]);
        }
    } else {
        const auto& p = std::get<PoissonLoss>(model);
        for (Index i = 0; i < x.size(); ++i) {
            total += -p.y[i] / p.intensity * x[i] + std::exp(x[i]);
        }
    }
    if (!std::isfinite(total)) {
        throw NumericalError("loss_value: non-finite result");
    }
    return total;
}

DenseTensor gradient(const LossModel& model, const DenseTensor& x) {
    if (x.shape() != model_shape(model)) {
        throw std::invalid_argument("gradient: shape mismatch");
    }
    DenseTensor out(x.shape());
    if (const auto* g = std::get_if<GaussianLoss>(&model)) {
        for (Index i = 0; i < x.size(); ++i) out[i] = x[i] - g->a[i];
    } else if (const auto* b = std::get_if<BernoulliLoss>(&model)) {
        for (Index i = 0; i < x.size(); ++i) out[i] = b->link.entry_grad(b->a[i], x[i]);
    } else {
        const auto& p = std::get<PoissonLoss>(model);
        for (Index i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]) - p.y[i] / p.intensity;
    }
    if (!out.all_finite()) {
        throw NumericalError("gradient: non-finite entries");
    }
    return out;
}

double entry_gradient(const LossModel& model, Index flat, double v) {
    const Shape& shape = model_shape(model);
    if (flat < 0 || flat >= shape.size()) {
        throw std::out_of_range("entry_gradient: index out of bounds");
    }
    if (const auto* g = std::get_if<GaussianLoss>(&model)) {
        return v - g->a[flat];
    }
    if (const auto* b = std::get_if<BernoulliLoss>(&model)) {
        return b->link.entry_grad(b->a[flat], v);
    }
    const auto& p = std::get<PoissonLoss>(model);
    return std::exp(v) - p.y[flat] / p.intensity;
}

double entry_gradient(const LossModel& model, std::span<const Index> omega, double v) {
    return entry_gradient(model, model_shape(model).flat_index(omega), v);
}

double entry_prune(const LossModel& model, Index flat, double t, double k_pr) {
    const Shape& shape = model_shape(model);
    if (flat < 0 || flat >= shape.size()) {
        throw std::out_of_range("entry_prune: index out of bounds");
    }
    if (!(k_pr > 0.0)) {
        throw std::invalid_argument("entry_prune: k_pr must be positive");
    }
    // Every per-entry gradient is monotone increasing in its argument, so the
    // constrained minimizer of |l'(t + s)| is the gradient root clipped to
    // the box |t + s| <= k_pr.
    double root;
    if (const auto* g = std::get_if<GaussianLoss>(&model)) {
        root = g->a[flat];
    } else if (const auto* b = std::get_if<BernoulliLoss>(&model)) {
        root = b->link.inverse(b->a[flat]);
    } else {
        const auto& p = std::get<PoissonLoss>(model);
        root = p.y[flat] > 0.0 ? std::log(p.y[flat] / p.intensity)
                               : -std::numeric_limits<double>::infinity();
        root = std::max(root, kMinLogArg);
    }
    return clip(root, -k_pr, k_pr) - t;
}

double entry_prune(const LossModel& model, std::span<const Index> omega, double t, double k_pr) {
    return entry_prune(model, model_shape(model).flat_index(omega), t, k_pr);
}

ConvexityBounds convexity_bounds(const LossModel& model, double zeta) {
    if (std::holds_alternative<GaussianLoss>(model)) {
        return {1.0, 1.0};
    }
    if (std::holds_alternative<PoissonLoss>(model)) {
        return {std::exp(-zeta), std::exp(zeta)};
    }
    const auto& b = std::get<BernoulliLoss>(model);
    // Second derivative of the per-entry loss for a in {0, 1}, scanned over
    // |x| <= zeta. Central differences of the analytic gradient are accurate
    // enough for a step-size heuristic.
    const int n = 2001;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    const double h = 1e-5 * std::max(1.0, zeta);
    for (int i = 0; i < n; ++i) {
        const double x = -zeta + 2.0 * zeta * i / (n - 1);
        for (double a : {0.0, 1.0}) {
            const double second =
                (b.link.entry_grad(a, x + h) - b.link.entry_grad(a, x - h)) / (2.0 * h);
            lo = std::min(lo, second);
            hi = std::max(hi, second);
        }
    }
    return {std::max(lo, 1e-12), std::max(hi, 1e-12)};
}

}  // namespace lrst
