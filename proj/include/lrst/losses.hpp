#pragma once

#include <variant>

#include "lrst/tensor.hpp"

namespace lrst {

enum class LinkKind { logistic, probit };

/// Inverse link p(x) mapping the real line onto (0, 1), strictly increasing.
struct LinkFunction {
    LinkKind kind = LinkKind::logistic;
    double sigma = 1.0;

    double prob(double x) const;
    /// dp/dx.
    double dprob(double x) const;
    /// x such that prob(x) = p; p is clamped away from {0, 1}.
    double inverse(double p) const;
    /// d/dx of -[a log p(x) + (1-a) log(1-p(x))].
    double entry_grad(double a, double x) const;
    /// Matching entry-wise loss value, numerically stable in the tails.
    double entry_loss(double a, double x) const;
};

struct GaussianLoss {
    DenseTensor a;
};

struct BernoulliLoss {
    BernoulliLoss(DenseTensor observations, LinkFunction link_fn);
    DenseTensor a;  // entries in {0, 1}
    LinkFunction link;
};

struct PoissonLoss {
    PoissonLoss(DenseTensor counts, double intensity_param);
    DenseTensor y;  // non-negative integer counts
    double intensity;
};

using LossModel = std::variant<GaussianLoss, BernoulliLoss, PoissonLoss>;

enum class ModelKind { gaussian, bernoulli, poisson };

ModelKind model_kind(const LossModel& model);
const Shape& model_shape(const LossModel& model);

/// Gaussian: 0.5 |x - A|_F^2. Bernoulli: negative log-likelihood under the
/// link. Poisson: (1/I) sum(-y x + I e^x).
double loss_value(const LossModel& model, const DenseTensor& x);

DenseTensor gradient(const LossModel& model, const DenseTensor& x);

double entry_gradient(const LossModel& model, Index flat, double v);
double entry_gradient(const LossModel& model, std::span<const Index> omega, double v);

/// argmin over {s : |s + t| <= k_pr} of |l'_omega(t + s)|; closed form since
/// every per-entry gradient here is monotone. k_pr may be +infinity.
double entry_prune(const LossModel& model, Index flat, double t, double k_pr);
double entry_prune(const LossModel& model, std::span<const Index> omega, double t, double k_pr);

/// Strong-convexity / smoothness constants of the per-entry loss over
/// |x| <= zeta, used to pick default step sizes.
struct ConvexityBounds {
    double b_lower;
    double b_upper;
};
ConvexityBounds convexity_bounds(const LossModel& model, double zeta);

}  // namespace lrst
