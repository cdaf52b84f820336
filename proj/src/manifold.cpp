#include "lrst/manifold.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace lrst {

namespace {

// g x_{j != skip} U_j^T, leaving mode `skip` untouched; `head`, when given,
// is the precomputed g x_0 U_0^T used for every skip != 0.
DenseTensor contract_except(const DenseTensor& g, const std::vector<Matrix>& factors, Index skip,
                            const DenseTensor* head = nullptr) {
    DenseTensor out = (skip != 0 && head != nullptr) ? *head : g;
    const Index start = (skip != 0 && head != nullptr) ? 1 : 0;
    for (Index j = start; j < g.order(); ++j) {
        if (j == skip) continue;
        out = mode_product(out, factors[static_cast<std::size_t>(j)].transpose(), j);
    }
    return out;
}

}  // namespace

double TangentVector::frobenius_norm() const {
    // The core block and the m mode blocks are mutually orthogonal under the
    // gauge condition, so the squared norms add. Each mode block contributes
    // |W_i M_i(C)|_F^2.
    double sq = 0.0;
    const double cn = core_part.frobenius_norm();
    sq += cn * cn;
    for (Index i = 0; i < base.order(); ++i) {
        const Matrix prod =
            mode_parts[static_cast<std::size_t>(i)] * matricize(base.core(), i);
        sq += prod.squaredNorm();
    }
    return std::sqrt(sq);
}

TangentVector tangent_project(const TuckerTensor& base, const DenseTensor& g) {
    if (g.shape() != base.dense_shape()) {
        throw std::invalid_argument("tangent_project: shape mismatch");
    }
    const Index m = base.order();
    TangentVector out;
    out.base = base;

    // share the expensive first contraction of the full tensor
    const DenseTensor head = mode_product(g, base.factor(0).transpose(), 0);

    DenseTensor core_proj = head;
    for (Index j = 1; j < m; ++j) {
        core_proj = mode_product(core_proj, base.factor(j).transpose(), j);
    }
    out.core_part = std::move(core_proj);

    out.mode_parts.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        const Matrix b =
            matricize(contract_except(g, base.factors(), i, &head), i);  // d_i x r_i^-
        const Matrix ci = matricize(base.core(), i);                           // r_i x r_i^-
        Eigen::JacobiSVD<Matrix> svd(ci, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const double cutoff = 1e-12 * s[0];
        if (s[s.size() - 1] < cutoff || s[0] == 0.0) {
            std::ostringstream msg;
            msg << "tangent_project: core unfolding " << i << " is rank-deficient";
            throw RankDeficientError(msg.str());
        }
        // W_i = (I - U_i U_i^T) B_i pinv(M_i(C))
        Matrix w = b * svd.matrixV();
        for (Index c = 0; c < w.cols(); ++c) w.col(c) /= s[c];
        w = w * svd.matrixU().transpose();
        const Matrix& u = base.factor(i);
        w -= u * (u.transpose() * w);
        out.mode_parts.push_back(std::move(w));
    }
    return out;
}

DenseTensor tangent_to_dense(const TangentVector& v) {
    const TuckerTensor& base = v.base;
    DenseTensor out = tucker_to_dense(TuckerTensor(v.core_part, base.factors()));
    for (Index i = 0; i < base.order(); ++i) {
        DenseTensor part = base.core();
        for (Index j = 0; j < base.order(); ++j) {
            const Matrix& w = (j == i) ? v.mode_parts[static_cast<std::size_t>(i)] : base.factor(j);
            part = mode_product(part, w, j);
        }
        out += part;
    }
    return out;
}

DenseTensor entrywise_truncate(const DenseTensor& w, double level) {
    if (level < 0.0) {
        throw std::invalid_argument("entrywise_truncate: level must be non-negative");
    }
    DenseTensor out = w;
    for (double& v : out.data()) {
        if (std::abs(v) > level) {
            v = std::copysign(level, v);
        }
    }
    return out;
}

DenseTensor trunc(const DenseTensor& a, double tau) { return entrywise_truncate(a, tau); }

TuckerTensor trim(const DenseTensor& w, double zeta, std::span<const Index> ranks) {
    if (zeta < 0.0) {
        throw std::invalid_argument("trim: zeta must be non-negative");
    }
    if (std::isinf(zeta)) {
        return hosvd(w, ranks);
    }
    return hosvd(entrywise_truncate(w, zeta / 2.0), ranks);
}

}  // namespace lrst
