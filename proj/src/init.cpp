#include "lrst/init.hpp"

#include <algorithm>
#include <cmath>

namespace lrst {

namespace {

// k-th largest |entry| (1-based k) under the (|value| desc, flat asc) order.
double kth_largest_abs(const DenseTensor& t, Index k) {
    std::vector<std::pair<double, Index>> vals;
    vals.reserve(static_cast<std::size_t>(t.size()));
    for (Index i = 0; i < t.size(); ++i) vals.push_back({std::abs(t[i]), i});
    auto kth = vals.begin() + (k - 1);
    std::nth_element(vals.begin(), kth, vals.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    return kth->first;
}

TuckerTensor final_trim(const DenseTensor& t, double mu1, std::span<const Index> ranks) {
    const double eta =
        16.0 * mu1 * t.frobenius_norm() / (7.0 * std::sqrt(static_cast<double>(t.size())));
    return trim(t, eta, ranks);
}

}  // namespace

double default_mu1(const Shape& shape) {
    Index d_bar = 0;
    for (Index j = 0; j < shape.order(); ++j) d_bar = std::max(d_bar, shape.dim(j));
    return std::pow(2.0, static_cast<double>(shape.order())) +
           std::log(static_cast<double>(d_bar));
}

TuckerTensor hooi(const DenseTensor& y, std::span<const Index> ranks, Index t_max) {
    if (t_max < 1) {
        throw std::invalid_argument("hooi: t_max must be at least 1");
    }
    const Index m = y.order();
    std::vector<Matrix> factors;
    factors.reserve(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
        factors.push_back(
            truncated_svd(matricize(y, j), ranks[static_cast<std::size_t>(j)]).u);
    }
    for (Index t = 0; t < t_max; ++t) {
        for (Index i = 0; i < m; ++i) {
            DenseTensor contracted = y;
            for (Index j = 0; j < m; ++j) {
                if (j == i) continue;
                contracted =
                    mode_product(contracted, factors[static_cast<std::size_t>(j)].transpose(), j);
            }
            factors[static_cast<std::size_t>(i)] =
                truncated_svd(matricize(contracted, i), ranks[static_cast<std::size_t>(i)]).u;
        }
    }
    DenseTensor core = y;
    for (Index j = 0; j < m; ++j) {
        core = mode_product(core, factors[static_cast<std::size_t>(j)].transpose(), j);
    }
    return TuckerTensor(std::move(core), std::move(factors));
}

TuckerTensor init_rpca(const DenseTensor& a, std::span<const Index> ranks, double mu1,
                       Index t_max, RpcaInitAudit* audit) {
    if (!a.all_finite()) {
        throw std::invalid_argument("init_rpca: input must be finite");
    }
    const Shape& shape = a.shape();
    const double m = static_cast<double>(shape.order());
    Index d_bar = 0;
    for (Index j = 0; j < shape.order(); ++j) d_bar = std::max(d_bar, shape.dim(j));
    const double log_dbar = std::log(static_cast<double>(d_bar));

    RpcaInitAudit local;
    local.p = std::min(1.0 / (8.0 * mu1 * mu1), 1.0 / (64.0 * m * log_dbar));
    const Index k0 = static_cast<Index>(std::floor(local.p * static_cast<double>(shape.size())));

    DenseTensor a0 = a;
    if (k0 >= 1) {
        local.tau0 = kth_largest_abs(a, k0);
        for (double& v : a0.data()) {
            if (std::abs(v) > local.tau0) {
                v = 0.0;
                ++local.zeroed;
            }
        }
    } else {
        local.tau0 = a.max_abs();
        local.degenerate = true;
    }

    local.tau = 10.0 * std::sqrt(m * log_dbar) * mu1 * a0.frobenius_norm() /
                std::sqrt(static_cast<double>(shape.size()));
    const TuckerTensor fitted = hooi(trunc(a, local.tau), ranks, t_max);
    if (audit != nullptr) *audit = local;
    return final_trim(tucker_to_dense(fitted), mu1, ranks);
}

TuckerTensor init_binary(const DenseTensor& a, const LinkFunction& link,
                         std::span<const Index> ranks, double zeta, Index fw_iters, double mu1,
                         BinaryInitAudit* audit) {
    for (double v : a.data()) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("init_binary: observations must be 0/1");
        }
    }
    if (zeta <= 0.0) {
        throw std::invalid_argument("init_binary: zeta must be positive");
    }
    const Shape& shape = a.shape();
    const Index m = shape.order();
    const Index m0 = m / 2;

    // Row-major flattening groups the leading m0 modes as rows, so the
    // reshape is a flat reinterpretation of the buffer.
    Index rows = 1, cols = 1;
    for (Index j = 0; j < m0; ++j) rows *= shape.dim(j);
    for (Index j = m0; j < m; ++j) cols *= shape.dim(j);

    Index row_rank = 1, col_rank = 1;
    for (Index j = 0; j < m0; ++j) row_rank *= ranks[static_cast<std::size_t>(j)];
    for (Index j = m0; j < m; ++j) col_rank *= ranks[static_cast<std::size_t>(j)];
    const double r = static_cast<double>(std::min(row_rank, col_rank));
    const double nuclear_radius = zeta * std::sqrt(static_cast<double>(shape.size()) * r);

    Matrix obs(rows, cols);
    for (Index i = 0; i < shape.size(); ++i) obs(i / cols, i % cols) = a[i];

    auto objective = [&](const Matrix& x) {
        double total = 0.0;
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) total += link.entry_loss(obs(i, j), x(i, j));
        return total;
    };

    BinaryInitAudit local;
    local.nuclear_radius = nuclear_radius;

    auto nuclear_norm = [](const Matrix& m) {
        const bool wide = m.cols() >= m.rows();
        const Matrix gram = wide ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
        const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues();
        double total = 0.0;
        for (Index i = 0; i < ev.size(); ++i) total += std::sqrt(std::max(ev[i], 0.0));
        return total;
    };

    Matrix x = Matrix::Zero(rows, cols);
    double fx = objective(x);
    local.objective.push_back(fx);
    for (Index k = 0; k < fw_iters; ++k) {
        Matrix grad(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) grad(i, j) = link.entry_grad(obs(i, j), x(i, j));
        // linear minimization oracle over the nuclear ball: -radius * u1 v1^T
        const TruncatedSvd top = truncated_svd(grad, 1);
        const Matrix atom = -nuclear_radius * top.u * top.v.transpose();
        const double step = 2.0 / (static_cast<double>(k) + 2.0);
        Matrix candidate = (1.0 - step) * x + step * atom;
        candidate = candidate.cwiseMax(-zeta).cwiseMin(zeta);
        // clipping is not nuclear-norm monotone; rescale the rare excursions
        double nuc = nuclear_norm(candidate);
        if (nuc > nuclear_radius) {
            candidate *= nuclear_radius / nuc;
            nuc = nuclear_radius;
        }
        const double fc = objective(candidate);
        if (fc <= fx + 1e-9 * (1.0 + std::abs(fx))) {
            x = std::move(candidate);
            fx = fc;
            local.max_nuclear_ratio = std::max(local.max_nuclear_ratio, nuc / nuclear_radius);
            local.max_entry = std::max(local.max_entry, x.cwiseAbs().maxCoeff());
        } else {
            ++local.rejected_steps;
        }
        local.objective.push_back(fx);
    }
    if (audit != nullptr) *audit = local;

    DenseTensor estimate(shape);
    for (Index i = 0; i < shape.size(); ++i) estimate[i] = x(i / cols, i % cols);
    return final_trim(estimate, mu1, ranks);
}

TuckerTensor init_poisson(const DenseTensor& y, double intensity, std::span<const Index> ranks,
                          double mu1) {
    if (intensity <= 0.0) {
        throw std::invalid_argument("init_poisson: intensity must be positive");
    }
    DenseTensor logs(y.shape());
    for (Index i = 0; i < y.size(); ++i) {
        logs[i] = std::log((y[i] + 0.5) / intensity);
    }
    const TuckerTensor first = hosvd(logs, ranks);
    return final_trim(tucker_to_dense(first), mu1, ranks);
}

}  // namespace lrst
