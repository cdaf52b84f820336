#include "lrst/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrst {

namespace {

struct RankedEntry {
    double abs_value;
    Index flat;
};

// (|value| desc, flat index asc): ties rank the lower flat index higher.
bool ranks_higher(const RankedEntry& a, const RankedEntry& b) {
    if (a.abs_value != b.abs_value) return a.abs_value > b.abs_value;
    return a.flat < b.flat;
}

bool reaches(double abs_value, Index flat, const SliceThreshold& t) {
    if (t.tie_index < 0) return false;  // infinite threshold
    if (abs_value != t.value) return abs_value > t.value;
    return flat <= t.tie_index;
}

}  // namespace

ActiveIndexSet level_alpha_active_indices(const DenseTensor& g, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw std::invalid_argument("level_alpha_active_indices: alpha must be in [0, 1]");
    }
    const Shape& shape = g.shape();
    const Index m = shape.order();

    ActiveIndexSet out;
    out.alpha = alpha;
    out.thresholds.resize(static_cast<std::size_t>(m));

    std::vector<RankedEntry> slice_buf;
    for (Index j = 0; j < m; ++j) {
        const Index dj = shape.dim(j);
        const Index co = shape.co_size(j);
        const Index k = static_cast<Index>(std::floor(alpha * static_cast<double>(co)));
        auto& mode_thresholds = out.thresholds[static_cast<std::size_t>(j)];
        mode_thresholds.assign(static_cast<std::size_t>(dj),
                               SliceThreshold{std::numeric_limits<double>::infinity(), -1});
        if (k == 0) continue;

        Index inner = 1;
        for (Index jj = j + 1; jj < m; ++jj) inner *= shape.dim(jj);
        const Index outer = shape.size() / (inner * dj);

        for (Index slice = 0; slice < dj; ++slice) {
            slice_buf.clear();
            slice_buf.reserve(static_cast<std::size_t>(co));
            for (Index o = 0; o < outer; ++o) {
                const Index base = (o * dj + slice) * inner;
                for (Index in = 0; in < inner; ++in) {
                    slice_buf.push_back({std::abs(g[base + in]), base + in});
                }
            }
            auto kth = slice_buf.begin() + (k - 1);
            std::nth_element(slice_buf.begin(), kth, slice_buf.end(), ranks_higher);
            mode_thresholds[static_cast<std::size_t>(slice)] = {kth->abs_value, kth->flat};
        }
    }

    std::vector<Index> multi(static_cast<std::size_t>(m), 0);
    for (Index flat = 0; flat < shape.size(); ++flat) {
        const double av = std::abs(g[flat]);
        bool in_set = true;
        for (Index j = 0; j < m && in_set; ++j) {
            const auto& t =
                out.thresholds[static_cast<std::size_t>(j)][static_cast<std::size_t>(multi[static_cast<std::size_t>(j)])];
            in_set = reaches(av, flat, t);
        }
        if (in_set) out.flat_indices.push_back(flat);
        // advance the multi-index odometer
        for (Index j = m - 1; j >= 0; --j) {
            auto& ij = multi[static_cast<std::size_t>(j)];
            if (++ij < shape.dim(j)) break;
            ij = 0;
        }
    }
    return out;
}

SparseTensor gradient_prune(const DenseTensor& t_hat, const LossModel& model, double alpha_eff,
                            double k_pr) {
    if (t_hat.shape() != model_shape(model)) {
        throw std::invalid_argument("gradient_prune: shape mismatch");
    }
    const DenseTensor grad = gradient(model, t_hat);
    const ActiveIndexSet active = level_alpha_active_indices(grad, alpha_eff);
    std::vector<SparseTensor::Entry> entries;
    entries.reserve(active.flat_indices.size());
    for (Index flat : active.flat_indices) {
        const double s = entry_prune(model, flat, t_hat[flat], k_pr);
        if (s != 0.0) entries.push_back({flat, s});
    }
    return SparseTensor(t_hat.shape(), std::move(entries));
}

SparseTensor hard_threshold_support(const SparseTensor& s_hat, double delta_star) {
    if (delta_star < 0.0) {
        throw std::invalid_argument("hard_threshold_support: delta_star must be non-negative");
    }
    std::vector<SparseTensor::Entry> kept;
    for (const auto& e : s_hat.entries()) {
        if (std::abs(e.value) > delta_star) kept.push_back(e);
    }
    return SparseTensor(s_hat.shape(), std::move(kept));
}

}  // namespace lrst
