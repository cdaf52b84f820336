#pragma once

#include "lrst/losses.hpp"
#include "lrst/tensor.hpp"

namespace lrst {

/// Per-slice order-statistic threshold: the k-th largest absolute value in
/// the slice under the total order (|value| desc, flat index asc). k = 0
/// means no order statistic exists and the threshold is +infinity.
struct SliceThreshold {
    double value;
    Index tie_index;  // flat index of the threshold entry, -1 when infinite
};

/// Entries of g whose (|value|, flat index) pair reaches every mode's slice
/// threshold.
struct ActiveIndexSet {
    std::vector<Index> flat_indices;  // sorted ascending
    double alpha = 0.0;
    std::vector<std::vector<SliceThreshold>> thresholds;  // [mode][slice]
};

ActiveIndexSet level_alpha_active_indices(const DenseTensor& g, double alpha);

/// Gradient pruning: evaluates grad L at the low-rank iterate, finds the
/// level-(alpha_eff) active indices and solves the one-dimensional prune
/// problem on each. Zero solutions are dropped from the support.
SparseTensor gradient_prune(const DenseTensor& t_hat, const LossModel& model, double alpha_eff,
                            double k_pr);

/// Keeps entries with |value| > delta_star.
SparseTensor hard_threshold_support(const SparseTensor& s_hat, double delta_star);

}  // namespace lrst
