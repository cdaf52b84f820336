#pragma once

#include "lrst/tucker.hpp"

namespace lrst {

/// Element of the tangent space of the fixed-rank manifold at `base`:
/// densifies to core_part x_i U_i + sum_i C x_{j != i} U_j x_i W_i with the
/// gauge condition W_i^T U_i = 0.
struct TangentVector {
    TuckerTensor base;
    DenseTensor core_part;           // shape (r_1, ..., r_m)
    std::vector<Matrix> mode_parts;  // W_i, d_i x r_i, W_i^T U_i = 0

    /// |.|_F without densifying; valid under the gauge condition.
    double frobenius_norm() const;
};

/// Least-squares projection of g onto the tangent space at `base`. Throws
/// RankDeficientError when some core unfolding has sigma_min < 1e-12 sigma_max.
TangentVector tangent_project(const TuckerTensor& base, const DenseTensor& g);

DenseTensor tangent_to_dense(const TangentVector& v);

/// Clips entries with |w| > c to c * sign(w).
DenseTensor entrywise_truncate(const DenseTensor& w, double level);

/// Identical rule to entrywise_truncate; named entry point used by the
/// initialization routines.
DenseTensor trunc(const DenseTensor& a, double tau);

/// hosvd(entrywise_truncate(w, zeta / 2), r); zeta = +infinity skips the
/// truncation entirely.
TuckerTensor trim(const DenseTensor& w, double zeta, std::span<const Index> ranks);

}  // namespace lrst
