#pragma once

#include <Eigen/Dense>

#include "lrst/tensor.hpp"

namespace lrst {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Core tensor plus orthonormal factor matrices U_j (d_j x r_j).
class TuckerTensor {
public:
    TuckerTensor() = default;
    /// Validates U_j^T U_j = I within 1e-10 Frobenius and r_j <= d_j.
    TuckerTensor(DenseTensor core, std::vector<Matrix> factors);

    const DenseTensor& core() const { return core_; }
    const std::vector<Matrix>& factors() const { return factors_; }
    const Matrix& factor(Index mode) const { return factors_[static_cast<std::size_t>(mode)]; }

    Index order() const { return core_.order(); }
    std::vector<Index> ranks() const { return core_.shape().dims(); }
    /// Shape of the dense tensor this represents.
    Shape dense_shape() const;

    /// Equals the dense Frobenius norm since the factors are orthonormal.
    double frobenius_norm() const { return core_.frobenius_norm(); }

private:
    DenseTensor core_;
    std::vector<Matrix> factors_;
};

/// Mode-j unfolding, d_j x d_j^-; remaining indices flattened with the last
/// one varying fastest.
Matrix matricize(const DenseTensor& t, Index mode);

/// Inverse of matricize for the given shape and mode.
DenseTensor tensorize(const Matrix& mat, const Shape& shape, Index mode);

/// t x_j w; w is p_j x d_j and replaces dimension d_j by p_j.
DenseTensor mode_product(const DenseTensor& t, const Matrix& w, Index mode);

DenseTensor tucker_to_dense(const TuckerTensor& tk);

struct TruncatedSvd {
    Matrix u;   // d x k, orthonormal columns
    Vector s;   // k, non-negative, non-increasing
    Matrix v;   // n x k, orthonormal columns
};

/// Rank-k SVD. Wide or tall matrices with the short side <= 64 and an
/// aspect ratio above 16 go through the Gram-matrix eigendecomposition;
/// everything else uses a dense SVD. Sign convention: the first nonzero
/// entry of each left singular vector is positive.
TruncatedSvd truncated_svd(const Matrix& mat, Index k);

/// HOSVD at multilinear rank r: per-mode top-r_j left singular vectors,
/// core = t x_j U_j^T. A zero tensor yields a zero core with identity-column
/// factors.
TuckerTensor hosvd(const DenseTensor& t, std::span<const Index> ranks);

/// sqrt(d*) * |t|_inf / |t|_F; in [1, sqrt(d*)] for nonzero t.
double spikiness(const DenseTensor& t);

/// mu0 = max_j max_i |e_i^T U_j|^2 * d_j / r_j; always >= 1.
double incoherence(const TuckerTensor& tk);

struct SpectralSummary {
    std::vector<Vector> mode_spectra;  // full singular values per mode
    double lambda_min = 0.0;           // min_j sigma_{r_j}(M_j)
    double lambda_max = 0.0;           // max_j sigma_1(M_j)
    double kappa0 = 0.0;               // lambda_max / lambda_min
};

/// Throws RankDeficientError if sigma_{r_j} vanishes in some mode.
SpectralSummary spectral_summary(const DenseTensor& t, std::span<const Index> ranks);

}  // namespace lrst
