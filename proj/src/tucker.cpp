#include "lrst/tucker.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace lrst {

namespace {

// inner = prod of dims after `mode`, outer = prod of dims before it.
std::pair<Index, Index> mode_strides(const Shape& shape, Index mode) {
    Index inner = 1;
    for (Index j = mode + 1; j < shape.order(); ++j) inner *= shape.dim(j);
    Index outer = 1;
    for (Index j = 0; j < mode; ++j) outer *= shape.dim(j);
    return {inner, outer};
}

void fix_singular_vector_signs(Matrix& u, Matrix& v) {
    for (Index c = 0; c < u.cols(); ++c) {
        double lead = 0.0;
        for (Index r = 0; r < u.rows(); ++r) {
            if (u(r, c) != 0.0) {
                lead = u(r, c);
                break;
            }
        }
        if (lead < 0.0) {
            u.col(c) = -u.col(c);
            if (c < v.cols()) v.col(c) = -v.col(c);
        }
    }
}

// Orthonormal completion for right factors whose singular value vanished:
// replace degenerate columns by canonical directions orthogonalized against
// the healthy ones.
void repair_degenerate_columns(Matrix& v, const std::vector<Index>& bad) {
    if (bad.empty()) return;
    std::size_t next_canonical = 0;
    for (Index c : bad) {
        Vector cand;
        while (true) {
            cand = Vector::Zero(v.rows());
            if (static_cast<Index>(next_canonical) >= v.rows()) {
                cand.setOnes();
                cand.normalize();
            } else {
                cand[static_cast<Index>(next_canonical)] = 1.0;
            }
            ++next_canonical;
            for (Index k = 0; k < v.cols(); ++k) {
                if (k == c) continue;
                cand -= v.col(k).dot(cand) * v.col(k);
            }
            const double n = cand.norm();
            if (n > 0.5) {
                cand /= n;
                break;
            }
        }
        v.col(c) = cand;
    }
}

TruncatedSvd svd_via_gram(const Matrix& mat, Index k, bool transpose) {
    // transpose=false: rows are the short side; true: columns are.
    const Matrix& a = mat;
    Matrix gram = transpose ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const Index n = gram.rows();
    Matrix u_short(n, k);
    Vector s(k);
    for (Index i = 0; i < k; ++i) {
        // eigenvalues come out ascending
        u_short.col(i) = eig.eigenvectors().col(n - 1 - i);
        s[i] = std::sqrt(std::max(eig.eigenvalues()[n - 1 - i], 0.0));
    }
    Matrix other = transpose ? Matrix(a * u_short) : Matrix(a.transpose() * u_short);
    const double tol = s.size() > 0 ? 1e-14 * s[0] : 0.0;
    std::vector<Index> bad;
    for (Index i = 0; i < k; ++i) {
        if (s[i] > tol && s[i] > 0.0) {
            other.col(i) /= s[i];
        } else {
            bad.push_back(i);
        }
    }
    repair_degenerate_columns(other, bad);
    TruncatedSvd out;
    if (transpose) {
        out.u = std::move(other);
        out.v = std::move(u_short);
    } else {
        out.u = std::move(u_short);
        out.v = std::move(other);
    }
    out.s = std::move(s);
    return out;
}

}  // namespace

TuckerTensor::TuckerTensor(DenseTensor core, std::vector<Matrix> factors)
    : core_(std::move(core)), factors_(std::move(factors)) {
    if (static_cast<Index>(factors_.size()) != core_.order()) {
        throw std::invalid_argument("TuckerTensor: one factor per mode required");
    }
    for (Index j = 0; j < core_.order(); ++j) {
        const Matrix& u = factors_[static_cast<std::size_t>(j)];
        if (u.cols() != core_.shape().dim(j)) {
            throw std::invalid_argument("TuckerTensor: factor column count must match core rank");
        }
        if (u.rows() < u.cols()) {
            throw std::invalid_argument("TuckerTensor: rank exceeds dimension");
        }
        const Matrix gram = u.transpose() * u;
        const double err = (gram - Matrix::Identity(u.cols(), u.cols())).norm();
        if (err > 1e-10) {
            std::ostringstream msg;
            msg << "TuckerTensor: factor " << j << " not orthonormal (deviation " << err << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

Shape TuckerTensor::dense_shape() const {
    std::vector<Index> dims;
    dims.reserve(factors_.size());
    for (const Matrix& u : factors_) dims.push_back(u.rows());
    return Shape(dims);
}

Matrix matricize(const DenseTensor& t, Index mode) {
    const Shape& shape = t.shape();
    if (mode < 0 || mode >= shape.order()) {
        throw std::invalid_argument("matricize: mode out of range");
    }
    const auto [inner, outer] = mode_strides(shape, mode);
    const Index dj = shape.dim(mode);
    Matrix m(dj, shape.co_size(mode));
    const double* data = t.data().data();
    for (Index o = 0; o < outer; ++o) {
        for (Index i = 0; i < dj; ++i) {
            const double* src = data + (o * dj + i) * inner;
            for (Index in = 0; in < inner; ++in) {
                m(i, o * inner + in) = src[in];
            }
        }
    }
    return m;
}

DenseTensor tensorize(const Matrix& mat, const Shape& shape, Index mode) {
    if (mode < 0 || mode >= shape.order()) {
        throw std::invalid_argument("tensorize: mode out of range");
    }
    if (mat.rows() != shape.dim(mode) || mat.cols() != shape.co_size(mode)) {
        throw std::invalid_argument("tensorize: matrix dimensions do not match shape");
    }
    const auto [inner, outer] = mode_strides(shape, mode);
    const Index dj = shape.dim(mode);
    DenseTensor t(shape);
    double* data = t.data().data();
    for (Index o = 0; o < outer; ++o) {
        for (Index i = 0; i < dj; ++i) {
            double* dst = data + (o * dj + i) * inner;
            for (Index in = 0; in < inner; ++in) {
                dst[in] = mat(i, o * inner + in);
            }
        }
    }
    return t;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& w, Index mode) {
    const Shape& shape = t.shape();
    if (mode < 0 || mode >= shape.order()) {
        throw std::invalid_argument("mode_product: mode out of range");
    }
    if (w.cols() != shape.dim(mode)) {
        throw std::invalid_argument("mode_product: matrix columns must match mode dimension");
    }
    std::vector<Index> dims = shape.dims();
    dims[static_cast<std::size_t>(mode)] = w.rows();
    const Shape out_shape(dims);

    using RowMajorMap = Eigen::Map<
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using RowMajorMutableMap =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    if (mode == 0) {
        // the mode-0 unfolding is the flat buffer itself
        DenseTensor out(out_shape);
        RowMajorMap src(t.data().data(), shape.dim(0), shape.co_size(0));
        RowMajorMutableMap dst(out.data().data(), w.rows(), shape.co_size(0));
        dst.noalias() = w * src;
        return out;
    }
    if (mode == shape.order() - 1) {
        // the last-mode unfolding is the flat buffer read column-major
        DenseTensor out(out_shape);
        Eigen::Map<const Matrix> src(t.data().data(), shape.dim(mode), shape.co_size(mode));
        Eigen::Map<Matrix> dst(out.data().data(), w.rows(), shape.co_size(mode));
        dst.noalias() = w * src;
        return out;
    }
    const Matrix product = w * matricize(t, mode);
    return tensorize(product, out_shape, mode);
}

DenseTensor tucker_to_dense(const TuckerTensor& tk) {
    DenseTensor out = tk.core();
    for (Index j = 0; j < tk.order(); ++j) {
        out = mode_product(out, tk.factor(j), j);
    }
    return out;
}

TruncatedSvd truncated_svd(const Matrix& mat, Index k) {
    const Index rows = mat.rows();
    const Index cols = mat.cols();
    if (k < 1 || k > std::min(rows, cols)) {
        throw std::invalid_argument("truncated_svd: rank out of range");
    }
    TruncatedSvd out;
    if (rows <= 64 && cols > 16 * rows) {
        out = svd_via_gram(mat, k, /*transpose=*/false);
    } else if (cols <= 64 && rows > 16 * cols) {
        out = svd_via_gram(mat, k, /*transpose=*/true);
    } else {
        Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = svd.matrixU().leftCols(k);
        out.s = svd.singularValues().head(k);
        out.v = svd.matrixV().leftCols(k);
    }
    fix_singular_vector_signs(out.u, out.v);
    return out;
}

TuckerTensor hosvd(const DenseTensor& t, std::span<const Index> ranks) {
    const Shape& shape = t.shape();
    if (static_cast<Index>(ranks.size()) != shape.order()) {
        throw std::invalid_argument("hosvd: one rank per mode required");
    }
    for (Index j = 0; j < shape.order(); ++j) {
        const Index r = ranks[static_cast<std::size_t>(j)];
        if (r < 1 || r > shape.dim(j)) {
            throw std::invalid_argument("hosvd: rank out of range");
        }
    }
    std::vector<Matrix> factors;
    factors.reserve(ranks.size());
    if (t.frobenius_norm() == 0.0) {
        for (Index j = 0; j < shape.order(); ++j) {
            factors.push_back(Matrix::Identity(shape.dim(j), shape.dim(j))
                                  .leftCols(ranks[static_cast<std::size_t>(j)]));
        }
    } else {
        for (Index j = 0; j < shape.order(); ++j) {
            factors.push_back(truncated_svd(matricize(t, j), ranks[static_cast<std::size_t>(j)]).u);
        }
    }
    DenseTensor core = t;
    for (Index j = 0; j < shape.order(); ++j) {
        core = mode_product(core, factors[static_cast<std::size_t>(j)].transpose(), j);
    }
    return TuckerTensor(std::move(core), std::move(factors));
}

double spikiness(const DenseTensor& t) {
    const double fro = t.frobenius_norm();
    if (fro == 0.0) {
        throw std::invalid_argument("spikiness: undefined for the zero tensor");
    }
    return std::sqrt(static_cast<double>(t.size())) * t.max_abs() / fro;
}

double incoherence(const TuckerTensor& tk) {
    double mu0 = 0.0;
    for (Index j = 0; j < tk.order(); ++j) {
        const Matrix& u = tk.factor(j);
        const double scale = static_cast<double>(u.rows()) / static_cast<double>(u.cols());
        for (Index i = 0; i < u.rows(); ++i) {
            mu0 = std::max(mu0, u.row(i).squaredNorm() * scale);
        }
    }
    return mu0;
}

SpectralSummary spectral_summary(const DenseTensor& t, std::span<const Index> ranks) {
    const Shape& shape = t.shape();
    if (static_cast<Index>(ranks.size()) != shape.order()) {
        throw std::invalid_argument("spectral_summary: one rank per mode required");
    }
    SpectralSummary out;
    out.lambda_min = std::numeric_limits<double>::infinity();
    out.lambda_max = 0.0;
    for (Index j = 0; j < shape.order(); ++j) {
        const Index r = ranks[static_cast<std::size_t>(j)];
        const Matrix m = matricize(t, j);
        if (r < 1 || r > std::min(m.rows(), m.cols())) {
            throw std::invalid_argument("spectral_summary: rank out of range");
        }
        Vector sv;
        bool via_gram = m.rows() <= 128 && m.cols() >= m.rows();
        if (via_gram) {
            // all nonzero singular values live in the d_j x d_j Gram spectrum
            Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose());
            sv.resize(m.rows());
            for (Index i = 0; i < m.rows(); ++i) {
                sv[i] = std::sqrt(std::max(eig.eigenvalues()[m.rows() - 1 - i], 0.0));
            }
        } else {
            sv = Eigen::BDCSVD<Matrix>(m).singularValues();
        }
        if (via_gram && sv[r - 1] < 1e-6 * sv[0]) {
            // the Gram route cannot resolve values this small
            sv = Eigen::BDCSVD<Matrix>(m).singularValues();
        }
        const double sr = sv[r - 1];
        if (sr <= 1e-12 * sv[0]) {
            std::ostringstream msg;
            msg << "spectral_summary: mode " << j << " is rank-deficient at rank " << r;
            throw RankDeficientError(msg.str());
        }
        out.lambda_min = std::min(out.lambda_min, sr);
        out.lambda_max = std::max(out.lambda_max, sv[0]);
        out.mode_spectra.push_back(std::move(sv));
    }
    out.kappa0 = out.lambda_max / out.lambda_min;
    return out;
}

}  // namespace lrst
