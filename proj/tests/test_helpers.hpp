#pragma once

#include <Eigen/Dense>

#include "lrst/rng.hpp"
#include "lrst/tensor.hpp"
#include "lrst/tucker.hpp"

namespace lrst::testing {

inline DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> data(static_cast<std::size_t>(shape.size()));
    for (double& v : data) v = rng.normal();
    return DenseTensor(shape, std::move(data));
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
    const Matrix m = random_matrix(rows, cols, seed);
    Eigen::HouseholderQR<Matrix> qr(m);
    return Matrix(qr.householderQ()) * Matrix::Identity(rows, cols);
}

/// Random Tucker tensor with exact multilinear rank r (with probability 1).
inline TuckerTensor random_tucker(const std::vector<Index>& dims, const std::vector<Index>& ranks,
                                  std::uint64_t seed) {
    DenseTensor core = random_tensor(Shape(ranks), seed);
    std::vector<Matrix> factors;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        factors.push_back(random_orthonormal(dims[j], ranks[j], seed + 101 * (j + 1)));
    }
    return TuckerTensor(std::move(core), std::move(factors));
}

inline double rel_error(const DenseTensor& a, const DenseTensor& b) {
    return (a - b).frobenius_norm() / b.frobenius_norm();
}

}  // namespace lrst::testing
