#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrst {

using Index = std::int64_t;

/// Thrown when a matricization is singular at the declared rank.
class RankDeficientError : public std::runtime_error {
public:
    explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an evaluation produces non-finite values.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimensions (d_1, ..., d_m) of an order-m tensor, m >= 2.
class Shape {
public:
    Shape() = default;
    explicit Shape(std::vector<Index> dims);

    Index order() const { return static_cast<Index>(dims_.size()); }
    Index dim(Index mode) const { return dims_[static_cast<std::size_t>(mode)]; }
    const std::vector<Index>& dims() const { return dims_; }

    /// Total number of entries d* = prod d_j.
    Index size() const { return size_; }
    /// d_j^- = d* / d_j, the co-dimension of mode j.
    Index co_size(Index mode) const { return size_ / dim(mode); }

    /// Row-major flat index, last index varying fastest.
    Index flat_index(std::span<const Index> multi) const;
    std::vector<Index> multi_index(Index flat) const;

    bool operator==(const Shape& other) const { return dims_ == other.dims_; }
    bool operator!=(const Shape& other) const { return dims_ != other.dims_; }

private:
    std::vector<Index> dims_;
    Index size_ = 0;
};

/// Dense order-m tensor of doubles, row-major with the last index fastest.
class DenseTensor {
public:
    DenseTensor() = default;
    /// Zero tensor of the given shape.
    explicit DenseTensor(Shape shape);
    /// Takes ownership of data; rejects size mismatch and non-finite values.
    DenseTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    Index size() const { return shape_.size(); }
    Index order() const { return shape_.order(); }

    double operator[](Index flat) const { return data_[static_cast<std::size_t>(flat)]; }
    double& operator[](Index flat) { return data_[static_cast<std::size_t>(flat)]; }
    double at(std::span<const Index> multi) const { return data_[static_cast<std::size_t>(shape_.flat_index(multi))]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double frobenius_norm() const;
    double max_abs() const;
    bool all_finite() const;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double scale);

private:
    Shape shape_;
    std::vector<double> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double scale, DenseTensor t);

/// Coordinate-list sparse tensor; entries unique and sorted by flat index.
class SparseTensor {
public:
    struct Entry {
        Index flat;
        double value;
    };

    SparseTensor() = default;
    explicit SparseTensor(Shape shape) : shape_(std::move(shape)) {}
    SparseTensor(Shape shape, std::vector<Entry> entries);

    const Shape& shape() const { return shape_; }
    const std::vector<Entry>& entries() const { return entries_; }
    Index nnz() const { return static_cast<Index>(entries_.size()); }

    /// Number of entries with multi-index component `slice` in `mode`.
    std::vector<Index> slice_counts(Index mode) const;
    /// max over modes and slices of (nonzeros in slice) / d_j^-; the alpha'
    /// such that the tensor lies in S_{alpha'}.
    double max_slice_fraction() const;

    DenseTensor to_dense() const;
    /// this - other in Frobenius norm without densifying.
    double frobenius_distance(const SparseTensor& other) const;

private:
    Shape shape_;
    std::vector<Entry> entries_;
};

}  // namespace lrst
