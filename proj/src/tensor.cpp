#include "lrst/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrst {

Shape::Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) {
        throw std::invalid_argument("Shape: order must be at least 2");
    }
    size_ = 1;
    for (Index d : dims_) {
        if (d < 1) {
            throw std::invalid_argument("Shape: dimensions must be positive");
        }
        if (size_ > std::numeric_limits<Index>::max() / d) {
            throw std::invalid_argument("Shape: total size overflows");
        }
        size_ *= d;
    }
}

Index Shape::flat_index(std::span<const Index> multi) const {
    if (static_cast<Index>(multi.size()) != order()) {
        throw std::invalid_argument("flat_index: wrong number of indices");
    }
    Index flat = 0;
    for (Index j = 0; j < order(); ++j) {
        const Index i = multi[static_cast<std::size_t>(j)];
        if (i < 0 || i >= dim(j)) {
            throw std::out_of_range("flat_index: index out of bounds");
        }
        flat = flat * dim(j) + i;
    }
    return flat;
}

std::vector<Index> Shape::multi_index(Index flat) const {
    if (flat < 0 || flat >= size_) {
        throw std::out_of_range("multi_index: flat index out of bounds");
    }
    std::vector<Index> multi(static_cast<std::size_t>(order()));
    for (Index j = order() - 1; j >= 0; --j) {
        multi[static_cast<std::size_t>(j)] = flat % dim(j);
        flat /= dim(j);
    }
    return multi;
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(shape_.size()), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<Index>(data_.size()) != shape_.size()) {
        throw std::invalid_argument("DenseTensor: data length does not match shape");
    }
    if (!all_finite()) {
        throw std::invalid_argument("DenseTensor: non-finite values");
    }
}

double DenseTensor::frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum);
}

double DenseTensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool DenseTensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (shape_ != other.shape_) throw std::invalid_argument("tensor add: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (shape_ != other.shape_) throw std::invalid_argument("tensor subtract: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(double scale) {
    for (double& v : data_) v *= scale;
    return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double scale, DenseTensor t) { return t *= scale; }

SparseTensor::SparseTensor(Shape shape, std::vector<Entry> entries)
    : shape_(std::move(shape)), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.flat < b.flat; });
    Index prev = -1;
    for (const Entry& e : entries_) {
        if (e.flat < 0 || e.flat >= shape_.size()) {
            throw std::out_of_range("SparseTensor: index out of bounds");
        }
        if (e.flat == prev) {
            throw std::invalid_argument("SparseTensor: duplicate index");
        }
        if (!std::isfinite(e.value)) {
            throw std::invalid_argument("SparseTensor: non-finite value");
        }
        prev = e.flat;
    }
}

std::vector<Index> SparseTensor::slice_counts(Index mode) const {
    if (mode < 0 || mode >= shape_.order()) {
        throw std::invalid_argument("slice_counts: mode out of range");
    }
    std::vector<Index> counts(static_cast<std::size_t>(shape_.dim(mode)), 0);
    Index inner = 1;
    for (Index j = mode + 1; j < shape_.order(); ++j) inner *= shape_.dim(j);
    for (const Entry& e : entries_) {
        const Index slice = (e.flat / inner) % shape_.dim(mode);
        ++counts[static_cast<std::size_t>(slice)];
    }
    return counts;
}

double SparseTensor::max_slice_fraction() const {
    double frac = 0.0;
    for (Index j = 0; j < shape_.order(); ++j) {
        const double denom = static_cast<double>(shape_.co_size(j));
        for (Index c : slice_counts(j)) {
            frac = std::max(frac, static_cast<double>(c) / denom);
        }
    }
    return frac;
}

DenseTensor SparseTensor::to_dense() const {
    DenseTensor out(shape_);
    for (const Entry& e : entries_) out[e.flat] = e.value;
    return out;
}

double SparseTensor::frobenius_distance(const SparseTensor& other) const {
    if (shape_ != other.shape_) throw std::invalid_argument("frobenius_distance: shape mismatch");
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < entries_.size() || j < other.entries_.size()) {
        if (j >= other.entries_.size() ||
            (i < entries_.size() && entries_[i].flat < other.entries_[j].flat)) {
            sum += entries_[i].value * entries_[i].value;
            ++i;
        } else if (i >= entries_.size() || other.entries_[j].flat < entries_[i].flat) {
            sum += other.entries_[j].value * other.entries_[j].value;
            ++j;
        } else {
            const double d = entries_[i].value - other.entries_[j].value;
            sum += d * d;
            ++i;
            ++j;
        }
    }
    return std::sqrt(sum);
}

}  // namespace lrst
