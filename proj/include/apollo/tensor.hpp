#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace apollo {

/// Raised on tensor shape/precondition violations.
struct TensorError : std::runtime_error {
    explicit TensorError(const std::string& what) : std::runtime_error(what) {}
};

/// Ordered list of positive extents I_1 ... I_n. Rank 0 (no extents) is a scalar.
class Shape {
public:
    Shape() = default;
    explicit Shape(std::vector<std::int64_t> dims);

    int rank() const { return static_cast<int>(dims_.size()); }
    std::int64_t extent(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
    const std::vector<std::int64_t>& dims() const { return dims_; }

    /// Product of extents; 1 for rank 0.
    std::int64_t element_count() const;

    /// Row-major flat offset of a full index tuple (last index fastest).
    std::int64_t flat_index(std::span<const std::int64_t> index) const;

    bool operator==(const Shape&) const = default;

private:
    std::vector<std::int64_t> dims_;
};

std::string to_string(const Shape& s);

/// Dense rank-n tensor of doubles in row-major order.
class DenseTensor {
public:
    DenseTensor() : data_(1, 0.0) {}  // rank-0 zero
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    static DenseTensor scalar(double v);

    const Shape& shape() const { return shape_; }
    int rank() const { return shape_.rank(); }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double operator[](std::int64_t flat) const { return data_[static_cast<std::size_t>(flat)]; }
    double& operator[](std::int64_t flat) { return data_[static_cast<std::size_t>(flat)]; }

    double at(std::span<const std::int64_t> index) const;
    double& at(std::span<const std::int64_t> index);

    bool operator==(const DenseTensor&) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace apollo
