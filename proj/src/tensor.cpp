#include "apollo/tensor.hpp"

#include <numeric>
#include <sstream>

namespace apollo {

Shape::Shape(std::vector<std::int64_t> dims) : dims_(std::move(dims)) {
    for (std::int64_t d : dims_) {
        if (d < 1) throw TensorError("shape extent must be >= 1, got " + std::to_string(d));
    }
}

std::int64_t Shape::element_count() const {
    std::int64_t n = 1;
    for (std::int64_t d : dims_) n *= d;
    return n;
}

std::int64_t Shape::flat_index(std::span<const std::int64_t> index) const {
    if (static_cast<int>(index.size()) != rank())
        throw TensorError("index tuple rank mismatch");
    std::int64_t flat = 0;
    for (int k = 0; k < rank(); ++k) {
        if (index[static_cast<std::size_t>(k)] < 0 || index[static_cast<std::size_t>(k)] >= dims_[static_cast<std::size_t>(k)])
            throw TensorError("index out of bounds in mode " + std::to_string(k));
        flat = flat * dims_[static_cast<std::size_t>(k)] + index[static_cast<std::size_t>(k)];
    }
    return flat;
}

std::string to_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (int k = 0; k < s.rank(); ++k) {
        if (k) os << 'x';
        os << s.extent(k);
    }
    os << ']';
    return os.str();
}

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_.element_count()), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != shape_.element_count())
        throw TensorError("data length does not match shape element count");
}

DenseTensor DenseTensor::scalar(double v) {
    DenseTensor t;
    t.data_[0] = v;
    return t;
}

double DenseTensor::at(std::span<const std::int64_t> index) const {
    return data_[static_cast<std::size_t>(shape_.flat_index(index))];
}

double& DenseTensor::at(std::span<const std::int64_t> index) {
    return data_[static_cast<std::size_t>(shape_.flat_index(index))];
}

}  // namespace apollo
