#include "apollo/avm/accelerator.hpp"

#include <Eigen/Dense>

#include "apollo/tensor_ops.hpp"

namespace apollo::avm {

MvmBackend accelerator_backend() {
    return [](std::span<const double> a, std::int64_t rows, std::int64_t cols,
              std::span<const double> b) {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const RowMajor> matrix(a.data(), rows, cols);
        Eigen::Map<const Eigen::VectorXd> vec(b.data(), cols);
        Eigen::VectorXd y = matrix * vec;
        return std::vector<double>(y.data(), y.data() + rows);
    };
}

MvmBackend oracle_backend() {
    return [](std::span<const double> a, std::int64_t rows, std::int64_t cols,
              std::span<const double> b) {
        DenseTensor matrix{Shape({rows, cols}), std::vector<double>(a.begin(), a.end())};
        DenseTensor vec{Shape({cols}), std::vector<double>(b.begin(), b.end())};
        DenseTensor y = dot(matrix, vec);
        return std::vector<double>(y.data().begin(), y.data().end());
    };
}

}  // namespace apollo::avm
