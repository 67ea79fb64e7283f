#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace apollo::avm {

/// The accelerator services exactly one operation: y = A * b for a
/// row-major rows x cols matrix. The VM validates shapes and counts the
/// dispatch; the backend only computes.
using MvmBackend = std::function<std::vector<double>(
    std::span<const double> a, std::int64_t rows, std::int64_t cols, std::span<const double> b)>;

/// Default simulator kernel (Eigen matrix-vector product).
MvmBackend accelerator_backend();

/// Same contract, routed through the reference tensor dot product. Swapping
/// this in must not change any observable program result.
MvmBackend oracle_backend();

}  // namespace apollo::avm
