#pragma once

#include <random>
#include <vector>

#include "apollo/tensor.hpp"

namespace apollo::testsupport {

inline Shape random_shape(std::mt19937& rng, int max_rank, std::int64_t max_extent,
                          int min_rank = 1) {
    std::uniform_int_distribution<int> rank_dist(min_rank, max_rank);
    std::uniform_int_distribution<std::int64_t> extent_dist(1, max_extent);
    int rank = rank_dist(rng);
    std::vector<std::int64_t> dims;
    for (int k = 0; k < rank; ++k) dims.push_back(extent_dist(rng));
    return Shape{dims};
}

inline DenseTensor random_tensor(std::mt19937& rng, const Shape& shape, double lo = -10.0,
                                 double hi = 10.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseTensor t{shape};
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

// Zeroes out roughly `fraction` of the entries.
inline DenseTensor sparsify(std::mt19937& rng, DenseTensor t, double fraction) {
    std::bernoulli_distribution drop(fraction);
    for (std::int64_t i = 0; i < t.size(); ++i)
        if (drop(rng)) t[i] = 0.0;
    return t;
}

// Brute-force dot product oracle: walks full index tuples with an odometer
// and sums with tuple-based element access. Kept independent of the
// fiber-pairing implementation it checks.
inline DenseTensor brute_force_dot(const DenseTensor& x, const DenseTensor& y) {
    int m = x.rank(), n = y.rank();
    std::int64_t contraction = x.shape().extent(m - 1);

    std::vector<std::int64_t> result_dims;
    for (int k = 0; k + 1 < m; ++k) result_dims.push_back(x.shape().extent(k));
    for (int k = 0; k + 2 < n; ++k) result_dims.push_back(y.shape().extent(k));
    if (n >= 2) result_dims.push_back(y.shape().extent(n - 1));
    DenseTensor r{Shape{result_dims}};

    std::vector<std::int64_t> out_idx(result_dims.size(), 0);
    bool more = true;
    while (more) {
        double sum = 0.0;
        for (std::int64_t k = 0; k < contraction; ++k) {
            std::vector<std::int64_t> xi(out_idx.begin(), out_idx.begin() + (m - 1));
            xi.push_back(k);
            std::vector<std::int64_t> yi;
            for (int j = 0; j + 2 < n; ++j)
                yi.push_back(out_idx[static_cast<std::size_t>(m - 1 + j)]);
            if (n >= 2) {
                yi.push_back(k);
                yi.push_back(out_idx.back());
            } else {
                yi.push_back(k);
            }
            sum += x.at(xi) * y.at(yi);
        }
        r.at(out_idx) = sum;

        more = false;
        for (int k = static_cast<int>(out_idx.size()) - 1; k >= 0; --k) {
            if (++out_idx[static_cast<std::size_t>(k)] < result_dims[static_cast<std::size_t>(k)]) {
                more = true;
                break;
            }
            out_idx[static_cast<std::size_t>(k)] = 0;
        }
        if (out_idx.empty()) break;  // rank-0 result: single element
    }
    return r;
}

}  // namespace apollo::testsupport
