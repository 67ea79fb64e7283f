#include "apollo/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace apollo {

namespace {

// Pad to the target rank with leading extents of 1. The flat layout is
// unchanged, only the index arithmetic differs.
std::vector<std::int64_t> pad_dims(const Shape& s, int rank) {
    std::vector<std::int64_t> dims(static_cast<std::size_t>(rank), 1);
    int off = rank - s.rank();
    for (int k = 0; k < s.rank(); ++k) dims[static_cast<std::size_t>(off + k)] = s.extent(k);
    return dims;
}

// Advances a row-major multi-index; returns false after the last tuple.
bool advance(std::vector<std::int64_t>& idx, const std::vector<std::int64_t>& dims) {
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        if (++idx[static_cast<std::size_t>(k)] < dims[static_cast<std::size_t>(k)]) return true;
        idx[static_cast<std::size_t>(k)] = 0;
    }
    return false;
}

}  // namespace

DenseTensor scalar_tensor_product(double lambda, const DenseTensor& x) {
    DenseTensor r = x;
    for (double& v : r.data()) v *= lambda;
    return r;
}

DenseTensor kronecker(const DenseTensor& x, const DenseTensor& y) {
    int rank = std::max(x.rank(), y.rank());
    std::vector<std::int64_t> xi = pad_dims(x.shape(), rank);
    std::vector<std::int64_t> yj = pad_dims(y.shape(), rank);
    std::vector<std::int64_t> rd(static_cast<std::size_t>(rank));
    for (int k = 0; k < rank; ++k)
        rd[static_cast<std::size_t>(k)] = xi[static_cast<std::size_t>(k)] * yj[static_cast<std::size_t>(k)];
    DenseTensor r{Shape(rd)};

    std::vector<std::int64_t> ix(static_cast<std::size_t>(rank), 0);
    std::int64_t xf = 0;
    do {
        std::vector<std::int64_t> jy(static_cast<std::size_t>(rank), 0);
        std::int64_t yf = 0;
        do {
            std::int64_t flat = 0;
            for (int k = 0; k < rank; ++k) {
                std::size_t ks = static_cast<std::size_t>(k);
                flat = flat * rd[ks] + (ix[ks] * yj[ks] + jy[ks]);
            }
            r[flat] = x[xf] * y[yf];
            ++yf;
        } while (advance(jy, yj));
        ++xf;
    } while (rank > 0 && advance(ix, xi));
    return r;
}

double inner_product(const DenseTensor& x, const DenseTensor& y) {
    if (x.shape() != y.shape())
        throw TensorError("inner product requires equal shapes, got " + to_string(x.shape()) +
                          " and " + to_string(y.shape()));
    double sum = 0.0;
    for (std::int64_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
    return sum;
}

namespace {

// The contraction-mode fibers of y: vectors y[j_1..j_{n-2}, :, j_n] in
// lexicographic order of (j_1..j_{n-2}, j_n). For rank 1, y itself.
std::vector<std::vector<double>> contraction_fibers(const DenseTensor& y) {
    int n = y.rank();
    if (n == 1) return {std::vector<double>(y.data().begin(), y.data().end())};
    std::int64_t contraction = y.shape().extent(n - 2);
    std::int64_t last = y.shape().extent(n - 1);
    std::int64_t lead = y.size() / (contraction * last);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(lead * last));
    for (std::int64_t jl = 0; jl < lead; ++jl)
        for (std::int64_t jn = 0; jn < last; ++jn) {
            std::vector<double> f(static_cast<std::size_t>(contraction));
            for (std::int64_t k = 0; k < contraction; ++k)
                f[static_cast<std::size_t>(k)] = y[(jl * contraction + k) * last + jn];
            out.push_back(std::move(f));
        }
    return out;
}

}  // namespace

DenseTensor dot(const DenseTensor& x, const DenseTensor& y) {
    int m = x.rank(), n = y.rank();
    if (m < 1 || n < 1) throw TensorError("dot requires operands of rank >= 1");
    std::int64_t cx = x.shape().extent(m - 1);
    std::int64_t cy = n >= 2 ? y.shape().extent(n - 2) : y.shape().extent(0);
    if (cx != cy)
        throw TensorError("dot contraction extent mismatch: " + std::to_string(cx) + " vs " +
                          std::to_string(cy));

    std::vector<std::int64_t> rd;
    for (int k = 0; k + 1 < m; ++k) rd.push_back(x.shape().extent(k));
    for (int k = 0; k + 2 < n; ++k) rd.push_back(y.shape().extent(k));
    if (n >= 2) rd.push_back(y.shape().extent(n - 1));
    DenseTensor r{Shape(rd)};

    // One result element per (x fiber, y contraction fiber) pair.
    std::vector<std::vector<double>> yfibers = contraction_fibers(y);
    std::int64_t xlead = x.size() / cx;
    for (std::int64_t il = 0; il < xlead; ++il) {
        for (std::size_t jf = 0; jf < yfibers.size(); ++jf) {
            double sum = 0.0;
            for (std::int64_t k = 0; k < cx; ++k)
                sum += x[il * cx + k] * yfibers[jf][static_cast<std::size_t>(k)];
            r[il * static_cast<std::int64_t>(yfibers.size()) + static_cast<std::int64_t>(jf)] = sum;
        }
    }
    return r;
}

DenseTensor khatri_rao(const DenseTensor& a, const DenseTensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw TensorError("khatri-rao requires two matrices");
    std::int64_t i = a.shape().extent(0), ka = a.shape().extent(1);
    std::int64_t j = b.shape().extent(0), kb = b.shape().extent(1);
    if (ka != kb)
        throw TensorError("khatri-rao column count mismatch: " + std::to_string(ka) + " vs " +
                          std::to_string(kb));
    DenseTensor r{Shape({i * j, ka})};
    for (std::int64_t ii = 0; ii < i; ++ii)
        for (std::int64_t jj = 0; jj < j; ++jj)
            for (std::int64_t k = 0; k < ka; ++k)
                r[(ii * j + jj) * ka + k] = a[ii * ka + k] * b[jj * kb + k];
    return r;
}

DenseTensor face_splitting(const DenseTensor& a, const DenseTensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw TensorError("face-splitting requires two matrices");
    std::int64_t ka = a.shape().extent(0), i = a.shape().extent(1);
    std::int64_t kb = b.shape().extent(0), j = b.shape().extent(1);
    if (ka != kb)
        throw TensorError("face-splitting row count mismatch: " + std::to_string(ka) + " vs " +
                          std::to_string(kb));
    DenseTensor r{Shape({ka, i * j})};
    for (std::int64_t k = 0; k < ka; ++k)
        for (std::int64_t ii = 0; ii < i; ++ii)
            for (std::int64_t jj = 0; jj < j; ++jj)
                r[k * i * j + ii * j + jj] = a[k * i + ii] * b[k * j + jj];
    return r;
}

DenseTensor cross(const DenseTensor& u, const DenseTensor& v) {
    if (u.rank() != 1 || v.rank() != 1 || u.size() != 3 || v.size() != 3)
        throw TensorError("cross product requires two length-3 vectors");
    return DenseTensor{Shape({3}), {u[1] * v[2] - u[2] * v[1],
                                    u[2] * v[0] - u[0] * v[2],
                                    u[0] * v[1] - u[1] * v[0]}};
}

std::vector<DenseTensor> fibers(const DenseTensor& x) {
    if (x.rank() < 1) throw TensorError("fibers of a rank-0 tensor are undefined");
    std::int64_t len = x.shape().extent(x.rank() - 1);
    std::int64_t count = x.size() / len;
    std::vector<DenseTensor> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t f = 0; f < count; ++f) {
        std::vector<double> d(x.data().begin() + f * len, x.data().begin() + (f + 1) * len);
        out.emplace_back(Shape({len}), std::move(d));
    }
    return out;
}

bool approx_equal(const DenseTensor& x, const DenseTensor& y, double tol) {
    if (x.shape() != y.shape()) return false;
    double maxdiff = 0.0, maxy = 0.0;
    for (std::int64_t i = 0; i < x.size(); ++i) {
        maxdiff = std::max(maxdiff, std::abs(x[i] - y[i]));
        maxy = std::max(maxy, std::abs(y[i]));
    }
    return maxdiff <= tol * std::max(1.0, maxy);
}

}  // namespace apollo
