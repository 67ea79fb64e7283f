#pragma once

#include "apollo/tensor.hpp"

namespace apollo {

// Reference semantics for every tensor operation the language supports.
// These are the ground truth the compiler and VM are tested against; no
// attempt is made at BLAS-grade performance.

/// lambda * x, elementwise. Any rank.
DenseTensor scalar_tensor_product(double lambda, const DenseTensor& x);

/// Rank-n Kronecker product. Operands of unequal rank are padded with
/// leading extents of 1 first. Result extent in mode k is I_k * J_k and
/// block (i_1..i_n) equals x[i_1..i_n] * y.
DenseTensor kronecker(const DenseTensor& x, const DenseTensor& y);

/// Sum of elementwise products. Shapes must match.
double inner_product(const DenseTensor& x, const DenseTensor& y);

/// Tensor dot product. Contracts the last mode of x against the
/// second-to-last mode of y (the sole mode when y is rank 1); the result
/// carries x's leading modes followed by y's non-contracted modes.
/// Rank-1 . rank-1 yields a rank-0 tensor.
DenseTensor dot(const DenseTensor& x, const DenseTensor& y);

/// Column-wise Kronecker product of two matrices with equal column counts.
DenseTensor khatri_rao(const DenseTensor& a, const DenseTensor& b);

/// Row-wise Kronecker product of two matrices with equal row counts.
DenseTensor face_splitting(const DenseTensor& a, const DenseTensor& b);

/// Cross product of two length-3 vectors.
DenseTensor cross(const DenseTensor& u, const DenseTensor& v);

/// Last-mode fibers in lexicographic order of the leading indices.
/// A rank-1 tensor yields itself as the single fiber. Rank-0 is an error.
std::vector<DenseTensor> fibers(const DenseTensor& x);

/// True iff shapes match and max |x - y| <= tol * max(1, max |y|).
bool approx_equal(const DenseTensor& x, const DenseTensor& y, double tol);

}  // namespace apollo
