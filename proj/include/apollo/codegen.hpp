#pragma once

#include "apollo/avm/program.hpp"
#include "apollo/frontend/ast.hpp"
#include "apollo/frontend/checker.hpp"

namespace apollo::codegen {

/// Lowers a fully checked program to straight-line AVM code.
///
/// Scalar arithmetic maps onto the host instructions. Every tensor
/// operation is decomposed, at compile time and fully unrolled, into a
/// sequence of accelerator mvmul dispatches plus host plumbing: fibers are
/// scaled through diagonal matrices, cross products go through the
/// antisymmetric matrix, and dot products decompose the higher-rank
/// operand into matrix slices and contraction-mode fibers. Tensor literals
/// are pooled in flat BSTT form.
///
/// The checker must have accepted the program; generate assumes every
/// expression is annotated.
avm::Program generate(const frontend::Program& program,
                      const std::vector<frontend::Symbol>& symbols);

}  // namespace apollo::codegen
