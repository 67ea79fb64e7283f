#include "apollo/codegen.hpp"

#include <cmath>
#include <map>

namespace apollo::codegen {

using avm::Builtin;
using avm::Instr;
using avm::Opcode;
using avm::Segment;
using frontend::BinOp;
using frontend::Expr;
using frontend::ExprKind;
using frontend::ValueType;

namespace {

std::int64_t header_size(int rank) { return 1 + rank; }

class Generator {
public:
    Generator(const frontend::Program& program, const std::vector<frontend::Symbol>& symbols)
        : program_(program) {
        for (const frontend::Symbol& sym : symbols) {
            slot_by_name_[sym.name] = sym.global_index;
            avm::GlobalType t = sym.type == ValueType::Int     ? avm::GlobalType::Int
                                : sym.type == ValueType::Float ? avm::GlobalType::Float
                                                               : avm::GlobalType::Tensor;
            out_.globals.push_back({sym.name, t});
        }
        next_slot_ = static_cast<std::int64_t>(symbols.size());
    }

    avm::Program run() {
        for (const frontend::LetStatement& s : program_.statements) {
            gen_expr(*s.value);
            emit(Instr::pop(Segment::Global, slot_by_name_.at(s.name)));
        }
        out_.global_count = next_slot_;
        return std::move(out_);
    }

private:
    const frontend::Program& program_;
    avm::Program out_;
    std::map<std::string, std::int64_t> slot_by_name_;
    std::int64_t next_slot_ = 0;

    void emit(Instr i) { out_.code.push_back(i); }
    std::int64_t fresh_slot() { return next_slot_++; }

    // ---- expression dispatch ------------------------------------------

    // Leaves the expression's value on the stack: a number for scalars, a
    // record ref for tensors.
    void gen_expr(const Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLiteral:
                if (e.int_value < 0 && e.int_value != INT64_MIN) {
                    emit(Instr::push_int(-e.int_value));
                    emit(Instr::simple(Opcode::Neg));
                } else {
                    emit(Instr::push_int(e.int_value));
                }
                return;
            case ExprKind::FloatLiteral:
                if (std::signbit(e.float_value)) {
                    emit(Instr::push_float(-e.float_value));
                    emit(Instr::simple(Opcode::Neg));
                } else {
                    emit(Instr::push_float(e.float_value));
                }
                return;
            case ExprKind::VariableRef:
                emit(Instr::push(Segment::Global, slot_by_name_.at(e.name)));
                return;
            case ExprKind::TensorLiteral:
                emit(Instr::push(Segment::Literal, add_literal(e)));
                return;
            case ExprKind::UnaryNeg:
                if (e.type != ValueType::Tensor) {
                    gen_expr(*e.lhs);
                    emit(Instr::simple(Opcode::Neg));
                } else {
                    std::int64_t lam = fresh_slot();
                    emit(Instr::push_int(1));
                    emit(Instr::simple(Opcode::Neg));
                    emit(Instr::pop(Segment::Global, lam));
                    std::int64_t t = stage(*e.lhs);
                    gen_scalar_tensor(lam, t, e.lhs->shape);
                }
                return;
            case ExprKind::BinaryOp:
                gen_binary(e);
                return;
        }
    }

    void gen_binary(const Expr& e) {
        const Expr& a = *e.lhs;
        const Expr& b = *e.rhs;
        bool a_tensor = a.type == ValueType::Tensor;
        bool b_tensor = b.type == ValueType::Tensor;
        switch (e.op) {
            case BinOp::Add:
            case BinOp::Sub:
                if (!a_tensor) {
                    gen_expr(a);
                    gen_expr(b);
                    emit(Instr::simple(e.op == BinOp::Add ? Opcode::Add : Opcode::Sub));
                } else {
                    std::int64_t xs = stage(a), ys = stage(b);
                    gen_elementwise(xs, ys, e.shape, e.op == BinOp::Sub);
                }
                return;
            case BinOp::Div:
                gen_expr(a);
                gen_expr(b);
                emit(Instr::simple(Opcode::Div));
                return;
            case BinOp::Mul:
                if (!a_tensor && !b_tensor) {
                    gen_expr(a);
                    gen_expr(b);
                    emit(Instr::simple(Opcode::Mult));
                } else if (a_tensor != b_tensor) {
                    // The product is reoriented so the generated code is
                    // identical for T*2 and 2*T: scalar staged first.
                    const Expr& scalar = a_tensor ? b : a;
                    const Expr& tensor = a_tensor ? a : b;
                    std::int64_t lam = stage(scalar);
                    std::int64_t t = stage(tensor);
                    gen_scalar_tensor(lam, t, tensor.shape);
                } else {
                    std::int64_t xs = stage(a), ys = stage(b);
                    gen_dot(xs, a.shape, ys, b.shape);
                }
                return;
            case BinOp::Kronecker: {
                std::int64_t xs = stage(a), ys = stage(b);
                gen_kronecker(xs, a.shape, ys, b.shape, e.shape);
                return;
            }
            case BinOp::KhatriRao: {
                std::int64_t xs = stage(a), ys = stage(b);
                gen_khatri_rao(xs, a.shape, ys, b.shape);
                return;
            }
            case BinOp::FaceSplit: {
                std::int64_t xs = stage(a), ys = stage(b);
                gen_face_splitting(xs, a.shape, ys, b.shape);
                return;
            }
            case BinOp::Cross: {
                std::int64_t us = stage(a), vs = stage(b);
                emit(Instr::push(Segment::Global, us));
                emit(Instr::call(Builtin::CrossMat, 1));
                emit(Instr::push(Segment::Global, vs));
                emit(Instr::simple(Opcode::Mvmul));
                return;
            }
        }
    }

    // Evaluates an operand into a global slot. Variables already live in
    // one; everything else lands in a scratch slot.
    std::int64_t stage(const Expr& e) {
        if (e.kind == ExprKind::VariableRef) return slot_by_name_.at(e.name);
        gen_expr(e);
        std::int64_t s = fresh_slot();
        emit(Instr::pop(Segment::Global, s));
        return s;
    }

    std::int64_t add_literal(const Expr& e) {
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(e.shape.element_count()));
        collect_literal(e, data);
        DenseTensor dense{e.shape, std::move(data)};
        std::int64_t index = static_cast<std::int64_t>(out_.literals.size());
        out_.literals.push_back({bstt::flatten(bstt::from_dense(dense)), e.shape});
        return index;
    }

    static void collect_literal(const Expr& e, std::vector<double>& out) {
        for (const auto& elem : e.elements) {
            switch (elem->kind) {
                case ExprKind::TensorLiteral:
                    collect_literal(*elem, out);
                    break;
                case ExprKind::IntLiteral:
                    out.push_back(static_cast<double>(elem->int_value));
                    break;
                default:
                    out.push_back(elem->float_value);
                    break;
            }
        }
    }

    // ---- shared lowering plumbing --------------------------------------

    std::int64_t alloc_result(const Shape& shape) {
        emit(Instr::push_int(shape.rank()));
        for (int k = 0; k < shape.rank(); ++k) emit(Instr::push_int(shape.extent(k)));
        emit(Instr::call(Builtin::AllocTensor, shape.rank() + 1));
        std::int64_t slot = fresh_slot();
        emit(Instr::pop(Segment::Global, slot));
        return slot;
    }

    // dst_slot = src[flat] via the movable this segment.
    void read_element(std::int64_t src_slot, int src_rank, std::int64_t flat,
                      std::int64_t dst_slot) {
        emit(Instr::push(Segment::Global, src_slot));
        emit(Instr::pop(Segment::Pointer, 0));
        emit(Instr::push(Segment::This, header_size(src_rank) + flat));
        emit(Instr::pop(Segment::Global, dst_slot));
    }

    // One scaled-fiber accelerator dispatch writing a contiguous payload
    // range: dest[off .. off+len) (+)= lambda*I . fiber(src, f).
    void scaled_fiber_write(std::int64_t dest_slot, std::int64_t off, std::int64_t lam_slot,
                            std::int64_t len, std::int64_t src_slot, std::int64_t f,
                            bool accumulate) {
        emit(Instr::push(Segment::Global, dest_slot));
        emit(Instr::push_int(off));
        emit(Instr::push(Segment::Global, lam_slot));
        emit(Instr::push_int(len));
        emit(Instr::call(Builtin::Diag, 2));
        emit(Instr::push(Segment::Global, src_slot));
        emit(Instr::push_int(f));
        emit(Instr::call(Builtin::Fiber, 2));
        emit(Instr::simple(Opcode::Mvmul));
        emit(Instr::push_int(accumulate ? 1 : 0));
        emit(Instr::call(Builtin::WriteFiber, 4));
        emit(Instr::pop(Segment::Global, dest_slot));  // discard the returned dest ref
    }

    // Gathers strided source elements into a fresh vector record in dst_slot.
    void gather(std::int64_t src_slot, int src_rank, const std::vector<std::int64_t>& flats,
                std::int64_t dst_slot) {
        std::int64_t len = static_cast<std::int64_t>(flats.size());
        emit(Instr::push_int(1));
        emit(Instr::push_int(len));
        emit(Instr::call(Builtin::AllocTensor, 2));
        emit(Instr::pop(Segment::Global, dst_slot));
        emit(Instr::push(Segment::Global, src_slot));
        emit(Instr::pop(Segment::Pointer, 0));
        for (std::int64_t flat : flats)
            emit(Instr::push(Segment::This, header_size(src_rank) + flat));
        emit(Instr::push(Segment::Global, dst_slot));
        emit(Instr::pop(Segment::Pointer, 0));
        for (std::int64_t k = len - 1; k >= 0; --k)
            emit(Instr::pop(Segment::This, 2 + k));
    }

    // Scatters the vector record in src_slot to arbitrary payload
    // positions of the record in dest_slot.
    void scatter(std::int64_t src_slot, std::int64_t len, std::int64_t dest_slot, int dest_rank,
                 const std::vector<std::int64_t>& positions) {
        emit(Instr::push(Segment::Global, src_slot));
        emit(Instr::pop(Segment::Pointer, 0));
        for (std::int64_t k = 0; k < len; ++k) emit(Instr::push(Segment::This, 2 + k));
        emit(Instr::push(Segment::Global, dest_slot));
        emit(Instr::pop(Segment::Pointer, 0));
        for (std::int64_t k = len - 1; k >= 0; --k)
            emit(Instr::pop(Segment::This,
                            header_size(dest_rank) + positions[static_cast<std::size_t>(k)]));
    }

    // ---- per-operation generators --------------------------------------

    // One mvmul per fiber against the runtime-built lambda*I matrix.
    void gen_scalar_tensor(std::int64_t lam_slot, std::int64_t t_slot, const Shape& shape) {
        std::int64_t res = alloc_result(shape);
        std::int64_t last = shape.extent(shape.rank() - 1);
        std::int64_t fibers = shape.element_count() / last;
        for (std::int64_t f = 0; f < fibers; ++f)
            scaled_fiber_write(res, f * last, lam_slot, last, t_slot, f, false);
        emit(Instr::push(Segment::Global, res));
    }

    // x + y / x - y, elementwise: identity-scaled fiber copy of x, then an
    // accumulating (+/-)identity pass over y. Two mvmuls per fiber pair.
    void gen_elementwise(std::int64_t x_slot, std::int64_t y_slot, const Shape& shape,
                         bool subtract) {
        std::int64_t one = fresh_slot();
        emit(Instr::push_int(1));
        emit(Instr::pop(Segment::Global, one));
        std::int64_t sign = one;
        if (subtract) {
            sign = fresh_slot();
            emit(Instr::push_int(1));
            emit(Instr::simple(Opcode::Neg));
            emit(Instr::pop(Segment::Global, sign));
        }
        std::int64_t res = alloc_result(shape);
        std::int64_t last = shape.extent(shape.rank() - 1);
        std::int64_t fibers = shape.element_count() / last;
        for (std::int64_t f = 0; f < fibers; ++f) {
            scaled_fiber_write(res, f * last, one, last, x_slot, f, false);
            scaled_fiber_write(res, f * last, sign, last, y_slot, f, true);
        }
        emit(Instr::push(Segment::Global, res));
    }

    // Every element of the result block (i_1..i_n) is x[i_1..i_n] * y, so
    // each x element drives one scalar-tensor pass over y's fibers, offset
    // to the block position. |x| * fibers(y) mvmuls.
    void gen_kronecker(std::int64_t x_slot, const Shape& xshape, std::int64_t y_slot,
                       const Shape& yshape, const Shape& rshape) {
        int rank = rshape.rank();
        auto pad = [rank](const Shape& s) {
            std::vector<std::int64_t> d(static_cast<std::size_t>(rank), 1);
            for (int k = 0; k < s.rank(); ++k)
                d[static_cast<std::size_t>(rank - s.rank() + k)] = s.extent(k);
            return d;
        };
        std::vector<std::int64_t> xd = pad(xshape), yd = pad(yshape);
        std::vector<std::int64_t> rstride(static_cast<std::size_t>(rank), 1);
        for (int k = rank - 2; k >= 0; --k)
            rstride[static_cast<std::size_t>(k)] =
                rstride[static_cast<std::size_t>(k + 1)] * rshape.extent(k + 1);

        std::int64_t res = alloc_result(rshape);
        std::int64_t lam = fresh_slot();
        std::int64_t yn = yd[static_cast<std::size_t>(rank - 1)];
        std::int64_t yfibers = yshape.element_count() / yn;

        std::vector<std::int64_t> ix(static_cast<std::size_t>(rank), 0);
        for (std::int64_t xf = 0; xf < xshape.element_count(); ++xf) {
            read_element(x_slot, xshape.rank(), xf, lam);
            std::vector<std::int64_t> jy(static_cast<std::size_t>(rank), 0);
            for (std::int64_t g = 0; g < yfibers; ++g) {
                std::int64_t off = ix[static_cast<std::size_t>(rank - 1)] * yn;
                for (int k = 0; k + 1 < rank; ++k)
                    off += (ix[static_cast<std::size_t>(k)] * yd[static_cast<std::size_t>(k)] +
                            jy[static_cast<std::size_t>(k)]) *
                           rstride[static_cast<std::size_t>(k)];
                scaled_fiber_write(res, off, lam, yn, y_slot, g, false);
                for (int k = rank - 2; k >= 0; --k) {  // advance y's leading indices
                    if (++jy[static_cast<std::size_t>(k)] < yd[static_cast<std::size_t>(k)]) break;
                    jy[static_cast<std::size_t>(k)] = 0;
                }
            }
            for (int k = rank - 1; k >= 0; --k) {  // advance x's indices
                if (++ix[static_cast<std::size_t>(k)] < xd[static_cast<std::size_t>(k)]) break;
                ix[static_cast<std::size_t>(k)] = 0;
            }
        }
        emit(Instr::push(Segment::Global, res));
    }

    // Copies slice s of x (the trailing-two-mode matrix block) into a fresh
    // rows x cols record. Host work only.
    std::int64_t materialize_slice(std::int64_t x_slot, std::int64_t s, std::int64_t rows,
                                   std::int64_t cols, std::int64_t slice_slot) {
        emit(Instr::push_int(2));
        emit(Instr::push_int(rows));
        emit(Instr::push_int(cols));
        emit(Instr::call(Builtin::AllocTensor, 3));
        emit(Instr::pop(Segment::Global, slice_slot));
        for (std::int64_t r = 0; r < rows; ++r) {
            emit(Instr::push(Segment::Global, slice_slot));
            emit(Instr::push_int(r * cols));
            emit(Instr::push(Segment::Global, x_slot));
            emit(Instr::push_int(s * rows + r));
            emit(Instr::call(Builtin::Fiber, 2));
            emit(Instr::push_int(0));
            emit(Instr::call(Builtin::WriteFiber, 4));
            emit(Instr::pop(Segment::Global, slice_slot));
        }
        return slice_slot;
    }

    // The tensor dot product, by case analysis on the operand ranks. The
    // contraction always pairs x's last mode with y's second-to-last (or a
    // rank-1 y's only mode). Rank-1 . rank-1 leaves a float on the stack;
    // everything else leaves a record ref.
    void gen_dot(std::int64_t x_slot, const Shape& xshape, std::int64_t y_slot,
                 const Shape& yshape) {
        int m = xshape.rank(), n = yshape.rank();
        std::int64_t contraction = xshape.extent(m - 1);

        if (n == 1) {
            if (m <= 2) {
                // one mvmul; a rank-1 x acts as a 1 x K matrix
                emit(Instr::push(Segment::Global, x_slot));
                emit(Instr::push(Segment::Global, y_slot));
                emit(Instr::simple(Opcode::Mvmul));
                if (m == 1) {
                    // inner product: extract the single element as a float
                    std::int64_t mv = fresh_slot();
                    emit(Instr::pop(Segment::Global, mv));
                    emit(Instr::push(Segment::Global, mv));
                    emit(Instr::pop(Segment::Pointer, 0));
                    emit(Instr::push(Segment::This, 2));
                }
                return;
            }
            // x decomposes into trailing-two-mode matrix slices; each
            // slice * y is one last-mode fiber of the result.
            std::vector<std::int64_t> rd(xshape.dims().begin(), xshape.dims().end() - 1);
            Shape rshape{rd};
            std::int64_t res = alloc_result(rshape);
            std::int64_t rows = xshape.extent(m - 2);
            std::int64_t slices = xshape.element_count() / (rows * contraction);
            std::int64_t slice_slot = fresh_slot();
            for (std::int64_t s = 0; s < slices; ++s) {
                materialize_slice(x_slot, s, rows, contraction, slice_slot);
                emit(Instr::push(Segment::Global, res));
                emit(Instr::push_int(s * rows));
                emit(Instr::push(Segment::Global, slice_slot));
                emit(Instr::push(Segment::Global, y_slot));
                emit(Instr::simple(Opcode::Mvmul));
                emit(Instr::push_int(0));
                emit(Instr::call(Builtin::WriteFiber, 4));
                emit(Instr::pop(Segment::Global, res));
            }
            emit(Instr::push(Segment::Global, res));
            return;
        }

        // n >= 2: pair every matrix slice of x against every
        // contraction-mode fiber y[j_1..j_{n-2}, :, j_n].
        std::int64_t yn = yshape.extent(n - 1);
        std::int64_t ylead = yshape.element_count() / (contraction * yn);
        std::int64_t rest = ylead * yn;  // result words per x row

        std::vector<std::int64_t> rd;
        for (int k = 0; k + 1 < m; ++k) rd.push_back(xshape.extent(k));
        for (int k = 0; k + 2 < n; ++k) rd.push_back(yshape.extent(k));
        rd.push_back(yn);
        Shape rshape{rd};
        std::int64_t res = alloc_result(rshape);

        std::int64_t rows = m >= 2 ? xshape.extent(m - 2) : 1;
        std::int64_t slices = m >= 3 ? xshape.element_count() / (rows * contraction) : 1;
        std::int64_t slice_slot = m >= 3 ? fresh_slot() : x_slot;
        std::int64_t yfib_slot = fresh_slot();
        std::int64_t mv_slot = fresh_slot();

        auto yfiber_flats = [&](std::int64_t jl, std::int64_t jn) {
            std::vector<std::int64_t> flats;
            flats.reserve(static_cast<std::size_t>(contraction));
            for (std::int64_t k = 0; k < contraction; ++k)
                flats.push_back((jl * contraction + k) * yn + jn);
            return flats;
        };
        auto mvmul_scatter = [&](std::int64_t a_slot, std::int64_t row_block,
                                 std::int64_t restflat) {
            emit(Instr::push(Segment::Global, a_slot));
            emit(Instr::push(Segment::Global, yfib_slot));
            emit(Instr::simple(Opcode::Mvmul));
            emit(Instr::pop(Segment::Global, mv_slot));
            std::vector<std::int64_t> positions;
            positions.reserve(static_cast<std::size_t>(rows));
            for (std::int64_t r = 0; r < rows; ++r)
                positions.push_back((row_block + r) * rest + restflat);
            scatter(mv_slot, rows, res, rshape.rank(), positions);
        };

        if (m > n) {
            // y has lower rank: decompose it first (vector chain), then
            // walk x's slices per fiber.
            for (std::int64_t jl = 0; jl < ylead; ++jl)
                for (std::int64_t jn = 0; jn < yn; ++jn) {
                    gather(y_slot, n, yfiber_flats(jl, jn), yfib_slot);
                    for (std::int64_t s = 0; s < slices; ++s) {
                        if (m >= 3) materialize_slice(x_slot, s, rows, contraction, slice_slot);
                        mvmul_scatter(slice_slot, s * rows, jl * yn + jn);
                    }
                }
        } else {
            // x has the lower (or equal) rank: decompose it first.
            for (std::int64_t s = 0; s < slices; ++s) {
                if (m >= 3) materialize_slice(x_slot, s, rows, contraction, slice_slot);
                for (std::int64_t jl = 0; jl < ylead; ++jl)
                    for (std::int64_t jn = 0; jn < yn; ++jn) {
                        gather(y_slot, n, yfiber_flats(jl, jn), yfib_slot);
                        mvmul_scatter(slice_slot, s * rows, jl * yn + jn);
                    }
            }
        }
        emit(Instr::push(Segment::Global, res));
    }

    // Column k of the result is a_k (x) b_k, assembled by scaling b's
    // column by each a element. K*I mvmuls.
    void gen_khatri_rao(std::int64_t a_slot, const Shape& ashape, std::int64_t b_slot,
                        const Shape& bshape) {
        std::int64_t rows_a = ashape.extent(0), cols = ashape.extent(1);
        std::int64_t rows_b = bshape.extent(0);
        Shape rshape{{rows_a * rows_b, cols}};
        std::int64_t res = alloc_result(rshape);
        std::int64_t lam = fresh_slot();
        std::int64_t bcol_slot = fresh_slot();
        std::int64_t mv_slot = fresh_slot();
        for (std::int64_t k = 0; k < cols; ++k) {
            std::vector<std::int64_t> col_flats;
            for (std::int64_t j = 0; j < rows_b; ++j) col_flats.push_back(j * cols + k);
            gather(b_slot, 2, col_flats, bcol_slot);
            for (std::int64_t i = 0; i < rows_a; ++i) {
                read_element(a_slot, 2, i * cols + k, lam);
                emit(Instr::push(Segment::Global, lam));
                emit(Instr::push_int(rows_b));
                emit(Instr::call(Builtin::Diag, 2));
                emit(Instr::push(Segment::Global, bcol_slot));
                emit(Instr::simple(Opcode::Mvmul));
                emit(Instr::pop(Segment::Global, mv_slot));
                std::vector<std::int64_t> positions;
                for (std::int64_t j = 0; j < rows_b; ++j)
                    positions.push_back((i * rows_b + j) * cols + k);
                scatter(mv_slot, rows_b, res, 2, positions);
            }
        }
        emit(Instr::push(Segment::Global, res));
    }

    // Row k of the result is a_k (x) b_k; b's rows are fibers and the
    // scaled segments land contiguously. K*I mvmuls.
    void gen_face_splitting(std::int64_t a_slot, const Shape& ashape, std::int64_t b_slot,
                            const Shape& bshape) {
        std::int64_t rows = ashape.extent(0);
        std::int64_t acols = ashape.extent(1), bcols = bshape.extent(1);
        Shape rshape{{rows, acols * bcols}};
        std::int64_t res = alloc_result(rshape);
        std::int64_t lam = fresh_slot();
        for (std::int64_t k = 0; k < rows; ++k)
            for (std::int64_t i = 0; i < acols; ++i) {
                read_element(a_slot, 2, k * acols + i, lam);
                scaled_fiber_write(res, k * acols * bcols + i * bcols, lam, bcols, b_slot, k,
                                   false);
            }
        emit(Instr::push(Segment::Global, res));
    }
};

}  // namespace

avm::Program generate(const frontend::Program& program,
                      const std::vector<frontend::Symbol>& symbols) {
    return Generator{program, symbols}.run();
}

}  // namespace apollo::codegen
