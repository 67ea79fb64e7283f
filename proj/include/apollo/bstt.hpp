#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "apollo/tensor.hpp"

namespace apollo::bstt {

/// One node of a Binary Sparse Tensor Tree. Index nodes carry a mode index
/// plus first-child / next-sibling links (left-child right-sibling form);
/// leaves carry a nonzero value and no links. Links are arena offsets,
/// -1 when absent.
struct BsttNode {
    bool is_leaf = false;
    std::int64_t index = 0;
    double value = 0.0;
    std::int32_t first_child = -1;
    std::int32_t next_sibling = -1;
};

/// Flat pre-order image of a BSTT: one tagged word per node (index nodes
/// as integers, leaves as floats) plus a parallel depth array. The word
/// stream alone is ambiguous after a leaf, so reconstruction keys off the
/// depths; the words themselves match the figure layout exactly.
struct FlatBstt {
    struct Entry {
        bool is_value = false;
        std::int64_t index = 0;
        double value = 0.0;
    };
    std::vector<Entry> entries;
    std::vector<std::int64_t> depths;

    std::size_t size() const { return entries.size(); }
};

/// Sparse tensor stored as a BSTT over an arena of nodes. Immutable after
/// construction. An all-zero tensor is rootless.
class BsttTensor {
public:
    explicit BsttTensor(Shape shape) : shape_(std::move(shape)) {}

    const Shape& shape() const { return shape_; }
    std::int32_t root() const { return root_; }
    std::int64_t nnz() const { return nnz_; }
    std::int64_t dropped_zeros() const { return dropped_zeros_; }
    const std::vector<BsttNode>& nodes() const { return nodes_; }
    const BsttNode& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }

    /// Index nodes only (arena size minus leaves).
    std::int64_t internal_node_count() const {
        return static_cast<std::int64_t>(nodes_.size()) - nnz_;
    }

    /// Structural equality (same shape and identical logical tree).
    bool structurally_equal(const BsttTensor& other) const;

private:
    Shape shape_;
    std::vector<BsttNode> nodes_;
    std::int32_t root_ = -1;
    std::int64_t nnz_ = 0;
    std::int64_t dropped_zeros_ = 0;

    friend BsttTensor from_coordinates(const Shape&,
                                       std::vector<std::pair<std::vector<std::int64_t>, double>>);
    friend BsttTensor reconstruct(const FlatBstt&, const Shape&);
};

struct BsttError : std::runtime_error {
    explicit BsttError(const std::string& what) : std::runtime_error(what) {}
};

/// Word counts for one tensor under the competing layouts. bstt_flat counts
/// the pre-order word stream alone; bstt_impl adds the depth sidecar.
struct MemoryReport {
    std::int64_t bstt_flat = 0;
    std::int64_t bstt_impl = 0;
    std::int64_t dense = 0;
};

/// Builds a BSTT from (index tuple, value) entries. Tuples must be in
/// bounds and distinct; explicit zeros are dropped (counted on the result).
BsttTensor from_coordinates(const Shape& shape,
                            std::vector<std::pair<std::vector<std::int64_t>, double>> entries);

/// Pre-order flattening: root, first-child subtree, next-sibling subtree.
FlatBstt flatten(const BsttTensor& t);

/// Inverse of flatten. Validates depth consistency, tag placement, sibling
/// order, and index bounds.
BsttTensor reconstruct(const FlatBstt& flat, const Shape& shape);

/// Dense copy of the addressed last-mode fiber, zeros filled in.
/// `leading` has length rank-1.
DenseTensor fiber(const BsttTensor& t, std::span<const std::int64_t> leading);

DenseTensor to_dense(const BsttTensor& t);
BsttTensor from_dense(const DenseTensor& d);

MemoryReport memory_words(const BsttTensor& t);

/// SPLATT-style CSF cost model: one value word per nonzero, one index word
/// per trie node, one pointer word per child of a non-leaf trie node.
std::int64_t csf_memory_words(const BsttTensor& t);

/// Binary layout: magic "BSTT", rank, extents, entry count, tagged word
/// stream (tag byte 0=int/1=float + 64-bit payload), depth array. All
/// integers little-endian 64-bit.
std::vector<std::uint8_t> serialize_flat(const FlatBstt& flat, const Shape& shape);
std::pair<FlatBstt, Shape> deserialize_flat(std::span<const std::uint8_t> bytes);

}  // namespace apollo::bstt
