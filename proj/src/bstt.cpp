#include "apollo/bstt.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace apollo::bstt {

namespace {

std::string tuple_to_string(std::span<const std::int64_t> t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t[i]);
    }
    return s + ")";
}

}  // namespace

bool BsttTensor::structurally_equal(const BsttTensor& other) const {
    if (shape_ != other.shape() || nnz_ != other.nnz()) return false;
    // Compare the logical trees by parallel traversal of the binary form.
    std::vector<std::pair<std::int32_t, std::int32_t>> stack{{root_, other.root()}};
    while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        if ((a < 0) != (b < 0)) return false;
        if (a < 0) continue;
        const BsttNode& na = node(a);
        const BsttNode& nb = other.node(b);
        if (na.is_leaf != nb.is_leaf) return false;
        if (na.is_leaf) {
            if (na.value != nb.value) return false;
        } else {
            if (na.index != nb.index) return false;
            stack.emplace_back(na.first_child, nb.first_child);
            stack.emplace_back(na.next_sibling, nb.next_sibling);
        }
    }
    return true;
}

BsttTensor from_coordinates(const Shape& shape,
                            std::vector<std::pair<std::vector<std::int64_t>, double>> entries) {
    const int rank = shape.rank();
    BsttTensor t{shape};

    for (auto& [tuple, value] : entries) {
        if (static_cast<int>(tuple.size()) != rank)
            throw BsttError("entry tuple " + tuple_to_string(tuple) + " has wrong rank");
        for (int k = 0; k < rank; ++k)
            if (tuple[static_cast<std::size_t>(k)] < 0 ||
                tuple[static_cast<std::size_t>(k)] >= shape.extent(k))
                throw BsttError("entry tuple " + tuple_to_string(tuple) + " out of bounds");
        (void)value;
    }

    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].first == entries[i - 1].first)
            throw BsttError("duplicate entry tuple " + tuple_to_string(entries[i].first));

    // Drop explicit zeros: BSTT leaves are nonzero by definition.
    std::int64_t dropped = 0;
    std::erase_if(entries, [&](const auto& e) {
        if (e.second == 0.0) {
            ++dropped;
            return true;
        }
        return false;
    });
    t.dropped_zeros_ = dropped;

    // Entries are sorted, so every insertion extends the rightmost path.
    std::vector<std::int32_t> path(static_cast<std::size_t>(rank) + 1, -1);
    std::vector<std::int64_t> prev;
    for (const auto& [tuple, value] : entries) {
        int lcp = 0;
        while (lcp < static_cast<int>(prev.size()) &&
               prev[static_cast<std::size_t>(lcp)] == tuple[static_cast<std::size_t>(lcp)])
            ++lcp;
        for (int d = lcp + 1; d <= rank; ++d) {
            std::int32_t n = static_cast<std::int32_t>(t.nodes_.size());
            t.nodes_.push_back(BsttNode{false, tuple[static_cast<std::size_t>(d - 1)], 0.0, -1, -1});
            if (d == lcp + 1 && path[static_cast<std::size_t>(d)] >= 0)
                t.nodes_[static_cast<std::size_t>(path[static_cast<std::size_t>(d)])].next_sibling = n;
            else if (d == 1)
                t.root_ = n;
            else
                t.nodes_[static_cast<std::size_t>(path[static_cast<std::size_t>(d - 1)])].first_child = n;
            path[static_cast<std::size_t>(d)] = n;
        }
        std::int32_t leaf = static_cast<std::int32_t>(t.nodes_.size());
        t.nodes_.push_back(BsttNode{true, 0, value, -1, -1});
        if (rank == 0)
            t.root_ = leaf;  // a nonzero scalar is a bare leaf
        else
            t.nodes_[static_cast<std::size_t>(path[static_cast<std::size_t>(rank)])].first_child = leaf;
        ++t.nnz_;
        prev = tuple;
    }
    return t;
}

FlatBstt flatten(const BsttTensor& t) {
    FlatBstt out;
    if (t.root() < 0) return out;
    std::vector<std::pair<std::int32_t, std::int64_t>> stack{{t.root(), 1}};
    while (!stack.empty()) {
        auto [i, depth] = stack.back();
        stack.pop_back();
        const BsttNode& n = t.node(i);
        if (n.is_leaf) {
            out.entries.push_back({true, 0, n.value});
            out.depths.push_back(depth);
        } else {
            out.entries.push_back({false, n.index, 0.0});
            out.depths.push_back(depth);
            if (n.next_sibling >= 0) stack.emplace_back(n.next_sibling, depth);
            if (n.first_child >= 0) stack.emplace_back(n.first_child, depth + 1);
        }
    }
    return out;
}

BsttTensor reconstruct(const FlatBstt& flat, const Shape& shape) {
    if (flat.entries.size() != flat.depths.size())
        throw BsttError("entry and depth arrays differ in length");
    const int rank = shape.rank();
    BsttTensor t{shape};
    if (flat.entries.empty()) return t;

    // last_at[d]: most recent index node at depth d still eligible for a
    // sibling; cleared whenever a shallower node arrives.
    std::vector<std::int32_t> last_at(static_cast<std::size_t>(rank) + 2, -1);
    std::int64_t prev_depth = 0;
    for (std::size_t e = 0; e < flat.entries.size(); ++e) {
        const FlatBstt::Entry& entry = flat.entries[e];
        std::int64_t d = flat.depths[e];
        if (e == 0 && d != 1) throw BsttError("first entry must be at depth 1");
        if (d > prev_depth + 1)
            throw BsttError("depth jump at entry " + std::to_string(e));
        if (entry.is_value) {
            if (d != rank + 1)
                throw BsttError("value at depth " + std::to_string(d) + ", expected " +
                                std::to_string(rank + 1));
            std::int32_t leaf = static_cast<std::int32_t>(t.nodes_.size());
            t.nodes_.push_back(BsttNode{true, 0, entry.value, -1, -1});
            if (rank == 0) {
                if (t.root_ >= 0) throw BsttError("rank-0 tensor with multiple leaves");
                t.root_ = leaf;
            } else {
                std::int32_t parent = last_at[static_cast<std::size_t>(rank)];
                if (parent < 0) throw BsttError("leaf without parent index node");
                if (t.nodes_[static_cast<std::size_t>(parent)].first_child >= 0)
                    throw BsttError("index node with two leaves");
                t.nodes_[static_cast<std::size_t>(parent)].first_child = leaf;
            }
            ++t.nnz_;
        } else {
            if (d < 1 || d > rank)
                throw BsttError("index node at depth " + std::to_string(d) +
                                " outside 1.." + std::to_string(rank));
            if (entry.index < 0 || entry.index >= shape.extent(static_cast<int>(d - 1)))
                throw BsttError("index " + std::to_string(entry.index) +
                                " out of bounds at depth " + std::to_string(d));
            std::int32_t n = static_cast<std::int32_t>(t.nodes_.size());
            t.nodes_.push_back(BsttNode{false, entry.index, 0.0, -1, -1});
            std::int32_t prev_same = last_at[static_cast<std::size_t>(d)];
            if (prev_same >= 0) {
                if (t.nodes_[static_cast<std::size_t>(prev_same)].index >= entry.index)
                    throw BsttError("sibling indices not strictly increasing at depth " +
                                    std::to_string(d));
                t.nodes_[static_cast<std::size_t>(prev_same)].next_sibling = n;
            } else if (d == 1) {
                t.root_ = n;
            } else {
                std::int32_t parent = last_at[static_cast<std::size_t>(d - 1)];
                if (parent < 0) throw BsttError("orphan index node at depth " + std::to_string(d));
                t.nodes_[static_cast<std::size_t>(parent)].first_child = n;
            }
            last_at[static_cast<std::size_t>(d)] = n;
            for (std::size_t k = static_cast<std::size_t>(d) + 1; k < last_at.size(); ++k)
                last_at[k] = -1;
        }
        prev_depth = d;
    }

    for (const BsttNode& n : t.nodes_)
        if (!n.is_leaf && n.first_child < 0)
            throw BsttError("index node without children");
    return t;
}

DenseTensor fiber(const BsttTensor& t, std::span<const std::int64_t> leading) {
    const int rank = t.shape().rank();
    if (rank < 1) throw BsttError("fiber of a rank-0 tensor");
    if (static_cast<int>(leading.size()) != rank - 1)
        throw BsttError("fiber wants " + std::to_string(rank - 1) + " leading indices, got " +
                        std::to_string(leading.size()));
    for (int k = 0; k + 1 < rank; ++k)
        if (leading[static_cast<std::size_t>(k)] < 0 ||
            leading[static_cast<std::size_t>(k)] >= t.shape().extent(k))
            throw BsttError("fiber leading index out of bounds in mode " + std::to_string(k));

    DenseTensor out{Shape({t.shape().extent(rank - 1)})};
    std::int32_t chain = t.root();
    for (int k = 0; k + 1 < rank; ++k) {
        while (chain >= 0 && t.node(chain).index != leading[static_cast<std::size_t>(k)])
            chain = t.node(chain).next_sibling;
        if (chain < 0) return out;  // absent path: all-zero fiber
        chain = t.node(chain).first_child;
    }
    while (chain >= 0) {
        const BsttNode& n = t.node(chain);
        out[n.index] = t.node(n.first_child).value;
        chain = n.next_sibling;
    }
    return out;
}

DenseTensor to_dense(const BsttTensor& t) {
    DenseTensor out{t.shape()};
    if (t.root() < 0) return out;
    if (t.shape().rank() == 0) {
        out[0] = t.node(t.root()).value;
        return out;
    }
    // DFS carrying the flat offset contributed by the path prefix.
    std::vector<std::int64_t> stride(static_cast<std::size_t>(t.shape().rank()), 1);
    for (int k = t.shape().rank() - 2; k >= 0; --k)
        stride[static_cast<std::size_t>(k)] =
            stride[static_cast<std::size_t>(k) + 1] * t.shape().extent(k + 1);
    struct Frame {
        std::int32_t node;
        std::int64_t base;
        int depth;
    };
    std::vector<Frame> work{{t.root(), 0, 1}};
    while (!work.empty()) {
        Frame f = work.back();
        work.pop_back();
        const BsttNode& n = t.node(f.node);
        std::int64_t base = f.base + n.index * stride[static_cast<std::size_t>(f.depth - 1)];
        if (f.depth == t.shape().rank())
            out[base] = t.node(n.first_child).value;
        else
            work.push_back({n.first_child, base, f.depth + 1});
        if (n.next_sibling >= 0) work.push_back({n.next_sibling, f.base, f.depth});
    }
    return out;
}

BsttTensor from_dense(const DenseTensor& d) {
    std::vector<std::pair<std::vector<std::int64_t>, double>> entries;
    const int rank = d.rank();
    std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
    for (std::int64_t flat = 0; flat < d.size(); ++flat) {
        if (d[flat] != 0.0) entries.emplace_back(idx, d[flat]);
        for (int k = rank - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < d.shape().extent(k)) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return from_coordinates(d.shape(), std::move(entries));
}

MemoryReport memory_words(const BsttTensor& t) {
    MemoryReport r;
    r.bstt_flat = static_cast<std::int64_t>(t.nodes().size());
    r.bstt_impl = 2 * r.bstt_flat;  // word stream plus depth sidecar
    r.dense = t.shape().element_count();
    return r;
}

std::int64_t csf_memory_words(const BsttTensor& t) {
    // The CSF trie has the same index nodes as the BSTT. Every trie node
    // costs one index word and is the target of one child pointer.
    return t.nnz() + 2 * t.internal_node_count();
}

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    if (pos + 8 > bytes.size()) throw BsttError("truncated BSTT blob");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + static_cast<std::size_t>(i)]) << (8 * i);
    pos += 8;
    return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_flat(const FlatBstt& flat, const Shape& shape) {
    std::vector<std::uint8_t> out{'B', 'S', 'T', 'T'};
    put_u64(out, static_cast<std::uint64_t>(shape.rank()));
    for (int k = 0; k < shape.rank(); ++k) put_u64(out, static_cast<std::uint64_t>(shape.extent(k)));
    put_u64(out, flat.entries.size());
    for (const FlatBstt::Entry& e : flat.entries) {
        out.push_back(e.is_value ? 1 : 0);
        put_u64(out, e.is_value ? std::bit_cast<std::uint64_t>(e.value)
                                : static_cast<std::uint64_t>(e.index));
    }
    for (std::int64_t d : flat.depths) put_u64(out, static_cast<std::uint64_t>(d));
    return out;
}

std::pair<FlatBstt, Shape> deserialize_flat(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || bytes[0] != 'B' || bytes[1] != 'S' || bytes[2] != 'T' || bytes[3] != 'T')
        throw BsttError("missing BSTT magic");
    std::size_t pos = 4;
    std::int64_t rank = static_cast<std::int64_t>(get_u64(bytes, pos));
    if (rank < 0 || rank > 64) throw BsttError("implausible BSTT rank");
    std::vector<std::int64_t> dims;
    for (std::int64_t k = 0; k < rank; ++k)
        dims.push_back(static_cast<std::int64_t>(get_u64(bytes, pos)));
    std::int64_t count = static_cast<std::int64_t>(get_u64(bytes, pos));
    if (count < 0) throw BsttError("negative BSTT entry count");
    FlatBstt flat;
    for (std::int64_t e = 0; e < count; ++e) {
        if (pos >= bytes.size()) throw BsttError("truncated BSTT blob");
        std::uint8_t tag = bytes[pos++];
        std::uint64_t payload = get_u64(bytes, pos);
        if (tag == 0)
            flat.entries.push_back({false, static_cast<std::int64_t>(payload), 0.0});
        else if (tag == 1)
            flat.entries.push_back({true, 0, std::bit_cast<double>(payload)});
        else
            throw BsttError("bad BSTT entry tag " + std::to_string(tag));
    }
    for (std::int64_t e = 0; e < count; ++e)
        flat.depths.push_back(static_cast<std::int64_t>(get_u64(bytes, pos)));
    if (pos != bytes.size()) throw BsttError("trailing bytes after BSTT blob");
    return {std::move(flat), Shape(std::move(dims))};
}

}  // namespace apollo::bstt
