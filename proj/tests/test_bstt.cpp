#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "apollo/bstt.hpp"
#include "test_support.hpp"

using namespace apollo;
using namespace apollo::bstt;

namespace {

// The worked 2x3x5 example tensor: seven nonzeros, stored outer mode
// first (slice, row, column).
std::vector<std::pair<std::vector<std::int64_t>, double>> example_entries() {
    return {
        {{0, 0, 0}, 0.1}, {{0, 1, 0}, 8.0}, {{0, 1, 1}, 9.9}, {{0, 1, 2}, 4.4},
        {{1, 0, 0}, 3.1}, {{1, 0, 3}, 0.9}, {{1, 1, 4}, 1.3},
    };
}

BsttTensor example_tensor() {
    return from_coordinates(Shape{{2, 3, 5}}, example_entries());
}

// Distinct random coordinates over a random shape.
BsttTensor random_bstt(std::mt19937& rng, int max_rank, std::int64_t max_extent,
                       std::int64_t max_nnz) {
    Shape shape = testsupport::random_shape(rng, max_rank, max_extent);
    std::vector<std::int64_t> flats(static_cast<std::size_t>(shape.element_count()));
    for (std::size_t i = 0; i < flats.size(); ++i) flats[i] = static_cast<std::int64_t>(i);
    std::shuffle(flats.begin(), flats.end(), rng);
    std::int64_t nnz = std::uniform_int_distribution<std::int64_t>(
        0, std::min(max_nnz, shape.element_count()))(rng);
    std::uniform_real_distribution<double> value(0.5, 9.5);
    std::vector<std::pair<std::vector<std::int64_t>, double>> entries;
    for (std::int64_t e = 0; e < nnz; ++e) {
        std::int64_t flat = flats[static_cast<std::size_t>(e)];
        std::vector<std::int64_t> idx(static_cast<std::size_t>(shape.rank()));
        for (int k = shape.rank() - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = flat % shape.extent(k);
            flat /= shape.extent(k);
        }
        entries.emplace_back(std::move(idx), value(rng));
    }
    return from_coordinates(shape, std::move(entries));
}

}  // namespace

TEST_CASE("construction from coordinates") {
    BsttTensor t = example_tensor();
    CHECK(t.nnz() == 7);
    CHECK(t.internal_node_count() == 13);
    CHECK(t.dropped_zeros() == 0);

    BsttTensor empty = from_coordinates(Shape{{2, 2}}, {});
    CHECK(empty.root() == -1);
    CHECK(empty.nnz() == 0);

    BsttTensor single = from_coordinates(Shape{{2, 3, 4}}, {{{1, 2, 3}, 7.5}});
    FlatBstt f = flatten(single);
    REQUIRE(f.size() == 4);
    CHECK(f.depths == std::vector<std::int64_t>{1, 2, 3, 4});
    CHECK(f.entries[0].index == 1);
    CHECK(f.entries[1].index == 2);
    CHECK(f.entries[2].index == 3);
    CHECK(f.entries[3].is_value);
    CHECK(f.entries[3].value == 7.5);
}

TEST_CASE("construction rejects bad entries") {
    CHECK_THROWS_AS(from_coordinates(Shape{{2, 2}}, {{{0, 2}, 1.0}}), BsttError);
    CHECK_THROWS_AS(from_coordinates(Shape{{2, 2}}, {{{0, 1}, 1.0}, {{0, 1}, 2.0}}), BsttError);
    CHECK_THROWS_AS(from_coordinates(Shape{{2, 2}}, {{{0}, 1.0}}), BsttError);

    BsttTensor dropped = from_coordinates(Shape{{2, 2}}, {{{0, 0}, 0.0}, {{1, 1}, 2.0}});
    CHECK(dropped.nnz() == 1);
    CHECK(dropped.dropped_zeros() == 1);
}

TEST_CASE("pre-order flattening matches the worked figure") {
    FlatBstt f = flatten(example_tensor());
    REQUIRE(f.size() == 20);

    // 0,0,0,0.1, 1,0,8.0, 1,9.9, 2,4.4, 1,0,0,3.1, 3,0.9, 1,4,1.3
    struct Expected {
        bool is_value;
        double v;
    };
    std::vector<Expected> expect = {
        {false, 0}, {false, 0}, {false, 0}, {true, 0.1},
        {false, 1}, {false, 0}, {true, 8.0},
        {false, 1}, {true, 9.9},
        {false, 2}, {true, 4.4},
        {false, 1}, {false, 0}, {false, 0}, {true, 3.1},
        {false, 3}, {true, 0.9},
        {false, 1}, {false, 4}, {true, 1.3},
    };
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(f.entries[i].is_value == expect[i].is_value);
        if (expect[i].is_value)
            CHECK(f.entries[i].value == expect[i].v);
        else
            CHECK(f.entries[i].index == static_cast<std::int64_t>(expect[i].v));
    }
    CHECK(f.depths == std::vector<std::int64_t>{1, 2, 3, 4, 2, 3, 4, 3, 4, 3, 4,
                                                1, 2, 3, 4, 3, 4, 2, 3, 4});

    CHECK(flatten(from_coordinates(Shape{{3}}, {})).size() == 0);
}

TEST_CASE("flatten lists index paths in increasing lexicographic order") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        BsttTensor t = random_bstt(rng, 4, 4, 50);
        FlatBstt f = flatten(t);
        std::vector<std::int64_t> path(static_cast<std::size_t>(t.shape().rank()), 0);
        std::vector<std::int64_t> prev;
        bool first = true;
        for (std::size_t e = 0; e < f.size(); ++e) {
            if (f.entries[e].is_value) {
                if (!first) CHECK(prev < path);
                prev = path;
                first = false;
            } else {
                path[static_cast<std::size_t>(f.depths[e] - 1)] = f.entries[e].index;
            }
        }
    }
}

TEST_CASE("reconstruct inverts flatten") {
    BsttTensor t = example_tensor();
    CHECK(reconstruct(flatten(t), t.shape()).structurally_equal(t));

    BsttTensor empty = from_coordinates(Shape{{4, 4}}, {});
    CHECK(reconstruct(flatten(empty), empty.shape()).structurally_equal(empty));

    std::mt19937 rng(103);
    for (int trial = 0; trial < 100; ++trial) {
        BsttTensor r = random_bstt(rng, 4, 4, 50);
        CHECK(reconstruct(flatten(r), r.shape()).structurally_equal(r));
    }
}

TEST_CASE("reconstruct validates its input") {
    Shape shape{{2, 2}};
    auto entry_int = [](std::int64_t i) { return FlatBstt::Entry{false, i, 0.0}; };
    auto entry_val = [](double v) { return FlatBstt::Entry{true, 0, v}; };

    FlatBstt bad_first;
    bad_first.entries = {entry_int(0)};
    bad_first.depths = {2};
    CHECK_THROWS_AS(reconstruct(bad_first, shape), BsttError);

    FlatBstt jump;
    jump.entries = {entry_int(0), entry_val(1.0)};
    jump.depths = {1, 3};
    CHECK_THROWS_AS(reconstruct(jump, shape), BsttError);

    FlatBstt misplaced_value;
    misplaced_value.entries = {entry_int(0), entry_val(1.0)};
    misplaced_value.depths = {1, 2};
    CHECK_THROWS_AS(reconstruct(misplaced_value, shape), BsttError);

    FlatBstt unsorted;
    unsorted.entries = {entry_int(1), entry_int(0), entry_val(1.0),
                        entry_int(0), entry_int(0), entry_val(2.0)};
    unsorted.depths = {1, 2, 3, 1, 2, 3};
    CHECK_THROWS_AS(reconstruct(unsorted, shape), BsttError);

    FlatBstt childless;
    childless.entries = {entry_int(0), entry_int(0), entry_val(1.0), entry_int(1)};
    childless.depths = {1, 2, 3, 2};
    CHECK_THROWS_AS(reconstruct(childless, shape), BsttError);

    FlatBstt oob;
    oob.entries = {entry_int(5), entry_int(0), entry_val(1.0)};
    oob.depths = {1, 2, 3};
    CHECK_THROWS_AS(reconstruct(oob, shape), BsttError);
}

TEST_CASE("fiber retrieval") {
    BsttTensor t = example_tensor();
    std::vector<std::int64_t> l01{0, 1};
    CHECK(fiber(t, l01) == DenseTensor(Shape{{5}}, {8.0, 9.9, 4.4, 0, 0}));
    std::vector<std::int64_t> l02{0, 2};
    CHECK(fiber(t, l02) == DenseTensor(Shape{{5}}, {0, 0, 0, 0, 0}));
    std::vector<std::int64_t> l10{1, 0};
    CHECK(fiber(t, l10) == DenseTensor(Shape{{5}}, {3.1, 0, 0, 0.9, 0}));

    std::vector<std::int64_t> oob{2, 0};
    CHECK_THROWS_AS(fiber(t, oob), BsttError);
    std::vector<std::int64_t> short_lead{0};
    CHECK_THROWS_AS(fiber(t, short_lead), BsttError);
}

TEST_CASE("fiber agrees with dense slices everywhere") {
    std::mt19937 rng(107);
    for (int trial = 0; trial < 30; ++trial) {
        BsttTensor t = random_bstt(rng, 3, 4, 30);
        DenseTensor d = to_dense(t);
        int rank = t.shape().rank();
        std::int64_t last = t.shape().extent(rank - 1);
        std::int64_t leading_count = t.shape().element_count() / last;
        for (std::int64_t g = 0; g < leading_count; ++g) {
            std::vector<std::int64_t> leading(static_cast<std::size_t>(rank - 1));
            std::int64_t rest = g;
            for (int k = rank - 2; k >= 0; --k) {
                leading[static_cast<std::size_t>(k)] = rest % t.shape().extent(k);
                rest /= t.shape().extent(k);
            }
            DenseTensor f = fiber(t, leading);
            for (std::int64_t j = 0; j < last; ++j) CHECK(f[j] == d[g * last + j]);
        }
    }
}

TEST_CASE("dense round trips") {
    BsttTensor t = example_tensor();
    DenseTensor d = to_dense(t);
    CHECK(d.shape() == Shape{{2, 3, 5}});
    std::vector<std::int64_t> i010{0, 1, 0};
    CHECK(d.at(i010) == 8.0);
    std::vector<std::int64_t> i112{1, 1, 2};
    CHECK(d.at(i112) == 0.0);  // the back-slice middle row keeps only 1.3

    CHECK(to_dense(from_dense(DenseTensor{Shape{{2, 2}}})) == DenseTensor{Shape{{2, 2}}});

    std::mt19937 rng(109);
    for (int trial = 0; trial < 50; ++trial) {
        DenseTensor dense = testsupport::sparsify(
            rng, testsupport::random_tensor(rng, testsupport::random_shape(rng, 4, 4)), 0.7);
        CHECK(to_dense(from_dense(dense)) == dense);
    }
}

TEST_CASE("memory accounting") {
    BsttTensor t = example_tensor();
    MemoryReport r = memory_words(t);
    CHECK(r.bstt_flat == 20);
    CHECK(r.bstt_impl == 40);
    CHECK(r.dense == 30);
    CHECK(csf_memory_words(t) == 33);

    BsttTensor zero = from_coordinates(Shape{{5, 5}}, {});
    CHECK(memory_words(zero).bstt_flat == 0);
    CHECK(csf_memory_words(zero) == 0);

    BsttTensor single = from_coordinates(Shape{{2, 3, 4}}, {{{1, 2, 3}, 7.5}});
    CHECK(memory_words(single).bstt_flat == 4);
    CHECK(csf_memory_words(single) == 7);

    // Fully dense d x d: d + d*d index nodes plus d*d leaves; never smaller
    // than plain dense storage.
    for (std::int64_t d = 2; d <= 5; ++d) {
        DenseTensor full{Shape{{d, d}}, std::vector<double>(static_cast<std::size_t>(d * d), 1.0)};
        MemoryReport m = memory_words(from_dense(full));
        CHECK(m.bstt_flat == d + 2 * d * d);
        CHECK(m.bstt_flat > m.dense);
    }
}

TEST_CASE("memory bounds hold for sparse tensors") {
    std::mt19937 rng(113);
    for (int trial = 0; trial < 200; ++trial) {
        Shape shape = testsupport::random_shape(rng, 4, 5);
        std::int64_t budget = shape.element_count() / (shape.rank() + 1);
        std::vector<std::int64_t> flats(static_cast<std::size_t>(shape.element_count()));
        for (std::size_t i = 0; i < flats.size(); ++i) flats[i] = static_cast<std::int64_t>(i);
        std::shuffle(flats.begin(), flats.end(), rng);
        std::int64_t nnz = std::uniform_int_distribution<std::int64_t>(0, budget)(rng);
        std::vector<std::pair<std::vector<std::int64_t>, double>> entries;
        for (std::int64_t e = 0; e < nnz; ++e) {
            std::int64_t flat = flats[static_cast<std::size_t>(e)];
            std::vector<std::int64_t> idx(static_cast<std::size_t>(shape.rank()));
            for (int k = shape.rank() - 1; k >= 0; --k) {
                idx[static_cast<std::size_t>(k)] = flat % shape.extent(k);
                flat /= shape.extent(k);
            }
            entries.emplace_back(std::move(idx), 1.0);
        }
        BsttTensor t = from_coordinates(shape, std::move(entries));
        MemoryReport m = memory_words(t);
        CHECK(m.bstt_flat <= m.dense);  // nnz/dense <= 1/(rank+1)
        if (t.nnz() >= 1) CHECK(m.bstt_flat < csf_memory_words(t));
    }
}

TEST_CASE("flat binary serialization") {
    BsttTensor t = example_tensor();
    FlatBstt f = flatten(t);
    std::vector<std::uint8_t> bytes = serialize_flat(f, t.shape());
    CHECK(bytes[0] == 'B');
    CHECK(bytes[3] == 'T');

    auto [back, shape] = deserialize_flat(bytes);
    CHECK(shape == t.shape());
    REQUIRE(back.size() == f.size());
    CHECK(back.depths == f.depths);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(back.entries[i].is_value == f.entries[i].is_value);
        CHECK(back.entries[i].index == f.entries[i].index);
        CHECK(back.entries[i].value == f.entries[i].value);
    }
    CHECK(reconstruct(back, shape).structurally_equal(t));

    std::vector<std::uint8_t> bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_flat(bad), BsttError);
    bytes.pop_back();
    CHECK_THROWS_AS(deserialize_flat(bytes), BsttError);
}
