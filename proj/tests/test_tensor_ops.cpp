#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "apollo/tensor_ops.hpp"
#include "test_support.hpp"

using namespace apollo;
using testsupport::brute_force_dot;
using testsupport::random_shape;
using testsupport::random_tensor;

namespace {

DenseTensor vec(std::vector<double> v) {
    Shape s{{static_cast<std::int64_t>(v.size())}};
    return DenseTensor{s, std::move(v)};
}

DenseTensor mat(std::int64_t r, std::int64_t c, std::vector<double> v) {
    return DenseTensor{Shape{{r, c}}, std::move(v)};
}

DenseTensor transpose(const DenseTensor& m) {
    std::int64_t r = m.shape().extent(0), c = m.shape().extent(1);
    DenseTensor out{Shape{{c, r}}};
    for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j) out[j * r + i] = m[i * c + j];
    return out;
}

}  // namespace

TEST_CASE("shape basics") {
    Shape s{{2, 3, 5}};
    CHECK(s.rank() == 3);
    CHECK(s.element_count() == 30);
    CHECK(Shape{}.element_count() == 1);
    CHECK_THROWS_AS((Shape{{2, 0}}), TensorError);
    std::vector<std::int64_t> idx{1, 2, 4};
    CHECK(s.flat_index(idx) == 29);
}

TEST_CASE("scalar-tensor product") {
    DenseTensor x = mat(2, 2, {1, 2, 3, 4});
    CHECK(scalar_tensor_product(1.0, x) == x);
    CHECK(scalar_tensor_product(0.0, x) == mat(2, 2, {0, 0, 0, 0}));
    CHECK(scalar_tensor_product(2.0, x) == mat(2, 2, {2, 4, 6, 8}));

    // a*(b*X) == (a*b)*X, same element order
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        DenseTensor t = random_tensor(rng, random_shape(rng, 4, 4));
        DenseTensor lhs = scalar_tensor_product(2.5, scalar_tensor_product(-1.25, t));
        DenseTensor rhs = scalar_tensor_product(2.5 * -1.25, t);
        REQUIRE(lhs.shape() == rhs.shape());
        for (std::int64_t i = 0; i < lhs.size(); ++i)
            CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
    }
}

TEST_CASE("kronecker product") {
    CHECK(kronecker(vec({1, 2}), vec({3, 4})) == vec({3, 4, 6, 8}));

    DenseTensor id = mat(2, 2, {1, 0, 0, 1});
    DenseTensor anti = mat(2, 2, {0, 1, 1, 0});
    DenseTensor big = kronecker(id, anti);
    CHECK(big.shape() == Shape{{4, 4}});
    CHECK(big == mat(4, 4, {0, 1, 0, 0,
                            1, 0, 0, 0,
                            0, 0, 0, 1,
                            0, 0, 1, 0}));

    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        DenseTensor x = random_tensor(rng, random_shape(rng, 3, 3));
        CHECK(kronecker(x, vec({1})) == x);  // identity block, after rank padding

        DenseTensor y = random_tensor(rng, random_shape(rng, 3, 3));
        DenseTensor k = kronecker(x, y);
        int rank = std::max(x.rank(), y.rank());
        REQUIRE(k.rank() == rank);
        for (int d = 0; d < rank; ++d) {
            auto padded = [rank](const DenseTensor& t, int mode) {
                int off = rank - t.rank();
                return mode < off ? std::int64_t{1} : t.shape().extent(mode - off);
            };
            CHECK(k.shape().extent(d) == padded(x, d) * padded(y, d));
        }
    }

    // scalars are degenerate rank-0 blocks
    CHECK(kronecker(DenseTensor::scalar(3.0), vec({1, 2})) == vec({3, 6}));
}

TEST_CASE("inner product") {
    CHECK(inner_product(vec({1, 2, 3}), vec({4, 5, 6})) == 32.0);
    std::mt19937 rng(13);
    DenseTensor x = random_tensor(rng, Shape{{2, 3}});
    CHECK(inner_product(x, DenseTensor{x.shape()}) == 0.0);
    CHECK(inner_product(x, x) >= 0.0);
    CHECK_THROWS_AS(inner_product(vec({1}), vec({1, 2})), TensorError);
}

TEST_CASE("dot product frozen examples") {
    DenseTensor identity = mat(2, 2, {1, 0, 0, 1});
    DenseTensor b = mat(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(dot(identity, b) == b);

    CHECK(dot(mat(2, 2, {1, 2, 3, 4}), vec({5, 6})) == vec({17, 39}));

    std::mt19937 rng(17);
    DenseTensor x = random_tensor(rng, Shape{{2, 3, 4}});
    DenseTensor y = random_tensor(rng, Shape{{5, 4, 6}});
    DenseTensor r = dot(x, y);
    CHECK(r.shape() == Shape{{2, 3, 5, 6}});
    CHECK(approx_equal(r, brute_force_dot(x, y), 1e-12));
}

TEST_CASE("dot of two vectors is the inner product") {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        std::int64_t n = 1 + trial % 5;
        DenseTensor u = random_tensor(rng, Shape{{n}});
        DenseTensor v = random_tensor(rng, Shape{{n}});
        DenseTensor d = dot(u, v);
        REQUIRE(d.rank() == 0);
        CHECK(d[0] == doctest::Approx(inner_product(u, v)).epsilon(1e-12));
    }
}

TEST_CASE("dot against the brute-force oracle") {
    std::mt19937 rng(23);
    int done = 0;
    while (done < 100) {
        DenseTensor x = random_tensor(rng, random_shape(rng, 4, 4));
        Shape ys = random_shape(rng, 4, 4);
        // force a matching contraction extent
        std::vector<std::int64_t> dims = ys.dims();
        dims[ys.rank() >= 2 ? ys.rank() - 2 : 0] = x.shape().extent(x.rank() - 1);
        DenseTensor y = random_tensor(rng, Shape{dims});
        DenseTensor got = dot(x, y);
        DenseTensor want = brute_force_dot(x, y);
        REQUIRE(got.shape() == want.shape());
        CHECK(approx_equal(got, want, 1e-12));
        ++done;
    }
    CHECK_THROWS_AS(dot(vec({1, 2}), vec({1, 2, 3})), TensorError);
}

TEST_CASE("khatri-rao product") {
    CHECK(khatri_rao(mat(2, 1, {1, 2}), mat(2, 1, {3, 4})) == mat(4, 1, {3, 4, 6, 8}));
    CHECK(khatri_rao(mat(2, 2, {1, 0, 0, 1}), mat(2, 2, {1, 1, 1, 1})) ==
          mat(4, 2, {1, 0, 1, 0, 0, 1, 0, 1}));
    CHECK(khatri_rao(DenseTensor{Shape{{2, 3}}}, DenseTensor{Shape{{3, 3}}}).shape() ==
          Shape{{6, 3}});
    CHECK_THROWS_AS(khatri_rao(vec({1}), mat(1, 1, {1})), TensorError);
    CHECK_THROWS_AS(khatri_rao(mat(2, 2, {1, 2, 3, 4}), mat(2, 3, {1, 2, 3, 4, 5, 6})),
                    TensorError);

    // column k of A (.) B equals a_k kron b_k
    std::mt19937 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        std::int64_t i = 1 + trial % 5, j = 1 + (trial / 2) % 5, k = 1 + (trial / 3) % 5;
        DenseTensor a = random_tensor(rng, Shape{{i, k}});
        DenseTensor b = random_tensor(rng, Shape{{j, k}});
        DenseTensor kr = khatri_rao(a, b);
        for (std::int64_t col = 0; col < k; ++col) {
            DenseTensor ac{Shape{{i}}}, bc{Shape{{j}}};
            for (std::int64_t r = 0; r < i; ++r) ac[r] = a[r * k + col];
            for (std::int64_t r = 0; r < j; ++r) bc[r] = b[r * k + col];
            DenseTensor expect = kronecker(ac, bc);
            for (std::int64_t r = 0; r < i * j; ++r)
                CHECK(kr[r * k + col] == doctest::Approx(expect[r]).epsilon(1e-12));
        }
    }
}

TEST_CASE("face-splitting product") {
    CHECK(face_splitting(mat(1, 2, {1, 2}), mat(1, 2, {3, 4})) == mat(1, 4, {3, 4, 6, 8}));
    CHECK(face_splitting(DenseTensor{Shape{{3, 2}}}, DenseTensor{Shape{{3, 2}}}).shape() ==
          Shape{{3, 4}});
    CHECK_THROWS_AS(face_splitting(mat(2, 2, {1, 2, 3, 4}), mat(3, 2, {1, 2, 3, 4, 5, 6})),
                    TensorError);

    // (A . B)^T == A^T (.) B^T
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        DenseTensor a = random_tensor(rng, Shape{{2, 2}});
        DenseTensor b = random_tensor(rng, Shape{{2, 2}});
        CHECK(approx_equal(transpose(face_splitting(a, b)),
                           khatri_rao(transpose(a), transpose(b)), 1e-12));
    }

    // row k of A (.) B equals a_k kron b_k
    std::mt19937 rng2(37);
    DenseTensor a = random_tensor(rng2, Shape{{3, 4}});
    DenseTensor b = random_tensor(rng2, Shape{{3, 5}});
    DenseTensor fs = face_splitting(a, b);
    for (std::int64_t k = 0; k < 3; ++k) {
        DenseTensor ar{Shape{{4}}}, br{Shape{{5}}};
        for (std::int64_t c = 0; c < 4; ++c) ar[c] = a[k * 4 + c];
        for (std::int64_t c = 0; c < 5; ++c) br[c] = b[k * 5 + c];
        DenseTensor expect = kronecker(ar, br);
        for (std::int64_t c = 0; c < 20; ++c)
            CHECK(fs[k * 20 + c] == doctest::Approx(expect[c]).epsilon(1e-12));
    }
}

TEST_CASE("cross product") {
    CHECK(cross(vec({1, 0, 0}), vec({0, 1, 0})) == vec({0, 0, 1}));
    CHECK(cross(vec({1, 2, 3}), vec({1, 2, 3})) == vec({0, 0, 0}));
    CHECK(cross(vec({1, 2, 3}), vec({4, 5, 6})) == vec({-3, 6, -3}));
    CHECK_THROWS_AS(cross(vec({1, 2}), vec({1, 2, 3})), TensorError);
    CHECK_THROWS_AS(cross(mat(1, 3, {1, 2, 3}), vec({1, 2, 3})), TensorError);

    std::mt19937 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        DenseTensor u = random_tensor(rng, Shape{{3}});
        DenseTensor v = random_tensor(rng, Shape{{3}});
        DenseTensor c = cross(u, v);
        double norm_u = std::sqrt(inner_product(u, u));
        double norm_v = std::sqrt(inner_product(v, v));
        CHECK(std::abs(inner_product(c, u)) <= 1e-9 * norm_u * norm_v);
        CHECK(std::abs(inner_product(c, v)) <= 1e-9 * norm_u * norm_v);
        CHECK(approx_equal(cross(v, u), scalar_tensor_product(-1.0, c), 1e-12));
    }
}

TEST_CASE("fibers") {
    DenseTensor m = mat(2, 2, {1, 2, 3, 4});
    std::vector<DenseTensor> fs = fibers(m);
    REQUIRE(fs.size() == 2);
    CHECK(fs[0] == vec({1, 2}));
    CHECK(fs[1] == vec({3, 4}));

    std::vector<DenseTensor> single = fibers(vec({5, 6}));
    REQUIRE(single.size() == 1);
    CHECK(single[0] == vec({5, 6}));

    std::mt19937 rng(43);
    DenseTensor t = random_tensor(rng, Shape{{2, 3, 5}});
    std::vector<DenseTensor> many = fibers(t);
    REQUIRE(many.size() == 6);
    for (const DenseTensor& f : many) CHECK(f.shape() == Shape{{5}});

    CHECK_THROWS_AS(fibers(DenseTensor::scalar(1.0)), TensorError);
}

TEST_CASE("approx_equal") {
    std::mt19937 rng(47);
    DenseTensor x = random_tensor(rng, Shape{{3, 3}});
    CHECK(approx_equal(x, x, 0.0));
    CHECK_FALSE(approx_equal(x, random_tensor(rng, Shape{{3}}), 1.0));

    DenseTensor y = x;
    y[4] += 1e-12;
    CHECK(approx_equal(x, y, 1e-9));
    y[4] += 1.0;
    CHECK_FALSE(approx_equal(x, y, 1e-9));
}
