#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ilukit/symbolic.hpp"
#include "test_util.hpp"

using namespace ilukit;
using testutil::Rng;

namespace {

SparseMatrixCsr pattern_3x3() {
    // diagonal plus (2,1) and (1,3) in 1-based terms
    return testutil::from_dense({{1, 0, 1}, {1, 1, 0}, {0, 0, 1}});
}

} // namespace

TEST_CASE("identity pattern: no fill for any k") {
    const SparseMatrixCsr eye = testutil::from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    for (const int k : {0, 1, 5}) {
        const FillPattern p = symbolic_factor(eye, k);
        CHECK(p.entry_count() == 3);
        for (const auto lvl : p.levels) CHECK(lvl == 0);
        for (std::int32_t i = 0; i < 3; ++i) CHECK(p.col_idx[p.diag_pos[i]] == i);
    }
}

TEST_CASE("3x3 hand trace: fill (2,3) appears at k=1, not k=0") {
    const SparseMatrixCsr a = pattern_3x3();

    const FillPattern p0 = symbolic_factor(a, 0);
    CHECK(p0.entry_count() == a.nnz());
    CHECK_FALSE(testutil::pattern_has(p0, 1, 2));

    const FillPattern p1 = symbolic_factor(a, 1);
    CHECK(p1.entry_count() == a.nnz() + 1);
    REQUIRE(testutil::pattern_has(p1, 1, 2));
    for (std::int64_t e = p1.row_ptr[1]; e < p1.row_ptr[2]; ++e)
        if (p1.col_idx[e] == 2) CHECK(p1.levels[e] == 1);
}

TEST_CASE("missing structural diagonal is inserted at level 0") {
    const SparseMatrixCsr a = testutil::from_dense({{0, 1}, {1, 0}});
    const FillPattern p = symbolic_factor(a, 0);
    for (std::int32_t i = 0; i < 2; ++i) {
        REQUIRE(p.diag_pos[i] >= 0);
        CHECK(p.col_idx[p.diag_pos[i]] == i);
        CHECK(p.levels[p.diag_pos[i]] == 0);
    }
}

TEST_CASE("empty matrix gives empty pattern") {
    SparseMatrixCsr a;
    a.row_ptr = {0};
    const FillPattern p = symbolic_factor(a, 2);
    CHECK(p.n == 0);
    CHECK(p.entry_count() == 0);
}

TEST_CASE("k=0 pattern equals the input pattern plus diagonals") {
    Rng rng(8001);
    for (int trial = 0; trial < 5; ++trial) {
        const SparseMatrixCsr a = testutil::random_sparse(rng, 40, 0.1);
        const FillPattern p = symbolic_factor(a, 0);
        REQUIRE(p.entry_count() == a.nnz()); // diagonals already present
        for (std::int32_t i = 0; i < a.n; ++i)
            for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e)
                CHECK(testutil::pattern_has(p, i, a.col_idx[e]));
    }
}

TEST_CASE("monotonicity: pattern(A,k) is contained in pattern(A,k+1)") {
    Rng rng(8002);
    for (int trial = 0; trial < 5; ++trial) {
        const SparseMatrixCsr a = testutil::random_sparse(rng, 35, 0.08);
        FillPattern prev = symbolic_factor(a, 0);
        for (int k = 1; k <= 4; ++k) {
            FillPattern next = symbolic_factor(a, k);
            CHECK(testutil::pattern_subset(prev, next));
            prev = std::move(next);
        }
    }
}

TEST_CASE("levels never exceed k and the diagonal is everywhere") {
    Rng rng(8003);
    const SparseMatrixCsr a = testutil::random_sparse(rng, 60, 0.05);
    for (const int k : {0, 1, 2, 3}) {
        const FillPattern p = symbolic_factor(a, k);
        for (const auto lvl : p.levels) CHECK(int(lvl) <= k);
        for (std::int32_t i = 0; i < p.n; ++i) CHECK(p.col_idx[p.diag_pos[i]] == i);
    }
}

TEST_CASE("structurally dense input stays dense with no fill") {
    Rng rng(8004);
    const SparseMatrixCsr a = testutil::random_dominant(rng, 12, 1.1);
    REQUIRE(a.nnz() == 144);
    for (const int k : {0, 2, 20}) {
        const FillPattern p = symbolic_factor(a, k);
        CHECK(p.entry_count() == 144);
        for (const auto lvl : p.levels) CHECK(lvl == 0);
    }
}

TEST_CASE("full level limit reproduces the dense elimination fill oracle") {
    Rng rng(8005);
    for (const std::int32_t n : {8, 17, 30}) {
        for (int trial = 0; trial < 4; ++trial) {
            const SparseMatrixCsr a = testutil::random_sparse(rng, n, 0.15);
            const auto want = testutil::dense_fill_pattern(a);
            const FillPattern p = symbolic_factor(a, n - 1);
            for (std::int32_t i = 0; i < n; ++i)
                for (std::int32_t j = 0; j < n; ++j)
                    CHECK(testutil::pattern_has(p, i, j) == want[i][j]);
        }
    }
}

TEST_CASE("independent-row k=1 path is bit-identical to the general algorithm") {
    const SparseMatrixCsr eye = testutil::from_dense({{1, 0}, {0, 1}});
    CHECK(symbolic_factor_k1(eye) == symbolic_factor(eye, 1));

    const SparseMatrixCsr a3 = pattern_3x3();
    const FillPattern q = symbolic_factor_k1(a3);
    CHECK(q == symbolic_factor(a3, 1));
    CHECK(testutil::pattern_has(q, 1, 2));

    Rng rng(8006);
    for (int seed = 0; seed < 20; ++seed) {
        const SparseMatrixCsr a = testutil::random_sparse(rng, 100, 0.02);
        CHECK(symbolic_factor_k1(a) == symbolic_factor(a, 1));
    }
}

TEST_CASE("negative level limit rejected") {
    const SparseMatrixCsr eye = testutil::from_dense({{1}});
    CHECK_THROWS_AS(symbolic_factor(eye, -1), std::invalid_argument);
}
