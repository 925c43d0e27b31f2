#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ilukit/numeric.hpp"
#include "ilukit/symbolic.hpp"
#include "test_util.hpp"

using namespace ilukit;
using testutil::Rng;

TEST_CASE("diagonal matrix factors trivially") {
    const SparseMatrixCsr a = testutil::from_dense({{2, 0}, {0, 3}});
    const FillPattern p = symbolic_factor(a, 3);
    const NumericResult r = numeric_factor(a, p);
    CHECK(r.f.lower_count(0) == 0);
    CHECK(r.f.lower_count(1) == 0);
    CHECK(r.f.diag_value(0) == 2.0);
    CHECK(r.f.diag_value(1) == 3.0);
    CHECK(r.fpa.factor == 0);
}

TEST_CASE("2x2 hand elimination") {
    const SparseMatrixCsr a = testutil::from_dense({{4, 3}, {6, 3}});
    const FillPattern p = symbolic_factor(a, 0);
    const NumericResult r = numeric_factor(a, p);
    CHECK(r.f.values[r.f.row_ptr[1]] == 1.5);  // multiplier
    CHECK(r.f.diag_value(0) == 4.0);
    CHECK(r.f.diag_value(1) == -1.5);
    const auto u = testutil::filled_upper(r.f);
    CHECK(u[0][1] == 3.0);
    // one divide for the multiplier, one multiply updating the trailing entry
    CHECK(r.fpa.factor == 2);
}

TEST_CASE("full-level factorization matches the dense LU oracle") {
    Rng rng(9001);
    for (int trial = 0; trial < 6; ++trial) {
        const std::int32_t n = 10 + 3 * trial;
        const SparseMatrixCsr a = testutil::random_dominant(rng, n, 0.3);
        const FillPattern p = symbolic_factor(a, n - 1);
        const NumericResult r = numeric_factor(a, p);

        const auto dense = testutil::to_dense(a);
        const auto f_oracle = testutil::dense_lu(dense);
        const auto l = testutil::filled_lower(r.f);
        const auto u = testutil::filled_upper(r.f);
        const double scale = testutil::max_abs(dense);

        // reconstruction: L*U == A entrywise
        const auto lu = testutil::dense_matmul(l, u);
        for (std::int32_t i = 0; i < n; ++i)
            for (std::int32_t j = 0; j < n; ++j)
                CHECK(std::abs(lu[i][j] - dense[i][j]) <= 1e-12 * scale);
        // and the factors agree with the oracle's
        for (std::int32_t i = 0; i < n; ++i)
            for (std::int32_t j = 0; j < n; ++j) {
                const double want = f_oracle[i][j];
                const double got = j < i ? l[i][j] : u[i][j];
                CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
            }
    }
}

TEST_CASE("factorization is deterministic and preserves the pattern") {
    Rng rng(9002);
    const SparseMatrixCsr a = testutil::random_sparse(rng, 50, 0.06);
    const FillPattern p = symbolic_factor(a, 2);
    const NumericResult r1 = numeric_factor(a, p);
    const NumericResult r2 = numeric_factor(a, p);
    CHECK(r1.f.values == r2.f.values);
    CHECK(r1.fpa == r2.fpa);
    CHECK(r1.f.row_ptr == p.row_ptr);
    CHECK(r1.f.col_idx == p.col_idx);
}

TEST_CASE("zero pivot: breakdown names the row, perturbation recovers") {
    // Row 1 becomes exactly zero on the diagonal after elimination.
    const SparseMatrixCsr a = testutil::from_dense({{2, 4, 1}, {1, 2, 0}, {1, 0, 1}});
    const FillPattern p = symbolic_factor(a, 2);
    try {
        numeric_factor(a, p);
        FAIL("expected BreakdownError");
    } catch (const BreakdownError& e) {
        CHECK(e.row() == 1);
    }

    NumericOptions opt;
    opt.perturb_zero_pivot = true;
    const NumericResult r = numeric_factor(a, p, opt);
    CHECK(std::abs(r.f.diag_value(1)) > 0.0);
}

TEST_CASE("a pattern that does not cover the matrix is rejected") {
    const SparseMatrixCsr a = testutil::from_dense({{4, 3}, {6, 3}});
    const SparseMatrixCsr diag_only = testutil::from_dense({{4, 0}, {0, 3}});
    const FillPattern p = symbolic_factor(diag_only, 0);
    CHECK_THROWS_AS(numeric_factor(a, p), std::invalid_argument);
}

TEST_CASE("triangular solve: identity and 2x2 hand case") {
    const SparseMatrixCsr eye = testutil::from_dense({{1, 0}, {0, 1}});
    const NumericResult re = numeric_factor(eye, symbolic_factor(eye, 0));
    const Vector b{2.5, -1.0};
    CHECK(triangular_solve(re.f, b) == b);

    const SparseMatrixCsr a = testutil::from_dense({{4, 3}, {6, 3}});
    const NumericResult ra = numeric_factor(a, symbolic_factor(a, 0));
    const Vector y = triangular_solve(ra.f, {7.0, 9.0});
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-14));

    Vector wrong{1.0};
    CHECK_THROWS_AS(triangular_solve(ra.f, wrong), std::invalid_argument);
}

TEST_CASE("triangular solve inverts the full-level factors") {
    Rng rng(9003);
    for (int trial = 0; trial < 4; ++trial) {
        const std::int32_t n = 20;
        const SparseMatrixCsr a = testutil::random_dominant(rng, n, 0.4);
        const NumericResult r = numeric_factor(a, symbolic_factor(a, n - 1));
        const Vector b = testutil::random_vector(rng, n);
        const Vector y = triangular_solve(r.f, b);

        const auto l = testutil::filled_lower(r.f);
        const auto u = testutil::filled_upper(r.f);
        const Vector lu_y = testutil::dense_matvec(l, testutil::dense_matvec(u, y));
        double diff = 0.0, bnorm = 0.0;
        for (std::int32_t i = 0; i < n; ++i) {
            diff += (lu_y[i] - b[i]) * (lu_y[i] - b[i]);
            bnorm += b[i] * b[i];
        }
        CHECK(std::sqrt(diff) <= 1e-12 * std::sqrt(bnorm));

        // round trip through the factors
        const Vector z = triangular_solve(r.f, lu_y);
        for (std::int32_t i = 0; i < n; ++i)
            CHECK(std::abs(z[i] - y[i]) <= 1e-12 * std::max(1.0, std::abs(y[i])));
    }
}
