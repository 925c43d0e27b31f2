#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ilukit/bicgstab.hpp"
#include "ilukit/engine.hpp"
#include "ilukit/inverse.hpp"
#include "test_util.hpp"

using namespace ilukit;
using testutil::Rng;

namespace {

PrecondApply identity_precond() {
    return [](const Vector& in, Vector& out) { out = in; };
}

PrecondApply solve_precond(const FilledMatrix& f) {
    return [&f](const Vector& in, Vector& out) { out = triangular_solve(f, in); };
}

PrecondApply inverse_precond(const IncompleteInversePair& pair) {
    return [&pair](const Vector& in, Vector& out) { out = apply_iilu(pair, in); };
}

SparseMatrixCsr random_spd(Rng& rng, std::int32_t n) {
    testutil::Dense b = testutil::zeros(n);
    for (std::int32_t i = 0; i < n; ++i)
        for (std::int32_t j = 0; j < n; ++j)
            if (rng.uniform() < 0.4) b[i][j] = rng.uniform(-1.0, 1.0);
    testutil::Dense m = testutil::zeros(n);
    for (std::int32_t i = 0; i < n; ++i) {
        for (std::int32_t j = 0; j < n; ++j)
            for (std::int32_t l = 0; l < n; ++l) m[i][j] += b[i][l] * b[j][l];
        m[i][i] += n;
    }
    return testutil::from_dense(m);
}

} // namespace

TEST_CASE("identity system converges in one iteration") {
    const SparseMatrixCsr eye = testutil::from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const Vector b{1.0, -2.0, 0.5};
    const BicgstabResult r = bicgstab(eye, identity_precond(), b, {});
    CHECK(r.outcome == SolveOutcome::converged);
    CHECK(r.iterations <= 1);
    for (int i = 0; i < 3; ++i) CHECK(r.x[i] == doctest::Approx(b[i]).epsilon(1e-12));
    CHECK(r.residual_history.size() == static_cast<std::size_t>(r.iterations) + 1);
}

TEST_CASE("zero right-hand side converges immediately") {
    const SparseMatrixCsr eye = testutil::from_dense({{1, 0}, {0, 1}});
    const BicgstabResult r = bicgstab(eye, identity_precond(), Vector(2, 0.0), {});
    CHECK(r.outcome == SolveOutcome::converged);
    CHECK(r.iterations == 0);
    CHECK(r.x == Vector(2, 0.0));
}

TEST_CASE("SPD system with full-level preconditioner matches the dense solve") {
    Rng rng(12001);
    for (int trial = 0; trial < 3; ++trial) {
        const std::int32_t n = 10;
        const SparseMatrixCsr a = random_spd(rng, n);
        const Vector b = testutil::random_vector(rng, n);
        const NumericResult f = numeric_factor(a, symbolic_factor(a, n - 1));
        const BicgstabResult r = bicgstab(a, solve_precond(f.f), b, {});
        REQUIRE(r.outcome == SolveOutcome::converged);

        SolverConfig cfg;
        const double bnorm = norm2(b);
        Vector res = spmv(a, r.x);
        for (std::int32_t i = 0; i < n; ++i) res[i] = b[i] - res[i];
        CHECK(norm2(res) <= cfg.rtol * bnorm * 10);

        const Vector want = testutil::dense_solve(testutil::to_dense(a), b);
        for (std::int32_t i = 0; i < n; ++i)
            CHECK(std::abs(r.x[i] - want[i]) <= 1e-6 * std::max(1.0, std::abs(want[i])));
    }
}

TEST_CASE("full-level inverse application gives the same iteration counts") {
    // Structurally dense, so the truncated inverses are exact and the two
    // preconditioner applications agree to rounding.
    Rng rng(12002);
    for (const std::int32_t n : {12, 24, 30}) {
        const SparseMatrixCsr a = testutil::random_dominant(rng, n, 1.1);
        const Vector ones(n, 1.0);
        const Vector b = spmv(a, ones);
        const FillPattern p = symbolic_factor(a, n - 1);
        const InverseFactorResult fact = factor_with_inverse(a, p, 1, n);
        const BicgstabResult with_solve = bicgstab(a, solve_precond(fact.f), b, {});
        const BicgstabResult with_inverse = bicgstab(a, inverse_precond(fact.inv), b, {});
        CHECK(with_solve.outcome == SolveOutcome::converged);
        CHECK(with_inverse.outcome == SolveOutcome::converged);
        CHECK(with_solve.iterations == with_inverse.iterations);
    }
}

TEST_CASE("identical runs are bit-identical") {
    Rng rng(12003);
    const SparseMatrixCsr a = testutil::random_dominant(rng, 40, 0.1);
    const Vector b = testutil::random_vector(rng, 40);
    const NumericResult f = numeric_factor(a, symbolic_factor(a, 1));
    const BicgstabResult r1 = bicgstab(a, solve_precond(f.f), b, {});
    const BicgstabResult r2 = bicgstab(a, solve_precond(f.f), b, {});
    CHECK(r1.x == r2.x);
    CHECK(r1.residual_history == r2.residual_history);
    CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("history length tracks iterations when the cap is hit") {
    Rng rng(12004);
    const SparseMatrixCsr a = testutil::random_sparse(rng, 30, 0.2);
    const Vector b = testutil::random_vector(rng, 30);
    SolverConfig cfg;
    cfg.max_iters = 3;
    cfg.rtol = 1e-15;
    const BicgstabResult r = bicgstab(a, identity_precond(), b, cfg);
    CHECK(r.residual_history.size() == static_cast<std::size_t>(r.iterations) + 1);
}

TEST_CASE("solve_auto on the identity keeps the inverse method") {
    const SparseMatrixCsr eye = testutil::from_dense({{1, 0}, {0, 1}});
    const Vector b{2.0, 3.0};
    const AutoSolveResult r = solve_auto(eye, b, 0, 1, 2);
    CHECK(r.report.method == PrecondMethod::incomplete_inverse);
    CHECK(r.report.outcome == SolveOutcome::converged);
    CHECK(r.report.true_residual <= 1e-12);
}

TEST_CASE("solve_auto converges quickly on a diagonally dominant system") {
    Rng rng(12005);
    const SparseMatrixCsr a = testutil::random_dominant(rng, 60, 0.05);
    const Vector ones(60, 1.0);
    const Vector b = spmv(a, ones);
    const AutoSolveResult r = solve_auto(a, b, 0, 2, 8);
    CHECK(r.report.method == PrecondMethod::incomplete_inverse);
    CHECK(r.report.outcome == SolveOutcome::converged);
    CHECK(r.report.iterations < 30);
    CHECK(r.report.residual_history.size() ==
          static_cast<std::size_t>(r.report.iterations) + 1);
    SolverConfig cfg;
    CHECK(r.report.true_residual <= 10 * cfg.rtol);
}

TEST_CASE("solve_auto falls back when the inverse attempt diverges") {
    // Brute-force search for a small instance whose truncated-inverse
    // preconditioner sends the iteration off the rails while plain
    // substitution still converges.
    bool found = false;
    for (std::uint32_t seed = 1; seed <= 2000 && !found; ++seed) {
        Rng rng(seed);
        const SparseMatrixCsr a = testutil::random_sparse(rng, 10, 0.35);
        const Vector b = testutil::random_vector(rng, 10);
        SolverConfig cfg;
        cfg.max_iters = 200;
        AutoSolveResult r;
        try {
            r = solve_auto(a, b, 0, 1, 10, cfg);
        } catch (const BreakdownError&) {
            continue;
        }
        if (r.report.method == PrecondMethod::fallback_after_failfast &&
            r.report.attempt_failfast && r.report.outcome == SolveOutcome::converged) {
            found = true;
            CHECK(r.report.attempt_iterations <= cfg.failfast_window + 1);
            CHECK(r.report.true_residual <= 10 * cfg.rtol);
        }
    }
    CHECK(found);
}

TEST_CASE("solve_auto always tries the base method before reporting failure") {
    // Starve the attempt of iterations; the fallback must still run.
    Rng rng(12006);
    const SparseMatrixCsr a = testutil::random_dominant(rng, 30, 0.2);
    const Vector b = testutil::random_vector(rng, 30);
    SolverConfig cfg;
    cfg.max_iters = 1;
    cfg.rtol = 1e-15;
    const AutoSolveResult r = solve_auto(a, b, 0, 1, 30, cfg);
    CHECK(r.report.method == PrecondMethod::fallback_after_failfast);
    CHECK(r.report.outcome != SolveOutcome::converged);
    CHECK(r.report.residual_history.size() ==
          static_cast<std::size_t>(r.report.iterations) + 1);
}

TEST_CASE("report numbers do not depend on the worker count") {
    Rng rng(12007);
    const SparseMatrixCsr a = testutil::random_dominant(rng, 80, 0.05);
    const Vector ones(80, 1.0);
    const Vector b = spmv(a, ones);
    const AutoSolveResult ref = solve_auto(a, b, 1, 1, 8);
    for (const int w : {2, 4}) {
        const AutoSolveResult r = solve_auto(a, b, 1, w, 8);
        CHECK(r.report.iterations == ref.report.iterations);
        CHECK(r.report.residual_history == ref.report.residual_history);
        CHECK(r.report.fpa == ref.report.fpa);
        CHECK(r.x == ref.x);
    }
}

TEST_CASE("solve_auto propagates factorization breakdown with guidance") {
    const SparseMatrixCsr a = testutil::from_dense({{2, 4, 1}, {1, 2, 0}, {1, 0, 1}});
    const Vector b{1.0, 1.0, 1.0};
    try {
        solve_auto(a, b, 2, 1, 3);
        FAIL("expected BreakdownError");
    } catch (const BreakdownError& e) {
        CHECK(e.row() == 1);
        CHECK(std::string(e.what()).find("higher level") != std::string::npos);
    }
}

TEST_CASE("outcome and method names are stable strings") {
    CHECK(to_string(SolveOutcome::converged) == "converged");
    CHECK(to_string(SolveOutcome::max_iterations) == "max-iters");
    CHECK(to_string(PrecondMethod::fallback_after_failfast) == "fallback-after-failfast");
    CHECK(to_string(PrecondMethod::incomplete_inverse) == "incomplete-inverse");
}
