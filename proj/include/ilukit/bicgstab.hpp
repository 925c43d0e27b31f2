/// @file bicgstab.hpp
/// @brief Right-preconditioned BiCGSTAB with a pluggable preconditioner
///        application, plus the try-inverse/fail-fast/fall-back driver.

#ifndef ILUKIT_BICGSTAB_HPP
#define ILUKIT_BICGSTAB_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ilukit/inverse.hpp"
#include "ilukit/numeric.hpp"
#include "ilukit/sparse.hpp"

namespace ilukit {

struct SolverConfig {
    double rtol = 1e-8;
    int max_iters = 1000;
    /// Iterations granted to the incomplete-inverse attempt before the
    /// residual-growth test may declare divergence.
    int failfast_window = 10;
    /// Residual growth factor, relative to the starting residual, treated
    /// as divergence within the window.
    double failfast_growth = 10.0;
};

enum class SolveOutcome { converged, breakdown, max_iterations, diverged };
enum class PrecondMethod { base, incomplete_inverse, fallback_after_failfast };

std::string to_string(SolveOutcome o);
std::string to_string(PrecondMethod m);

struct SolveReport {
    PrecondMethod method = PrecondMethod::base;
    SolveOutcome outcome = SolveOutcome::max_iterations;
    int iterations = 0;
    /// Relative recurrence residuals; entry 0 is the starting residual, so
    /// the length is always iterations + 1.
    std::vector<double> residual_history;
    /// Independently recomputed ||b - A x|| / ||b||.
    double true_residual = 0.0;
    std::int64_t pattern_entries = 0;
    FpaCount fpa;
    double time_symbolic = 0.0;
    double time_numeric = 0.0;
    double time_inverse = 0.0;
    double time_iterations = 0.0;
    /// Iterations spent in an abandoned incomplete-inverse attempt
    /// (0 unless method == fallback_after_failfast).
    int attempt_iterations = 0;
    /// Whether the abandoned attempt tripped the fail-fast divergence test
    /// (as opposed to running out of iterations or breaking down).
    bool attempt_failfast = false;
};

/// out = M^{-1} * in
using PrecondApply = std::function<void(const Vector& in, Vector& out)>;

struct BicgstabResult {
    Vector x;
    SolveOutcome outcome = SolveOutcome::max_iterations;
    int iterations = 0;
    std::vector<double> residual_history;
    bool failfast_fired = false;
};

/// Standard right-preconditioned BiCGSTAB from a zero initial guess, with a
/// fixed left-to-right summation order so identical inputs produce
/// bit-identical runs. Two preconditioner applications per full iteration.
/// Denominators below 1e-300 report breakdown; non-finite residuals report
/// divergence. When `failfast` is set, residual growth beyond
/// cfg.failfast_growth within the first cfg.failfast_window iterations
/// aborts with the divergence outcome.
BicgstabResult bicgstab(const SparseMatrixCsr& a, const PrecondApply& precond, const Vector& b,
                        const SolverConfig& cfg, bool failfast = false);

struct AutoSolveResult {
    Vector x;
    SolveReport report;
};

/// Factors once with the incomplete inverses and tries them as the
/// preconditioner. If that attempt fails (fail-fast divergence, breakdown,
/// or running out of iterations), the solve restarts from zero with
/// substitution solves over the already-factored matrix — no
/// refactorization — and the report says so.
AutoSolveResult solve_auto(const SparseMatrixCsr& a, const Vector& b, int k, int workers,
                           std::int32_t band_size, const SolverConfig& cfg = {},
                           const NumericOptions& numeric_opt = {});

} // namespace ilukit

#endif // ILUKIT_BICGSTAB_HPP
