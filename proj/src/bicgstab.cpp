#include "ilukit/bicgstab.hpp"

#include <chrono>
#include <cmath>

#include "ilukit/engine.hpp"

namespace ilukit {

namespace {

constexpr double kTiny = 1e-300;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::string to_string(SolveOutcome o) {
    switch (o) {
        case SolveOutcome::converged: return "converged";
        case SolveOutcome::breakdown: return "breakdown";
        case SolveOutcome::max_iterations: return "max-iters";
        case SolveOutcome::diverged: return "diverged";
    }
    return "unknown";
}

std::string to_string(PrecondMethod m) {
    switch (m) {
        case PrecondMethod::base: return "base";
        case PrecondMethod::incomplete_inverse: return "incomplete-inverse";
        case PrecondMethod::fallback_after_failfast: return "fallback-after-failfast";
    }
    return "unknown";
}

BicgstabResult bicgstab(const SparseMatrixCsr& a, const PrecondApply& precond, const Vector& b,
                        const SolverConfig& cfg, bool failfast) {
    if (static_cast<std::int64_t>(b.size()) != a.n)
        throw std::invalid_argument("bicgstab: right-hand side length mismatch");

    const std::size_t n = b.size();
    BicgstabResult res;
    res.x.assign(n, 0.0);

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.outcome = SolveOutcome::converged;
        res.residual_history = {0.0};
        return res;
    }

    Vector r = b; // r = b - A*0
    Vector rhat = r;
    Vector p(n, 0.0), v(n, 0.0), s(n, 0.0), t(n, 0.0);
    Vector phat(n, 0.0), shat(n, 0.0);

    res.residual_history.push_back(norm2(r) / bnorm);
    double rho_prev = 1.0, alpha = 1.0, omega = 1.0;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        const double rho = dot(rhat, r);
        if (std::abs(rho) < kTiny) {
            res.outcome = SolveOutcome::breakdown;
            break;
        }
        if (iter == 1) {
            p = r;
        } else {
            const double beta = (rho / rho_prev) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(p, phat);
        spmv_into(a, phat, v);
        const double rv = dot(rhat, v);
        if (std::abs(rv) < kTiny) {
            res.outcome = SolveOutcome::breakdown;
            break;
        }
        alpha = rho / rv;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];

        const double snorm = norm2(s) / bnorm;
        if (snorm <= cfg.rtol) {
            for (std::size_t i = 0; i < n; ++i) res.x[i] += alpha * phat[i];
            res.residual_history.push_back(snorm);
            res.outcome = SolveOutcome::converged;
            break;
        }

        precond(s, shat);
        spmv_into(a, shat, t);
        const double tt = dot(t, t);
        if (tt < kTiny) {
            res.outcome = SolveOutcome::breakdown;
            break;
        }
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < n; ++i) res.x[i] += alpha * phat[i] + omega * shat[i];
        for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];

        const double rnorm = norm2(r) / bnorm;
        res.residual_history.push_back(rnorm);
        if (!std::isfinite(rnorm)) {
            res.outcome = SolveOutcome::diverged;
            if (failfast) res.failfast_fired = true;
            break;
        }
        if (rnorm <= cfg.rtol) {
            res.outcome = SolveOutcome::converged;
            break;
        }
        if (failfast && iter <= cfg.failfast_window &&
            rnorm > cfg.failfast_growth * res.residual_history.front()) {
            res.outcome = SolveOutcome::diverged;
            res.failfast_fired = true;
            break;
        }
        if (std::abs(omega) < kTiny) {
            res.outcome = SolveOutcome::breakdown;
            break;
        }
        rho_prev = rho;
    }

    res.iterations = static_cast<int>(res.residual_history.size()) - 1;
    return res;
}

AutoSolveResult solve_auto(const SparseMatrixCsr& a, const Vector& b, int k, int workers,
                           std::int32_t band_size, const SolverConfig& cfg,
                           const NumericOptions& numeric_opt) {
    EngineStats stats;
    FillPattern pattern = parallel_symbolic(a, k, workers, band_size, &stats);

    InverseFactorResult fact;
    try {
        fact = factor_with_inverse(a, pattern, workers, band_size, numeric_opt, &stats);
    } catch (const BreakdownError& e) {
        throw BreakdownError(e.row(), std::string(e.what()) +
                                          "; retry with a higher level limit or enable pivot "
                                          "perturbation");
    }

    AutoSolveResult out;
    out.report.pattern_entries = pattern.entry_count();
    out.report.fpa = fact.fpa;
    out.report.time_symbolic = stats.symbolic_seconds;
    out.report.time_numeric = stats.numeric_seconds;
    out.report.time_inverse = stats.inverse_seconds;

    const auto t0 = std::chrono::steady_clock::now();
    PrecondApply inverse_apply = [&](const Vector& in, Vector& y) {
        Vector tmp;
        spmv_into(fact.inv.lower_inv, in, tmp);
        spmv_into(fact.inv.upper_inv, tmp, y);
    };
    BicgstabResult attempt = bicgstab(a, inverse_apply, b, cfg, /*failfast=*/true);

    if (attempt.outcome == SolveOutcome::converged) {
        out.report.method = PrecondMethod::incomplete_inverse;
        out.report.outcome = attempt.outcome;
        out.report.iterations = attempt.iterations;
        out.report.residual_history = std::move(attempt.residual_history);
        out.x = std::move(attempt.x);
    } else {
        // The substitution preconditioner reuses the factored matrix as is.
        PrecondApply base_apply = [&](const Vector& in, Vector& y) {
            y = triangular_solve(fact.f, in);
        };
        BicgstabResult base = bicgstab(a, base_apply, b, cfg, /*failfast=*/false);
        out.report.method = PrecondMethod::fallback_after_failfast;
        out.report.attempt_iterations = attempt.iterations;
        out.report.attempt_failfast = attempt.failfast_fired;
        out.report.outcome = base.outcome;
        out.report.iterations = base.iterations;
        out.report.residual_history = std::move(base.residual_history);
        out.x = std::move(base.x);
    }
    out.report.time_iterations = seconds_since(t0);

    const double bnorm = norm2(b);
    Vector ax = spmv(a, out.x);
    for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = b[i] - ax[i];
    out.report.true_residual = bnorm == 0.0 ? norm2(ax) : norm2(ax) / bnorm;
    return out;
}

} // namespace ilukit
