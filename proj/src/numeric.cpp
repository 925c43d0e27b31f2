#include "ilukit/numeric.hpp"

#include <cmath>

#include "kernels.hpp"

namespace ilukit {
namespace detail {

FilledMatrix make_filled(const SparseMatrixCsr& a, const FillPattern& pattern) {
    if (a.n != pattern.n) throw std::invalid_argument("pattern dimension does not match matrix");
    FilledMatrix f;
    f.n = pattern.n;
    f.row_ptr = pattern.row_ptr;
    f.diag_pos = pattern.diag_pos;
    f.col_idx = pattern.col_idx;
    f.values.assign(pattern.col_idx.size(), 0.0);
    for (std::int32_t j = 0; j < a.n; ++j) {
        std::int64_t e = f.row_ptr[j];
        const std::int64_t re = f.row_ptr[j + 1];
        for (std::int64_t q = a.row_ptr[j]; q < a.row_ptr[j + 1]; ++q) {
            const std::int32_t t = a.col_idx[q];
            while (e < re && f.col_idx[e] < t) ++e;
            if (e == re || f.col_idx[e] != t)
                throw std::invalid_argument("pattern does not cover the matrix");
            f.values[e] = a.values[q];
        }
    }
    return f;
}

std::int32_t reduce_row(FilledMatrix& f, std::int32_t j, std::int32_t applied, std::int32_t limit,
                        Workspace& ws, std::uint64_t& fpa) {
    const std::int64_t rb = f.row_ptr[j];
    const std::int32_t lower = f.lower_count(j);
    if (applied >= lower || f.col_idx[rb + applied] >= limit) return applied;

    const std::uint32_t g = ws.fresh();
    const std::int64_t re = f.row_ptr[j + 1];
    for (std::int64_t e = rb; e < re; ++e) {
        const std::int32_t c = f.col_idx[e];
        ws.pos[c] = static_cast<std::int32_t>(e - rb);
        ws.stamp[c] = g;
    }
    double* vals = f.values.data() + rb;

    std::int32_t p = applied;
    while (p < lower) {
        const std::int32_t piv = f.col_idx[rb + p];
        if (piv >= limit) break;
        const double mult = vals[p] / f.values[f.diag_pos[piv]];
        ++fpa;
        vals[p] = mult;
        const std::int64_t pe = f.row_ptr[piv + 1];
        for (std::int64_t q = f.diag_pos[piv] + 1; q < pe; ++q) {
            const std::int32_t t = f.col_idx[q];
            if (ws.stamp[t] == g) {
                vals[ws.pos[t]] -= mult * f.values[q];
                ++fpa;
            }
        }
        ++p;
    }
    return p;
}

std::int32_t reduce_row_with_inverse(FilledMatrix& f, SparseMatrixCsr& linv, std::int32_t j,
                                     std::int32_t applied, std::int32_t limit, Workspace& ws,
                                     FpaCount& fpa) {
    const std::int64_t rb = f.row_ptr[j];
    const std::int32_t lower = f.lower_count(j);
    if (applied >= lower || f.col_idx[rb + applied] >= limit) return applied;

    const std::uint32_t g = ws.fresh();
    const std::int64_t re = f.row_ptr[j + 1];
    for (std::int64_t e = rb; e < re; ++e) {
        const std::int32_t c = f.col_idx[e];
        ws.pos[c] = static_cast<std::int32_t>(e - rb);
        ws.stamp[c] = g;
    }
    double* vals = f.values.data() + rb;
    double* coeff = linv.values.data() + linv.row_ptr[j];

    std::int32_t p = applied;
    while (p < lower) {
        const std::int32_t piv = f.col_idx[rb + p];
        if (piv >= limit) break;
        const double mult = vals[p] / f.values[f.diag_pos[piv]];
        ++fpa.factor;
        vals[p] = mult;
        coeff[p] = mult;
        const std::int64_t pe = f.row_ptr[piv + 1];
        for (std::int64_t q = f.diag_pos[piv] + 1; q < pe; ++q) {
            const std::int32_t t = f.col_idx[q];
            if (ws.stamp[t] == g) {
                vals[ws.pos[t]] -= mult * f.values[q];
                ++fpa.factor;
            }
        }
        // Side updates on the inverse coefficients: columns left of the
        // pivot, restricted to stored positions of both rows.
        const std::int64_t lb = linv.row_ptr[piv];
        const std::int64_t ld = lb + (f.diag_pos[piv] - f.row_ptr[piv]);
        for (std::int64_t q = lb; q < ld; ++q) {
            const std::int32_t t = linv.col_idx[q];
            if (ws.stamp[t] == g) {
                coeff[ws.pos[t]] -= mult * linv.values[q];
                ++fpa.inverse;
            }
        }
        ++p;
    }
    return p;
}

void settle_pivot(FilledMatrix& f, std::int32_t j, const NumericOptions& opt) {
    double& d = f.values[f.diag_pos[j]];
    if (std::abs(d) >= opt.pivot_threshold) return;
    if (opt.perturb_zero_pivot) {
        double scale = 0.0;
        for (std::int64_t e = f.row_ptr[j]; e < f.row_ptr[j + 1]; ++e)
            scale = std::max(scale, std::abs(f.values[e]));
        if (scale == 0.0) scale = 1.0;
        d = (std::signbit(d) ? -1.0 : 1.0) * opt.perturb_epsilon * scale;
        return;
    }
    throw BreakdownError(j, "zero pivot in row " + std::to_string(j) +
                                " (|u_jj| < " + std::to_string(opt.pivot_threshold) + ")");
}

} // namespace detail

NumericResult numeric_factor(const SparseMatrixCsr& a, const FillPattern& pattern,
                             const NumericOptions& opt) {
    NumericResult r;
    r.f = detail::make_filled(a, pattern);
    detail::Workspace ws;
    ws.ensure(a.n);
    for (std::int32_t j = 0; j < a.n; ++j) {
        detail::reduce_row(r.f, j, 0, j, ws, r.fpa.factor);
        detail::settle_pivot(r.f, j, opt);
    }
    return r;
}

Vector triangular_solve(const FilledMatrix& f, const Vector& b) {
    if (static_cast<std::int64_t>(b.size()) != f.n)
        throw std::invalid_argument("triangular_solve: length mismatch");
    Vector y = b;
    for (std::int32_t i = 0; i < f.n; ++i) {
        double s = y[i];
        for (std::int64_t e = f.row_ptr[i]; e < f.diag_pos[i]; ++e)
            s -= f.values[e] * y[f.col_idx[e]];
        y[i] = s;
    }
    for (std::int32_t i = f.n - 1; i >= 0; --i) {
        double s = y[i];
        for (std::int64_t e = f.diag_pos[i] + 1; e < f.row_ptr[i + 1]; ++e)
            s -= f.values[e] * y[f.col_idx[e]];
        const double d = f.diag_value(i);
        if (d == 0.0) throw BreakdownError(i, "zero diagonal in row " + std::to_string(i));
        y[i] = s / d;
    }
    return y;
}

} // namespace ilukit
