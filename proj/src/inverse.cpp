#include "ilukit/inverse.hpp"

#include <chrono>

#include "kernels.hpp"

namespace ilukit {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Lower-inverse skeleton: strictly-lower pattern columns followed by an
// explicit unit diagonal. Coefficients are accumulated here during the
// forward sweep and sign-flipped once all rows are reduced.
SparseMatrixCsr make_lower_skeleton(const FillPattern& p) {
    SparseMatrixCsr m;
    m.n = p.n;
    m.row_ptr.assign(static_cast<std::size_t>(p.n) + 1, 0);
    for (std::int32_t j = 0; j < p.n; ++j)
        m.row_ptr[j + 1] = m.row_ptr[j] + (p.diag_pos[j] - p.row_ptr[j]) + 1;
    m.col_idx.resize(m.row_ptr.back());
    m.values.assign(m.row_ptr.back(), 0.0);
    for (std::int32_t j = 0; j < p.n; ++j) {
        std::int64_t e = m.row_ptr[j];
        for (std::int64_t q = p.row_ptr[j]; q < p.diag_pos[j]; ++q, ++e)
            m.col_idx[e] = p.col_idx[q];
        m.col_idx[e] = j;
        m.values[e] = 1.0;
    }
    return m;
}

// Upper-inverse skeleton: explicit diagonal slot followed by the strictly
// upper pattern columns, whose slots start out holding the corresponding
// upper-factor values (the initial state of the accumulation).
SparseMatrixCsr make_upper_skeleton(const FillPattern& p, const FilledMatrix& f) {
    SparseMatrixCsr m;
    m.n = p.n;
    m.row_ptr.assign(static_cast<std::size_t>(p.n) + 1, 0);
    for (std::int32_t j = 0; j < p.n; ++j)
        m.row_ptr[j + 1] = m.row_ptr[j] + (p.row_ptr[j + 1] - p.diag_pos[j]);
    m.col_idx.resize(m.row_ptr.back());
    m.values.assign(m.row_ptr.back(), 0.0);
    for (std::int32_t j = 0; j < p.n; ++j) {
        std::int64_t e = m.row_ptr[j];
        m.col_idx[e] = j;
        ++e;
        for (std::int64_t q = f.diag_pos[j] + 1; q < f.row_ptr[j + 1]; ++q, ++e) {
            m.col_idx[e] = f.col_idx[q];
            m.values[e] = f.values[q];
        }
    }
    return m;
}

// Applies available pivots (columns >= limit_low) to row i of the upper
// inverse, consuming them right to left. Each pivot h scales row i's slot
// at column h by the pivot row's reciprocal diagonal and adds the pivot
// row's inverse entries into the slots to its right, restricted to stored
// positions. Returns the new applied count.
std::int32_t upper_inverse_reduce(SparseMatrixCsr& uinv, std::int32_t i, std::int32_t applied,
                                  std::int32_t limit_low, detail::Workspace& ws,
                                  std::uint64_t& fpa) {
    const std::int64_t rb = uinv.row_ptr[i];
    const std::int64_t re = uinv.row_ptr[i + 1];
    const auto upper = static_cast<std::int32_t>(re - rb - 1);
    if (applied >= upper) return applied;
    if (uinv.col_idx[rb + 1 + (upper - 1 - applied)] < limit_low) return applied;

    const std::uint32_t g = ws.fresh();
    for (std::int64_t e = rb + 1; e < re; ++e) {
        const std::int32_t c = uinv.col_idx[e];
        ws.pos[c] = static_cast<std::int32_t>(e - rb);
        ws.stamp[c] = g;
    }
    double* w = uinv.values.data() + rb;

    std::int32_t p = applied;
    while (p < upper) {
        const std::int32_t slot = 1 + (upper - 1 - p);
        const std::int32_t h = uinv.col_idx[rb + slot];
        if (h < limit_low) break;
        const double mult = w[slot]; // still the original upper-factor value
        const std::int64_t hb = uinv.row_ptr[h];
        w[slot] = mult * uinv.values[hb];
        ++fpa;
        for (std::int64_t q = hb + 1; q < uinv.row_ptr[h + 1]; ++q) {
            const std::int32_t t = uinv.col_idx[q];
            if (ws.stamp[t] == g) {
                w[ws.pos[t]] += mult * uinv.values[q];
                ++fpa;
            }
        }
        ++p;
    }
    return p;
}

// Once every pivot is applied: store the reciprocal diagonal and scale the
// accumulated sums by it, negated.
void upper_inverse_finish(const FilledMatrix& f, SparseMatrixCsr& uinv, std::int32_t i,
                          std::uint64_t& fpa) {
    const std::int64_t rb = uinv.row_ptr[i];
    const double recip = 1.0 / f.diag_value(i);
    ++fpa;
    uinv.values[rb] = recip;
    for (std::int64_t e = rb + 1; e < uinv.row_ptr[i + 1]; ++e) {
        uinv.values[e] = -(uinv.values[e] * recip);
        ++fpa;
    }
}

} // namespace

InverseFactorResult factor_with_inverse(const SparseMatrixCsr& a, const FillPattern& pattern,
                                        int workers, std::int32_t band_size,
                                        const NumericOptions& opt, EngineStats* stats) {
    const BandPartition part = partition_bands(a.n, band_size, workers);

    InverseFactorResult r;
    r.f = detail::make_filled(a, pattern);
    r.inv.lower_inv = make_lower_skeleton(pattern);

    std::vector<detail::Workspace> ws(workers);
    std::vector<FpaCount> fpa(workers);
    std::vector<std::int32_t> applied(a.n, 0);

    // Forward sweep: factorization combined with the lower-inverse updates.
    {
        const auto t0 = std::chrono::steady_clock::now();
        BandCallbacks cb;
        cb.partial = [&](int b, std::int64_t done_rows, int w) {
            ws[w].ensure(a.n);
            const auto limit = static_cast<std::int32_t>(done_rows);
            for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j)
                applied[j] = detail::reduce_row_with_inverse(
                    r.f, r.inv.lower_inv, static_cast<std::int32_t>(j), applied[j], limit, ws[w],
                    fpa[w]);
        };
        cb.complete = [&](int b, int w) {
            ws[w].ensure(a.n);
            for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j) {
                const auto row = static_cast<std::int32_t>(j);
                applied[j] = detail::reduce_row_with_inverse(r.f, r.inv.lower_inv, row,
                                                             applied[j], row, ws[w], fpa[w]);
                detail::settle_pivot(r.f, row, opt);
            }
        };
        run_banded(part, SweepDirection::forward, cb, stats);
        if (stats) stats->numeric_seconds += seconds_since(t0);
    }

    const auto t1 = std::chrono::steady_clock::now();

    // The accumulated coefficients negate into the lower inverse.
    for (std::int32_t j = 0; j < a.n; ++j) {
        const std::int64_t e0 = r.inv.lower_inv.row_ptr[j];
        const std::int64_t e1 = r.inv.lower_inv.row_ptr[j + 1] - 1; // diagonal stays 1
        for (std::int64_t e = e0; e < e1; ++e) r.inv.lower_inv.values[e] = -r.inv.lower_inv.values[e];
    }

    // Backward sweep: build the upper inverse bottom-up, right to left.
    r.inv.upper_inv = make_upper_skeleton(pattern, r.f);
    std::fill(applied.begin(), applied.end(), 0);
    {
        BandCallbacks cb;
        cb.partial = [&](int b, std::int64_t done_rows, int w) {
            ws[w].ensure(a.n);
            const auto limit_low = static_cast<std::int32_t>(a.n - done_rows);
            for (std::int64_t j = part.band_end(b) - 1; j >= part.band_begin(b); --j)
                applied[j] =
                    upper_inverse_reduce(r.inv.upper_inv, static_cast<std::int32_t>(j),
                                         applied[j], limit_low, ws[w], fpa[w].inverse);
        };
        cb.complete = [&](int b, int w) {
            ws[w].ensure(a.n);
            for (std::int64_t j = part.band_end(b) - 1; j >= part.band_begin(b); --j) {
                const auto row = static_cast<std::int32_t>(j);
                applied[j] = upper_inverse_reduce(r.inv.upper_inv, row, applied[j], row + 1,
                                                  ws[w], fpa[w].inverse);
                upper_inverse_finish(r.f, r.inv.upper_inv, row, fpa[w].inverse);
            }
        };
        run_banded(part, SweepDirection::backward, cb, stats);
    }
    if (stats) stats->inverse_seconds += seconds_since(t1);

    for (const FpaCount& c : fpa) {
        r.fpa.factor += c.factor;
        r.fpa.inverse += c.inverse;
    }
    return r;
}

Vector apply_iilu(const IncompleteInversePair& pair, const Vector& b, int threads) {
    Vector tmp;
    spmv_into(pair.lower_inv, b, tmp, threads);
    Vector out;
    spmv_into(pair.upper_inv, tmp, out, threads);
    return out;
}

} // namespace ilukit
