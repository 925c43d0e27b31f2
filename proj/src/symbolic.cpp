#include "ilukit/symbolic.hpp"

#include <algorithm>

#include "kernels.hpp"

namespace ilukit {
namespace detail {

void Workspace::ensure(std::int32_t n) {
    if (static_cast<std::int32_t>(pos.size()) >= n) return;
    pos.resize(n, 0);
    stamp.resize(n, 0);
    next.resize(n, 0);
    lvl.resize(n, 0);
}

std::uint32_t Workspace::fresh() {
    if (++generation == 0) {
        std::fill(stamp.begin(), stamp.end(), 0u);
        generation = 1;
    }
    return generation;
}

void SymbolicRows::init(std::int32_t n_, int k_) {
    n = n_;
    k = k_;
    cols.assign(n, {});
    lvls.assign(n, {});
    merge_limit.assign(n, 0);
}

void SymbolicRows::init_row(const SparseMatrixCsr& a, std::int32_t j) {
    auto& c = cols[j];
    auto& l = lvls[j];
    const std::int64_t b = a.row_ptr[j], e = a.row_ptr[j + 1];
    c.clear();
    c.reserve(static_cast<std::size_t>(e - b) + 1);
    bool have_diag = false;
    for (std::int64_t q = b; q < e; ++q) {
        const std::int32_t t = a.col_idx[q];
        if (t > j && !have_diag) {
            c.push_back(j);
            have_diag = true;
        } else if (t == j) {
            have_diag = true;
        }
        c.push_back(t);
    }
    if (!have_diag) c.push_back(j);
    l.assign(c.size(), 0);
    merge_limit[j] = 0;
}

void symbolic_merge_row(SymbolicRows& rows, std::int32_t j, std::int32_t limit, Workspace& ws) {
    const std::int32_t upto = std::min(limit, j);
    if (rows.merge_limit[j] >= upto) return;
    auto& cols = rows.cols[j];
    auto& lvls = rows.lvls[j];
    const std::int32_t resume = rows.merge_limit[j];

    // Nothing to do when no stored pivot falls inside the window.
    auto first = std::lower_bound(cols.begin(), cols.end(), resume);
    if (first == cols.end() || *first >= upto) {
        rows.merge_limit[j] = upto;
        return;
    }

    // Thread the current row through the scratch linked list so fill can be
    // inserted in order while the pivot scan is in flight.
    const std::int32_t sentinel = rows.n;
    std::int32_t head = sentinel;
    std::int32_t prev = -1;
    for (std::size_t idx = 0; idx < cols.size(); ++idx) {
        const std::int32_t c = cols[idx];
        ws.lvl[c] = lvls[idx];
        if (prev < 0)
            head = c;
        else
            ws.next[prev] = c;
        prev = c;
    }
    if (prev >= 0) ws.next[prev] = sentinel;

    std::size_t count = cols.size();
    std::int32_t cur = head;
    while (cur != sentinel && cur < resume) cur = ws.next[cur];
    while (cur != sentinel && cur < upto) {
        const auto& pivot_cols = rows.cols[cur];
        const auto& pivot_lvls = rows.lvls[cur];
        const level_t pivot_level = ws.lvl[cur];
        std::size_t q = static_cast<std::size_t>(
            std::upper_bound(pivot_cols.begin(), pivot_cols.end(), cur) - pivot_cols.begin());
        std::int32_t insert_after = cur;
        for (; q < pivot_cols.size(); ++q) {
            const std::int32_t t = pivot_cols[q];
            const level_t weight = level_saturating_add(pivot_level, pivot_lvls[q]);
            while (ws.next[insert_after] < t) insert_after = ws.next[insert_after];
            if (ws.next[insert_after] == t) {
                if (weight < ws.lvl[t]) ws.lvl[t] = weight;
            } else if (weight <= rows.k) {
                ws.next[t] = ws.next[insert_after];
                ws.next[insert_after] = t;
                ws.lvl[t] = weight;
                insert_after = t;
                ++count;
            }
        }
        cur = ws.next[cur];
    }

    cols.resize(count);
    lvls.resize(count);
    std::size_t idx = 0;
    for (std::int32_t c = head; c != sentinel; c = ws.next[c], ++idx) {
        cols[idx] = c;
        lvls[idx] = ws.lvl[c];
    }
    rows.merge_limit[j] = upto;
}

void symbolic_row_small_k(const SparseMatrixCsr& a, std::int32_t j, int k, SymbolicRows& rows,
                          Workspace& ws) {
    rows.init_row(a, j);
    rows.merge_limit[j] = j;
    if (k < 1) return;

    auto& c = rows.cols[j];
    auto& l = rows.lvls[j];
    const std::uint32_t g = ws.fresh();
    for (const std::int32_t t : c) ws.stamp[t] = g;

    ws.tmp_cols.clear();
    const std::size_t base = c.size();
    for (std::size_t p = 0; p < base && c[p] < j; ++p) {
        const std::int32_t i = c[p];
        for (std::int64_t q = a.row_ptr[i]; q < a.row_ptr[i + 1]; ++q) {
            const std::int32_t t = a.col_idx[q];
            if (t <= i) continue;
            if (ws.stamp[t] != g) {
                ws.stamp[t] = g;
                ws.tmp_cols.push_back(t);
            }
        }
    }
    if (ws.tmp_cols.empty()) return;
    std::sort(ws.tmp_cols.begin(), ws.tmp_cols.end());

    // Merge the level-0 row with the level-1 fill.
    std::vector<std::int32_t> merged;
    std::vector<level_t> merged_lvls;
    merged.reserve(base + ws.tmp_cols.size());
    merged_lvls.reserve(base + ws.tmp_cols.size());
    std::size_t p0 = 0, p1 = 0;
    while (p0 < base || p1 < ws.tmp_cols.size()) {
        if (p1 == ws.tmp_cols.size() || (p0 < base && c[p0] < ws.tmp_cols[p1])) {
            merged.push_back(c[p0]);
            merged_lvls.push_back(0);
            ++p0;
        } else {
            merged.push_back(ws.tmp_cols[p1]);
            merged_lvls.push_back(1);
            ++p1;
        }
    }
    c = std::move(merged);
    l = std::move(merged_lvls);
}

FillPattern finalize_pattern(SymbolicRows&& rows) {
    FillPattern p;
    p.n = rows.n;
    p.k = rows.k;
    p.row_ptr.assign(static_cast<std::size_t>(rows.n) + 1, 0);
    for (std::int32_t j = 0; j < rows.n; ++j)
        p.row_ptr[j + 1] = p.row_ptr[j] + static_cast<std::int64_t>(rows.cols[j].size());
    p.col_idx.resize(p.row_ptr.back());
    p.levels.resize(p.row_ptr.back());
    p.diag_pos.resize(rows.n);
    for (std::int32_t j = 0; j < rows.n; ++j) {
        std::int64_t e = p.row_ptr[j];
        std::int64_t diag = -1;
        for (std::size_t idx = 0; idx < rows.cols[j].size(); ++idx, ++e) {
            p.col_idx[e] = rows.cols[j][idx];
            p.levels[e] = rows.lvls[j][idx];
            if (rows.cols[j][idx] == j) diag = e;
        }
        p.diag_pos[j] = diag;
        rows.cols[j].clear();
        rows.cols[j].shrink_to_fit();
        rows.lvls[j].clear();
        rows.lvls[j].shrink_to_fit();
    }
    return p;
}

} // namespace detail

FillPattern symbolic_factor(const SparseMatrixCsr& a, int k) {
    if (k < 0) throw std::invalid_argument("level limit must be >= 0");
    detail::SymbolicRows rows;
    rows.init(a.n, k);
    detail::Workspace ws;
    ws.ensure(a.n);
    for (std::int32_t j = 0; j < a.n; ++j) {
        rows.init_row(a, j);
        detail::symbolic_merge_row(rows, j, j, ws);
    }
    return detail::finalize_pattern(std::move(rows));
}

FillPattern symbolic_factor_k1(const SparseMatrixCsr& a) {
    detail::SymbolicRows rows;
    rows.init(a.n, 1);
    detail::Workspace ws;
    ws.ensure(a.n);
    for (std::int32_t j = 0; j < a.n; ++j) detail::symbolic_row_small_k(a, j, 1, rows, ws);
    return detail::finalize_pattern(std::move(rows));
}

} // namespace ilukit
