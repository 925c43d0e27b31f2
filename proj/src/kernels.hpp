// Internal row kernels shared by the sequential factorizations and the
// task-parallel engine. Both paths run the same code on the same canonical
// pivot order, which is what makes parallel output bit-identical to
// sequential output.

#ifndef ILUKIT_SRC_KERNELS_HPP
#define ILUKIT_SRC_KERNELS_HPP

#include <cstdint>
#include <vector>

#include "ilukit/numeric.hpp"
#include "ilukit/sparse.hpp"
#include "ilukit/symbolic.hpp"

namespace ilukit::detail {

/// Per-worker scratch arena, reused across tasks so that a worker never
/// allocates inside the factorization loop.
struct Workspace {
    std::vector<std::int32_t> pos;     // column -> row-local entry index
    std::vector<std::uint32_t> stamp;  // pos[c] valid iff stamp[c] == generation
    std::uint32_t generation = 0;
    std::vector<std::int32_t> next;    // symbolic: linked row pattern, sentinel == n
    std::vector<level_t> lvl;
    std::vector<std::int32_t> tmp_cols;

    void ensure(std::int32_t n);
    std::uint32_t fresh();
};

// ---------------------------------------------------------------------------
// Symbolic phase
// ---------------------------------------------------------------------------

/// Growable row-major pattern under construction. Each row remembers the
/// pivot column limit it has been merged up to, so a row can be reduced in
/// several partial steps.
struct SymbolicRows {
    std::int32_t n = 0;
    int k = 0;
    std::vector<std::vector<std::int32_t>> cols;
    std::vector<std::vector<level_t>> lvls;
    std::vector<std::int32_t> merge_limit;

    void init(std::int32_t n_, int k_);
    /// Row pattern of A plus the diagonal, all at level 0.
    void init_row(const SparseMatrixCsr& a, std::int32_t j);
};

/// Merges pivot rows with column in [rows.merge_limit[j], min(limit, j))
/// into row j, in ascending pivot order, inserting fill whose level weight
/// stays within k. Pivot rows must be final.
void symbolic_merge_row(SymbolicRows& rows, std::int32_t j, std::int32_t limit, Workspace& ws);

/// One-shot row computation for k <= 1, which depends only on the pattern
/// of A and can run for any row in any order.
void symbolic_row_small_k(const SparseMatrixCsr& a, std::int32_t j, int k, SymbolicRows& rows,
                          Workspace& ws);

FillPattern finalize_pattern(SymbolicRows&& rows);

// ---------------------------------------------------------------------------
// Numeric phase
// ---------------------------------------------------------------------------

/// Value storage over the pattern, initialized from A (positions absent in A
/// start at zero).
FilledMatrix make_filled(const SparseMatrixCsr& a, const FillPattern& pattern);

/// Applies pivot rows with column < limit to row j, resuming after the
/// `applied` lower entries already consumed. Returns the new applied count
/// and counts one divide per pivot plus one multiply per updated position.
std::int32_t reduce_row(FilledMatrix& f, std::int32_t j, std::int32_t applied, std::int32_t limit,
                        Workspace& ws, std::uint64_t& fpa);

/// Same reduction, additionally maintaining the lower-inverse coefficients
/// in `linv` (strictly-lower pattern plus unit diagonal; see inverse.hpp).
/// Coefficient updates are restricted to stored positions.
std::int32_t reduce_row_with_inverse(FilledMatrix& f, SparseMatrixCsr& linv, std::int32_t j,
                                     std::int32_t applied, std::int32_t limit, Workspace& ws,
                                     FpaCount& fpa);

/// Pivot check once row j is fully reduced; perturbs or throws BreakdownError.
void settle_pivot(FilledMatrix& f, std::int32_t j, const NumericOptions& opt);

} // namespace ilukit::detail

#endif // ILUKIT_SRC_KERNELS_HPP
