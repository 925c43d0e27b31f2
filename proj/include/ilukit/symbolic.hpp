/// @file symbolic.hpp
/// @brief Level-controlled symbolic factorization: computes the permitted
///        fill pattern and per-entry levels for ILU(k).

#ifndef ILUKIT_SYMBOLIC_HPP
#define ILUKIT_SYMBOLIC_HPP

#include <cstdint>
#include <vector>

#include "ilukit/sparse.hpp"

namespace ilukit {

/// Entry levels are stored in one byte and saturate at 255. Original entries
/// have level 0; a fill candidate gets min over h of level(i,h)+level(h,j)+1
/// and is admitted only when that weight is <= k, so every stored level is
/// within [0, k] for any practical limit.
using level_t = std::uint8_t;

inline level_t level_saturating_add(level_t a, level_t b) {
    const unsigned w = unsigned(a) + unsigned(b) + 1u;
    return static_cast<level_t>(w > 255u ? 255u : w);
}

/// Permitted entry positions with their levels, in CSR layout. The diagonal
/// is present in every row: structurally missing diagonals of A are inserted
/// at level 0 so that numeric factorization always has a pivot slot.
struct FillPattern {
    std::int32_t n = 0;
    int k = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col_idx;
    std::vector<level_t> levels;
    std::vector<std::int64_t> diag_pos; ///< index of (i,i) within col_idx, per row

    std::int64_t entry_count() const { return row_ptr.empty() ? 0 : row_ptr.back(); }

    bool operator==(const FillPattern& o) const {
        return n == o.n && k == o.k && row_ptr == o.row_ptr && col_idx == o.col_idx &&
               levels == o.levels;
    }
};

/// Phase I of ILU(k): rows are processed top-down; row j is merged with each
/// permitted pivot row i < j in ascending order, admitting fill whose level
/// weight stays within k.
FillPattern symbolic_factor(const SparseMatrixCsr& a, int k);

/// Specialized k = 1 symbolic factorization. Fill of level 1 never causes
/// further fill within the limit, so each row depends only on the original
/// pattern of A and rows can be computed independently in any order. The
/// result is identical to symbolic_factor(a, 1).
FillPattern symbolic_factor_k1(const SparseMatrixCsr& a);

} // namespace ilukit

#endif // ILUKIT_SYMBOLIC_HPP
