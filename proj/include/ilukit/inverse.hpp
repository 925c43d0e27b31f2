/// @file inverse.hpp
/// @brief Level-truncated approximate inverses of the triangular factors,
///        computed alongside the factorization so each preconditioner
///        application becomes two sparse matrix-vector products.

#ifndef ILUKIT_INVERSE_HPP
#define ILUKIT_INVERSE_HPP

#include <cstdint>

#include "ilukit/engine.hpp"
#include "ilukit/numeric.hpp"
#include "ilukit/sparse.hpp"
#include "ilukit/symbolic.hpp"

namespace ilukit {

/// Truncated inverses restricted to the fill pattern's positions:
/// lower_inv approximates the inverse of the unit-lower factor (unit
/// diagonal stored explicitly), upper_inv the inverse of the upper factor
/// (reciprocal diagonals stored explicitly). Applying both is a plain spmv
/// pair.
struct IncompleteInversePair {
    SparseMatrixCsr lower_inv;
    SparseMatrixCsr upper_inv;
    std::int32_t n() const { return lower_inv.n; }
};

struct InverseFactorResult {
    FilledMatrix f;
    IncompleteInversePair inv;
    FpaCount fpa;
};

/// Numeric factorization combined with the inverse-coefficient recurrences,
/// run under the band engine. The forward sweep augments each pivot
/// application with updates to the lower-inverse coefficients at stored
/// positions; a backward band sweep then builds the upper inverse row by
/// row from the bottom. The FilledMatrix comes out bit-identical to
/// parallel_factor's, and the whole result is bit-identical across worker
/// counts and band sizes.
InverseFactorResult factor_with_inverse(const SparseMatrixCsr& a, const FillPattern& pattern,
                                        int workers, std::int32_t band_size,
                                        const NumericOptions& opt = {},
                                        EngineStats* stats = nullptr);

/// x = upper_inv * (lower_inv * b). Rows are independent; `threads` chunks
/// them without changing per-row arithmetic.
Vector apply_iilu(const IncompleteInversePair& pair, const Vector& b, int threads = 1);

} // namespace ilukit

#endif // ILUKIT_INVERSE_HPP
