/// @file numeric.hpp
/// @brief Phase II of ILU(k): value computation over a fixed fill pattern,
///        substitution-based triangular solves, and the floating-point
///        operation counter.

#ifndef ILUKIT_NUMERIC_HPP
#define ILUKIT_NUMERIC_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilukit/sparse.hpp"
#include "ilukit/symbolic.hpp"

namespace ilukit {

/// Tally of floating-point multiplies and divides spent in preconditioner
/// construction. `factor` covers the base factorization path; `inverse`
/// covers the extra work for incomplete-inverse coefficients. Both are
/// deterministic functions of (A, k) — identical across runs, worker counts,
/// and band sizes.
struct FpaCount {
    std::uint64_t factor = 0;
    std::uint64_t inverse = 0;
    std::uint64_t total() const { return factor + inverse; }
    bool operator==(const FpaCount&) const = default;
};

/// Raised when a pivot magnitude falls below the breakdown threshold.
class BreakdownError : public std::runtime_error {
public:
    BreakdownError(std::int32_t row, const std::string& what)
        : std::runtime_error(what), row_(row) {}
    std::int32_t row() const { return row_; }

private:
    std::int32_t row_;
};

struct NumericOptions {
    double pivot_threshold = 1e-300;
    /// When set, a pivot below the threshold is replaced by
    /// sign(pivot) * perturb_epsilon * max|row| instead of erroring.
    bool perturb_zero_pivot = false;
    double perturb_epsilon = 1e-10;
};

/// The filled matrix F: unit-lower factor (diagonal implicit) strictly below
/// the diagonal, upper factor on and above it, over exactly the positions of
/// the FillPattern it was built from.
struct FilledMatrix {
    std::int32_t n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int64_t> diag_pos;
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;

    std::int64_t entry_count() const { return row_ptr.empty() ? 0 : row_ptr.back(); }
    std::int32_t lower_count(std::int32_t i) const {
        return static_cast<std::int32_t>(diag_pos[i] - row_ptr[i]);
    }
    double diag_value(std::int32_t i) const { return values[diag_pos[i]]; }
};

struct NumericResult {
    FilledMatrix f;
    FpaCount fpa;
};

/// Reduces each row j by the pivot rows i < j of the pattern in ascending
/// order; the lower entry is divided by the pivot diagonal at the moment the
/// pivot row is applied. This order is the canonical arithmetic order that
/// the task-parallel engine reproduces bit for bit.
NumericResult numeric_factor(const SparseMatrixCsr& a, const FillPattern& pattern,
                             const NumericOptions& opt = {});

/// Solves L*U*y = b by forward substitution in ascending row order followed
/// by backward substitution in descending row order.
Vector triangular_solve(const FilledMatrix& f, const Vector& b);

} // namespace ilukit

#endif // ILUKIT_NUMERIC_HPP
