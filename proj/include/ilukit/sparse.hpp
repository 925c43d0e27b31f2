/// @file sparse.hpp
/// @brief CSR sparse matrix storage, Matrix Market I/O, stencil generation,
///        and the elementary vector kernels shared by the whole toolkit.

#ifndef ILUKIT_SPARSE_HPP
#define ILUKIT_SPARSE_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilukit {

using Vector = std::vector<double>;

/// Square sparse matrix in compressed-sparse-row form. Immutable by
/// convention once built: every producer returns a fully formed matrix and
/// no routine mutates one in place.
///
/// Invariants: row_ptr has n+1 non-decreasing offsets with row_ptr[0] == 0;
/// column indices are strictly ascending within each row and lie in [0, n).
struct SparseMatrixCsr {
    std::int32_t n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;

    std::int64_t nnz() const { return row_ptr.empty() ? 0 : row_ptr.back(); }
};

/// Thrown on malformed Matrix Market input; `line` is the 1-based offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::int64_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::int64_t line() const { return line_; }

private:
    std::int64_t line_;
};

/// Parses a Matrix Market "coordinate" stream (real or pattern field,
/// general or symmetric storage). Symmetric storage is expanded to full
/// storage; pattern entries get the value 1.0. Indices are converted from
/// the format's 1-based convention to 0-based.
SparseMatrixCsr parse_matrix_market(std::istream& in);
SparseMatrixCsr read_matrix_market_file(const std::string& path);

/// Writes coordinate/real/general Matrix Market with full value precision,
/// so that parse(write(M)) reproduces M bit for bit.
void write_matrix_market(const SparseMatrixCsr& m, std::ostream& out);
void write_matrix_market_file(const SparseMatrixCsr& m, const std::string& path);

/// Builds the 27-point Laplacian on a g x g x g grid: one row per cell,
/// diagonal 26, -1 for every neighbour in the surrounding 3x3x3 cube that
/// falls inside the grid. Matrix dimension is g^3.
SparseMatrixCsr gen_stencil_27pt(std::int32_t g);

/// y = A * v, rows processed independently, left-to-right accumulation per
/// row. `threads` splits the rows into contiguous chunks; per-row arithmetic
/// is unchanged, so the result is identical for any thread count.
Vector spmv(const SparseMatrixCsr& a, const Vector& v);
void spmv_into(const SparseMatrixCsr& a, const Vector& v, Vector& out, int threads = 1);

double dot(const Vector& u, const Vector& v);
double norm2(const Vector& v);
/// y += a * x
void axpy(double a, const Vector& x, Vector& y);

} // namespace ilukit

#endif // ILUKIT_SPARSE_HPP
