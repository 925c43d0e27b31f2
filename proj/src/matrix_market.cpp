#include "ilukit/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ilukit {
namespace {

std::string to_lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool next_line(std::istream& in, std::string& line, std::int64_t& lineno) {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

struct Coord {
    std::int32_t row;
    std::int32_t col;
    double value;
    std::int64_t line;
};

SparseMatrixCsr assemble(std::int32_t n, std::vector<Coord>& entries) {
    std::sort(entries.begin(), entries.end(), [](const Coord& a, const Coord& b) {
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    for (std::size_t e = 1; e < entries.size(); ++e) {
        if (entries[e].row == entries[e - 1].row && entries[e].col == entries[e - 1].col) {
            throw ParseError(entries[e].line, "duplicate coordinate (" +
                                                  std::to_string(entries[e].row + 1) + ", " +
                                                  std::to_string(entries[e].col + 1) + ")");
        }
    }

    SparseMatrixCsr m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    m.col_idx.resize(entries.size());
    m.values.resize(entries.size());
    for (const Coord& c : entries) ++m.row_ptr[static_cast<std::size_t>(c.row) + 1];
    for (std::int32_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    for (std::size_t e = 0; e < entries.size(); ++e) {
        m.col_idx[e] = entries[e].col;
        m.values[e] = entries[e].value;
    }
    return m;
}

} // namespace

SparseMatrixCsr parse_matrix_market(std::istream& in) {
    std::string line;
    std::int64_t lineno = 0;

    if (!next_line(in, line, lineno)) throw ParseError(1, "empty input");

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError(lineno, "missing %%MatrixMarket banner");
    object = to_lower(object);
    format = to_lower(format);
    field = to_lower(field);
    symmetry = to_lower(symmetry);
    if (object != "matrix") throw ParseError(lineno, "unsupported object '" + object + "'");
    if (format != "coordinate") throw ParseError(lineno, "unsupported format '" + format + "'");
    if (field != "real" && field != "pattern")
        throw ParseError(lineno, "unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");

    const bool pattern = field == "pattern";
    const bool symmetric = symmetry == "symmetric";

    // Size line, skipping comments and blanks.
    std::int64_t rows = -1, cols = -1, declared = -1;
    while (next_line(in, line, lineno)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream sz(line);
        if (!(sz >> rows >> cols >> declared)) throw ParseError(lineno, "malformed size line");
        break;
    }
    if (rows < 0) throw ParseError(lineno, "missing size line");
    if (rows != cols)
        throw ParseError(lineno, "matrix is not square (" + std::to_string(rows) + " x " +
                                     std::to_string(cols) + ")");
    if (rows > INT32_MAX) throw ParseError(lineno, "dimension too large");
    const auto n = static_cast<std::int32_t>(rows);

    std::vector<Coord> entries;
    entries.reserve(static_cast<std::size_t>(std::max<std::int64_t>(declared, 0)) *
                    (symmetric ? 2 : 1));
    std::int64_t seen = 0;
    while (next_line(in, line, lineno)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream es(line);
        std::int64_t i = 0, j = 0;
        double v = 1.0;
        if (!(es >> i >> j)) throw ParseError(lineno, "malformed entry");
        if (!pattern && !(es >> v)) throw ParseError(lineno, "entry is missing a value");
        if (i < 1 || i > n || j < 1 || j > n)
            throw ParseError(lineno, "index out of range (" + std::to_string(i) + ", " +
                                         std::to_string(j) + ")");
        const auto r = static_cast<std::int32_t>(i - 1);
        const auto c = static_cast<std::int32_t>(j - 1);
        entries.push_back({r, c, v, lineno});
        if (symmetric && r != c) entries.push_back({c, r, v, lineno});
        ++seen;
    }
    if (seen != declared)
        throw ParseError(lineno, "expected " + std::to_string(declared) + " entries, found " +
                                     std::to_string(seen));

    return assemble(n, entries);
}

SparseMatrixCsr read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_matrix_market(in);
}

void write_matrix_market(const SparseMatrixCsr& m, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.n << " " << m.n << " " << m.nnz() << "\n";
    char buf[64];
    for (std::int32_t i = 0; i < m.n; ++i) {
        for (std::int64_t e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e) {
            // %.17g survives a text round trip without losing bits.
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, m.col_idx[e] + 1, m.values[e]);
            out << buf;
        }
    }
}

void write_matrix_market_file(const SparseMatrixCsr& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix_market(m, out);
}

} // namespace ilukit
