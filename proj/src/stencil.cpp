#include "ilukit/sparse.hpp"

namespace ilukit {

SparseMatrixCsr gen_stencil_27pt(std::int32_t g) {
    if (g < 1) throw std::invalid_argument("grid edge length must be >= 1");
    const std::int64_t n64 = static_cast<std::int64_t>(g) * g * g;
    if (n64 > INT32_MAX) throw std::invalid_argument("grid too large");
    const auto n = static_cast<std::int32_t>(n64);

    SparseMatrixCsr m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);

    // Iterating (dz, dy, dx) lexicographically yields ascending neighbour
    // indices, so rows come out sorted without a separate pass.
    std::int64_t count = 0;
    for (std::int32_t z = 0; z < g; ++z)
        for (std::int32_t y = 0; y < g; ++y)
            for (std::int32_t x = 0; x < g; ++x) {
                std::int32_t deg = 0;
                for (std::int32_t dz = -1; dz <= 1; ++dz) {
                    if (z + dz < 0 || z + dz >= g) continue;
                    for (std::int32_t dy = -1; dy <= 1; ++dy) {
                        if (y + dy < 0 || y + dy >= g) continue;
                        for (std::int32_t dx = -1; dx <= 1; ++dx) {
                            if (x + dx < 0 || x + dx >= g) continue;
                            ++deg;
                        }
                    }
                }
                const std::int64_t row = (static_cast<std::int64_t>(z) * g + y) * g + x;
                m.row_ptr[row + 1] = deg;
                count += deg;
            }
    for (std::int32_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];

    m.col_idx.resize(count);
    m.values.resize(count);
    for (std::int32_t z = 0; z < g; ++z)
        for (std::int32_t y = 0; y < g; ++y)
            for (std::int32_t x = 0; x < g; ++x) {
                const std::int64_t row = (static_cast<std::int64_t>(z) * g + y) * g + x;
                std::int64_t e = m.row_ptr[row];
                for (std::int32_t dz = -1; dz <= 1; ++dz) {
                    if (z + dz < 0 || z + dz >= g) continue;
                    for (std::int32_t dy = -1; dy <= 1; ++dy) {
                        if (y + dy < 0 || y + dy >= g) continue;
                        for (std::int32_t dx = -1; dx <= 1; ++dx) {
                            if (x + dx < 0 || x + dx >= g) continue;
                            const std::int64_t col =
                                (static_cast<std::int64_t>(z + dz) * g + (y + dy)) * g + (x + dx);
                            m.col_idx[e] = static_cast<std::int32_t>(col);
                            m.values[e] = (col == row) ? 26.0 : -1.0;
                            ++e;
                        }
                    }
                }
            }
    return m;
}

} // namespace ilukit
