#include "ilukit/sparse.hpp"

#include <cmath>
#include <thread>

namespace ilukit {

void spmv_into(const SparseMatrixCsr& a, const Vector& v, Vector& out, int threads) {
    if (static_cast<std::int64_t>(v.size()) != a.n)
        throw std::invalid_argument("spmv: vector length does not match matrix dimension");
    out.resize(v.size());

    auto rows = [&](std::int32_t lo, std::int32_t hi) {
        for (std::int32_t i = lo; i < hi; ++i) {
            double sum = 0.0;
            for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e)
                sum += a.values[e] * v[a.col_idx[e]];
            out[i] = sum;
        }
    };

    if (threads <= 1 || a.n < 2 * threads) {
        rows(0, a.n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::int32_t chunk = (a.n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int32_t lo = t * chunk;
        const std::int32_t hi = std::min<std::int32_t>(a.n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(rows, lo, hi);
    }
    for (auto& th : pool) th.join();
}

Vector spmv(const SparseMatrixCsr& a, const Vector& v) {
    Vector out;
    spmv_into(a, v, out);
    return out;
}

double dot(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw std::invalid_argument("dot: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
    return sum;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

void axpy(double a, const Vector& x, Vector& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

} // namespace ilukit
