#include "ilukit/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "kernels.hpp"

namespace ilukit {

namespace {

// Partial reductions on bands beyond a worker's first pending one are
// batched: they are optional work, and rescattering a band for a handful of
// new pivots is not worth it.
constexpr std::int64_t kPartialBatchRows = 256;
constexpr std::size_t kPartialLookahead = 4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int BandPartition::band_of_row(std::int64_t row) const {
    const auto it = std::upper_bound(band_start.begin(), band_start.end(), row);
    return static_cast<int>(it - band_start.begin()) - 1;
}

BandPartition partition_bands(std::int32_t n, std::int32_t band_size, int workers) {
    if (n < 1) throw std::invalid_argument("partition_bands: n must be >= 1");
    if (band_size < 1) throw std::invalid_argument("partition_bands: band_size must be >= 1");
    if (workers < 1) throw std::invalid_argument("partition_bands: workers must be >= 1");

    BandPartition p;
    p.n = n;
    p.nominal_band_size = band_size;
    p.workers = workers;
    const int bands = std::max(1, n / band_size);
    const std::int32_t base = n / bands;
    const std::int32_t extra = n % bands;
    p.band_start.resize(bands + 1);
    p.band_start[0] = 0;
    for (int b = 0; b < bands; ++b)
        p.band_start[b + 1] = p.band_start[b] + base + (b < extra ? 1 : 0);
    return p;
}

void run_banded(const BandPartition& part, SweepDirection dir, const BandCallbacks& cb,
                EngineStats* stats) {
    const int nb = part.bands();
    const int workers = part.workers;

    // Bands in completion order plus row prefix sums in that order.
    std::vector<int> seq(nb);
    for (int s = 0; s < nb; ++s) seq[s] = dir == SweepDirection::forward ? s : nb - 1 - s;
    std::vector<std::int64_t> start(nb + 1, 0);
    for (int s = 0; s < nb; ++s)
        start[s + 1] = start[s] + (part.band_end(seq[s]) - part.band_begin(seq[s]));

    std::atomic<std::int64_t> done{0};
    std::atomic<bool> failed{false};
    std::mutex wake_mutex;
    std::condition_variable wake;
    std::mutex record_mutex;
    std::exception_ptr first_error;

    auto worker_fn = [&](int w) {
        std::vector<int> mine;
        for (int s = 0; s < nb; ++s)
            if (part.worker_of(seq[s]) == w) mine.push_back(s);
        std::vector<std::int64_t> partial_done(mine.size(), 0);

        try {
            std::size_t idx = 0;
            while (idx < mine.size()) {
                if (failed.load(std::memory_order_acquire)) return;
                const int s = mine[idx];
                const std::int64_t d = done.load(std::memory_order_acquire);
                if (d == start[s]) {
                    cb.complete(seq[s], w);
                    done.store(start[s + 1], std::memory_order_release);
                    if (stats) {
                        std::lock_guard<std::mutex> lg(record_mutex);
                        stats->frontier_history.push_back(start[s + 1]);
                        stats->publication_order.push_back(seq[s]);
                    }
                    { std::lock_guard<std::mutex> lg(wake_mutex); }
                    wake.notify_all();
                    ++idx;
                    continue;
                }

                bool progressed = false;
                if (cb.partial) {
                    for (std::size_t l = idx; l < mine.size() && l < idx + kPartialLookahead;
                         ++l) {
                        const bool first_pending = l == idx;
                        if (partial_done[l] < d &&
                            (first_pending || d - partial_done[l] >= kPartialBatchRows)) {
                            cb.partial(seq[mine[l]], d, w);
                            partial_done[l] = d;
                            progressed = true;
                        }
                    }
                }
                if (!progressed) {
                    for (int spin = 0; spin < 64; ++spin) {
                        if (done.load(std::memory_order_acquire) != d ||
                            failed.load(std::memory_order_acquire))
                            break;
                        std::this_thread::yield();
                    }
                    std::unique_lock<std::mutex> lk(wake_mutex);
                    wake.wait_for(lk, std::chrono::milliseconds(20), [&] {
                        return done.load(std::memory_order_acquire) != d ||
                               failed.load(std::memory_order_acquire);
                    });
                }
            }
        } catch (...) {
            {
                std::lock_guard<std::mutex> lg(record_mutex);
                if (!first_error) first_error = std::current_exception();
            }
            failed.store(true, std::memory_order_release);
            { std::lock_guard<std::mutex> lg(wake_mutex); }
            wake.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void run_independent(const BandPartition& part,
                     const std::function<void(int band, int worker)>& task) {
    std::atomic<bool> failed{false};
    std::mutex record_mutex;
    std::exception_ptr first_error;
    auto worker_fn = [&](int w) {
        try {
            for (int b = w; b < part.bands(); b += part.workers) {
                if (failed.load(std::memory_order_acquire)) return;
                task(b, w);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lg(record_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true, std::memory_order_release);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(part.workers);
    for (int w = 0; w < part.workers; ++w) pool.emplace_back(worker_fn, w);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

FillPattern parallel_symbolic(const SparseMatrixCsr& a, int k, int workers,
                              std::int32_t band_size, EngineStats* stats) {
    if (k < 0) throw std::invalid_argument("level limit must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();
    const BandPartition part = partition_bands(a.n, band_size, workers);

    detail::SymbolicRows rows;
    rows.init(a.n, k);
    std::vector<detail::Workspace> ws(workers);

    if (k <= 1) {
        // Fill of level 1 never causes further admissible fill, so each row
        // depends only on A and the rows need no coordination at all.
        run_independent(part, [&](int b, int w) {
            ws[w].ensure(a.n);
            for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j)
                detail::symbolic_row_small_k(a, static_cast<std::int32_t>(j), k, rows, ws[w]);
        });
    } else {
        std::vector<char> band_ready(part.bands(), 0);
        auto prepare = [&](int b) {
            if (band_ready[b]) return;
            for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j)
                rows.init_row(a, static_cast<std::int32_t>(j));
            band_ready[b] = 1;
        };
        BandCallbacks cb;
        cb.partial = [&](int b, std::int64_t done_rows, int w) {
            ws[w].ensure(a.n);
            prepare(b);
            const auto limit = static_cast<std::int32_t>(done_rows);
            for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j)
                detail::symbolic_merge_row(rows, static_cast<std::int32_t>(j), limit, ws[w]);
        };
        cb.complete = [&](int b, int w) {
            ws[w].ensure(a.n);
            prepare(b);
            for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j) {
                const auto row = static_cast<std::int32_t>(j);
                detail::symbolic_merge_row(rows, row, row, ws[w]);
            }
        };
        run_banded(part, SweepDirection::forward, cb, stats);
    }

    FillPattern pattern = detail::finalize_pattern(std::move(rows));
    if (stats) stats->symbolic_seconds += seconds_since(t0);
    return pattern;
}

NumericResult parallel_numeric(const SparseMatrixCsr& a, const FillPattern& pattern, int workers,
                               std::int32_t band_size, const NumericOptions& opt,
                               EngineStats* stats) {
    const auto t0 = std::chrono::steady_clock::now();
    const BandPartition part = partition_bands(a.n, band_size, workers);

    NumericResult r;
    r.f = detail::make_filled(a, pattern);
    std::vector<detail::Workspace> ws(workers);
    std::vector<FpaCount> fpa(workers);
    std::vector<std::int32_t> applied(a.n, 0);

    BandCallbacks cb;
    cb.partial = [&](int b, std::int64_t done_rows, int w) {
        ws[w].ensure(a.n);
        const auto limit = static_cast<std::int32_t>(done_rows);
        for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j)
            applied[j] = detail::reduce_row(r.f, static_cast<std::int32_t>(j), applied[j], limit,
                                            ws[w], fpa[w].factor);
    };
    cb.complete = [&](int b, int w) {
        ws[w].ensure(a.n);
        for (std::int64_t j = part.band_begin(b); j < part.band_end(b); ++j) {
            const auto row = static_cast<std::int32_t>(j);
            applied[j] = detail::reduce_row(r.f, row, applied[j], row, ws[w], fpa[w].factor);
            detail::settle_pivot(r.f, row, opt);
        }
    };
    run_banded(part, SweepDirection::forward, cb, stats);

    for (const FpaCount& c : fpa) {
        r.fpa.factor += c.factor;
        r.fpa.inverse += c.inverse;
    }
    if (stats) stats->numeric_seconds += seconds_since(t0);
    return r;
}

ParallelFactorResult parallel_factor(const SparseMatrixCsr& a, int k, int workers,
                                     std::int32_t band_size, const NumericOptions& opt,
                                     EngineStats* stats) {
    ParallelFactorResult r;
    r.pattern = parallel_symbolic(a, k, workers, band_size, stats);
    NumericResult num = parallel_numeric(a, r.pattern, workers, band_size, opt, stats);
    r.f = std::move(num.f);
    r.fpa = num.fpa;
    return r;
}

// ---------------------------------------------------------------------------
// Ring-broadcast schedule simulation
// ---------------------------------------------------------------------------

namespace {

struct RingMessage {
    int band;
    int hops;     // links crossed so far
    bool origin;  // queued by the band's owner rather than forwarded
};

} // namespace

PipelineTrace pipeline_simulate(int bands, int nodes) {
    if (bands < 1) throw std::invalid_argument("pipeline_simulate: bands must be >= 1");
    if (nodes < 1) throw std::invalid_argument("pipeline_simulate: nodes must be >= 1");

    PipelineTrace trace;
    trace.nodes = nodes;
    trace.bands = bands;

    std::vector<std::deque<RingMessage>> queue(nodes);
    std::vector<std::vector<char>> holds(nodes, std::vector<char>(bands, 0));
    std::vector<char> own_message_queued(nodes, 0);
    int next_band = 0;

    auto run_completions = [&] {
        while (next_band < bands) {
            const int owner = next_band % nodes;
            bool ready = !own_message_queued[owner];
            for (int b = 0; ready && b < next_band; ++b) ready = holds[owner][b];
            if (!ready) break;
            holds[owner][next_band] = 1;
            if (nodes > 1) {
                queue[owner].push_back({next_band, 0, true});
                own_message_queued[owner] = 1;
            }
            ++next_band;
        }
    };

    run_completions();
    std::int64_t t = 0;
    auto pending = [&] {
        for (const auto& q : queue)
            if (!q.empty()) return true;
        return false;
    };
    while (pending()) {
        ++t;
        // Send phase: one message per node per timestep, to its successor.
        std::vector<std::pair<int, RingMessage>> deliveries;
        for (int node = 0; node < nodes; ++node) {
            if (queue[node].empty()) continue;
            RingMessage m = queue[node].front();
            queue[node].pop_front();
            if (m.origin) own_message_queued[node] = 0;
            const int succ = (node + 1) % nodes;
            trace.messages.push_back({t, node, succ, m.band});
            deliveries.emplace_back(succ, RingMessage{m.band, m.hops + 1, false});
        }
        // Deliver phase: receivers forward unless the ring is covered.
        for (const auto& [node, m] : deliveries) {
            holds[node][m.band] = 1;
            if (m.hops < nodes - 1) queue[node].push_back(m);
        }
        run_completions();
    }
    return trace;
}

} // namespace ilukit
