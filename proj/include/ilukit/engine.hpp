/// @file engine.hpp
/// @brief Task-parallel factorization driver: band partitioning with static
///        round-robin ownership, frontier-gated scheduling that reproduces
///        the sequential arithmetic bit for bit, and a deterministic
///        simulation of the ring-broadcast message schedule.

#ifndef ILUKIT_ENGINE_HPP
#define ILUKIT_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "ilukit/numeric.hpp"
#include "ilukit/sparse.hpp"
#include "ilukit/symbolic.hpp"

namespace ilukit {

/// Contiguous bands of rows, sizes differing by at most one, assigned to
/// workers round-robin. With B = floor(n / band_size) bands (at least one),
/// the first n mod B bands carry one extra row.
struct BandPartition {
    std::int32_t n = 0;
    std::int32_t nominal_band_size = 0;
    int workers = 1;
    std::vector<std::int64_t> band_start; ///< bands()+1 offsets

    int bands() const { return static_cast<int>(band_start.size()) - 1; }
    std::int64_t band_begin(int b) const { return band_start[b]; }
    std::int64_t band_end(int b) const { return band_start[b + 1]; }
    int worker_of(int b) const { return b % workers; }
    int band_of_row(std::int64_t row) const;
};

BandPartition partition_bands(std::int32_t n, std::int32_t band_size, int workers);

/// Observability hooks filled in by the parallel drivers.
struct EngineStats {
    std::vector<std::int64_t> frontier_history; ///< completed-row count after each publication
    std::vector<int> publication_order;         ///< band ids in completion order
    double symbolic_seconds = 0;
    double numeric_seconds = 0;
    double inverse_seconds = 0;
};

enum class SweepDirection { forward, backward };

/// Callbacks one factorization phase plugs into the banded runner.
/// `done_rows` counts rows already completed at the sweep origin (top for a
/// forward sweep, bottom for a backward one); it is the pivot availability
/// the partial step may consume. `complete` runs when every band before this
/// one (in sweep order) has been published, and must finish the band.
struct BandCallbacks {
    std::function<void(int band, std::int64_t done_rows, int worker)> partial;
    std::function<void(int band, int worker)> complete;
};

/// Runs one banded sweep with part.workers worker threads. Bands publish in
/// strict sweep order through a monotone frontier counter with
/// release/acquire ordering; waiting workers partially reduce their own
/// pending bands in the meantime. An exception thrown by `complete` stops
/// the sweep; the remaining workers drain and the exception is rethrown.
void run_banded(const BandPartition& part, SweepDirection dir, const BandCallbacks& cb,
                EngineStats* stats = nullptr);

/// Runs a task per band with no ordering constraints or communication
/// (used by the independent-row symbolic phase for k <= 1).
void run_independent(const BandPartition& part,
                     const std::function<void(int band, int worker)>& task);

/// Phase I only, band-parallel. Bit-identical to symbolic_factor(a, k).
FillPattern parallel_symbolic(const SparseMatrixCsr& a, int k, int workers,
                              std::int32_t band_size, EngineStats* stats = nullptr);

/// Phase II only, band-parallel over a final pattern. Bit-identical to
/// numeric_factor(a, pattern).
NumericResult parallel_numeric(const SparseMatrixCsr& a, const FillPattern& pattern, int workers,
                               std::int32_t band_size, const NumericOptions& opt = {},
                               EngineStats* stats = nullptr);

struct ParallelFactorResult {
    FillPattern pattern;
    FilledMatrix f;
    FpaCount fpa;
};

/// Both phases under the same band partition. The result (pattern, values,
/// and operation counts) is bit-identical to the sequential factorization
/// for every worker count and band size.
ParallelFactorResult parallel_factor(const SparseMatrixCsr& a, int k, int workers,
                                     std::int32_t band_size, const NumericOptions& opt = {},
                                     EngineStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Ring-broadcast schedule simulation
// ---------------------------------------------------------------------------

struct PipelineMessage {
    std::int64_t timestep;
    int sender;
    int receiver;
    int band;
};

struct PipelineTrace {
    int nodes = 0;
    int bands = 0;
    std::vector<PipelineMessage> messages;
};

/// Deterministic discrete-time simulation of the band broadcast over a
/// directed ring of nodes. Band b originates at node b mod nodes once the
/// node holds every earlier band and has dispatched its previous own
/// message; each node forwards one message per timestep to its successor
/// until all nodes hold a copy. Every band therefore crosses exactly
/// nodes-1 links.
PipelineTrace pipeline_simulate(int bands, int nodes);

} // namespace ilukit

#endif // ILUKIT_ENGINE_HPP
