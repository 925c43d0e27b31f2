/// @file driver.hpp
/// @brief Command-line driver logic: run specifications, report emission,
///        and exit-code mapping. Kept out of main() so it can be tested
///        directly.

#ifndef ILUKIT_DRIVER_HPP
#define ILUKIT_DRIVER_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ilukit {

/// Exit codes, one per documented failure class.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_input_error = 2,
    exit_breakdown = 3,
    exit_not_converged = 4,
};

struct RunSpec {
    enum class Command { solve, bench, stencil, pipeline_sim };
    Command command = Command::solve;

    std::string matrix_path; ///< mutually exclusive with grid
    std::int32_t grid = 0;

    int k = 1;
    int threads = 0;            ///< 0: ILUKIT_THREADS from the environment, else 1
    std::int64_t band_size = 0; ///< 0: max(16, n/(8w)) rounded to nearest
    std::string method = "auto"; ///< base | iilu | auto
    double rtol = 1e-8;
    int max_iters = 1000;
    int failfast_window = 10;
    double failfast_growth = 10.0;
    bool perturb_pivots = false;

    std::vector<int> bench_k;       ///< bench: level sweep (default {k})
    std::vector<int> bench_threads; ///< bench: worker sweep (default {resolved threads})

    int sim_bands = 0;
    int sim_nodes = 0;

    std::string out_path; ///< report destination; for stencil, the matrix destination
    bool structured = false;
};

/// Executes the spec, writes the report to `out` (or spec.out_path when
/// set), diagnostics to `err`, and returns the exit code.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

} // namespace ilukit

#endif // ILUKIT_DRIVER_HPP
