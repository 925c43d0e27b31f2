// ilukit command-line driver: problem generation, preconditioned solves,
// benchmarks, and the broadcast-schedule simulator.

#include <iostream>

#include <CLI11.hpp>

#include "ilukit/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ilukit: level-controlled ILU preconditioning with a task-parallel "
                 "factorization engine and BiCGSTAB"};
    app.require_subcommand(1);

    ilukit::RunSpec spec;

    auto add_matrix_opts = [&](CLI::App* cmd) {
        cmd->add_option("--matrix", spec.matrix_path, "Matrix Market input file");
        cmd->add_option("--grid", spec.grid, "generate the 27-point stencil on a g^3 grid");
    };
    auto add_solver_opts = [&](CLI::App* cmd) {
        cmd->add_option("--k", spec.k, "fill level limit (default 1)");
        cmd->add_option("--threads,-t", spec.threads,
                        "worker threads (default: ILUKIT_THREADS or 1)");
        cmd->add_option("--band-size", spec.band_size,
                        "rows per band (default: max(16, n/(8 w)))");
        cmd->add_option("--method", spec.method, "base | iilu | auto (default auto)");
        cmd->add_option("--rtol", spec.rtol, "relative residual tolerance (default 1e-8)");
        cmd->add_option("--max-iters", spec.max_iters, "iteration cap (default 1000)");
        cmd->add_option("--failfast-window", spec.failfast_window,
                        "iterations granted to the inverse attempt (default 10)");
        cmd->add_option("--failfast-growth", spec.failfast_growth,
                        "residual growth treated as divergence (default 10)");
        cmd->add_flag("--perturb-pivots", spec.perturb_pivots,
                      "replace near-zero pivots instead of failing");
    };
    auto add_report_opts = [&](CLI::App* cmd) {
        cmd->add_option("--out,-o", spec.out_path, "write the report to a file");
        cmd->add_flag_callback(
            "--structured", [&] { spec.structured = true; },
            "machine-readable key = value report");
        cmd->add_flag_callback(
            "--human", [&] { spec.structured = false; },
            "human-readable report (default)");
    };

    CLI::App* solve = app.add_subcommand("solve", "factor and solve with BiCGSTAB (b = A*1)");
    add_matrix_opts(solve);
    add_solver_opts(solve);
    add_report_opts(solve);

    CLI::App* bench = app.add_subcommand("bench", "sweep (k, threads) and tabulate results");
    add_matrix_opts(bench);
    add_solver_opts(bench);
    add_report_opts(bench);
    bench->add_option("--k-list", spec.bench_k, "levels to sweep");
    bench->add_option("--threads-list", spec.bench_threads, "worker counts to sweep");

    CLI::App* stencil = app.add_subcommand("stencil", "write a 27-point stencil matrix");
    stencil->add_option("--grid", spec.grid, "grid edge length")->required();
    stencil->add_option("--out,-o", spec.out_path, "output Matrix Market file")->required();
    stencil->add_flag_callback(
        "--structured", [&] { spec.structured = true; },
        "machine-readable key = value report");

    CLI::App* sim = app.add_subcommand("pipeline-sim", "simulate the ring broadcast schedule");
    sim->add_option("--bands", spec.sim_bands, "number of bands")->required();
    sim->add_option("--nodes", spec.sim_nodes, "number of ring nodes")->required();
    sim->add_option("--out,-o", spec.out_path, "write the trace to a file");
    sim->add_flag_callback(
        "--structured", [&] { spec.structured = true; },
        "machine-readable key = value report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ilukit::exit_usage;
    }

    if (solve->parsed()) spec.command = ilukit::RunSpec::Command::solve;
    if (bench->parsed()) spec.command = ilukit::RunSpec::Command::bench;
    if (stencil->parsed()) spec.command = ilukit::RunSpec::Command::stencil;
    if (sim->parsed()) spec.command = ilukit::RunSpec::Command::pipeline_sim;

    return ilukit::run(spec, std::cout, std::cerr);
}
