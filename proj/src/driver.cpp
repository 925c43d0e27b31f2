#include "ilukit/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ilukit/bicgstab.hpp"
#include "ilukit/engine.hpp"
#include "ilukit/inverse.hpp"
#include "ilukit/sparse.hpp"

namespace ilukit {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_time(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

/// Flat key/value report; one datum per line in structured mode.
struct Report {
    std::vector<std::pair<std::string, std::string>> fields;
    void add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }
    void add(const std::string& key, std::int64_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, double value) { add(key, fmt_double(value)); }

    void emit_structured(std::ostream& o) const {
        for (const auto& [k, v] : fields) o << k << " = " << v << "\n";
    }
};

struct ResolvedRun {
    int threads = 1;
    bool threads_from_env = false;
    std::int64_t band_size = 0;
};

int resolve_threads(const RunSpec& spec, bool& from_env) {
    from_env = false;
    if (spec.threads > 0) return spec.threads;
    if (const char* env = std::getenv("ILUKIT_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) {
            from_env = true;
            return t;
        }
    }
    return 1;
}

std::int64_t default_band_size(std::int32_t n, int threads) {
    const auto h = static_cast<std::int64_t>(std::llround(n / (8.0 * threads)));
    return std::max<std::int64_t>(16, h);
}

struct LoadedMatrix {
    SparseMatrixCsr a;
    std::string label;
};

LoadedMatrix load_matrix(const RunSpec& spec) {
    if (!spec.matrix_path.empty() && spec.grid > 0)
        throw std::invalid_argument("give either --matrix or --grid, not both");
    if (spec.matrix_path.empty() && spec.grid <= 0)
        throw std::invalid_argument("a matrix is required: pass --matrix FILE or --grid N");
    LoadedMatrix m;
    if (!spec.matrix_path.empty()) {
        m.a = read_matrix_market_file(spec.matrix_path);
        m.label = spec.matrix_path;
    } else {
        m.a = gen_stencil_27pt(spec.grid);
        m.label = "stencil-27pt grid " + std::to_string(spec.grid);
    }
    return m;
}

struct SolveRun {
    SolveReport report;
    Vector x;
};

SolveRun execute_solve(const SparseMatrixCsr& a, const std::string& method, int k, int threads,
                       std::int64_t band_size, const SolverConfig& cfg,
                       const NumericOptions& nopt) {
    const Vector ones(a.n, 1.0);
    const Vector b = spmv(a, ones);
    const auto bs = static_cast<std::int32_t>(band_size);

    SolveRun out;
    if (method == "auto") {
        AutoSolveResult r = solve_auto(a, b, k, threads, bs, cfg, nopt);
        out.report = std::move(r.report);
        out.x = std::move(r.x);
        return out;
    }

    EngineStats stats;
    FillPattern pattern = parallel_symbolic(a, k, threads, bs, &stats);
    out.report.pattern_entries = pattern.entry_count();

    BicgstabResult it;
    const auto t0 = std::chrono::steady_clock::now();
    if (method == "base") {
        NumericResult num = parallel_numeric(a, pattern, threads, bs, nopt, &stats);
        out.report.fpa = num.fpa;
        out.report.method = PrecondMethod::base;
        PrecondApply apply = [&](const Vector& in, Vector& y) {
            y = triangular_solve(num.f, in);
        };
        it = bicgstab(a, apply, b, cfg);
    } else if (method == "iilu") {
        InverseFactorResult fact = factor_with_inverse(a, pattern, threads, bs, nopt, &stats);
        out.report.fpa = fact.fpa;
        out.report.method = PrecondMethod::incomplete_inverse;
        PrecondApply apply = [&](const Vector& in, Vector& y) {
            Vector tmp;
            spmv_into(fact.inv.lower_inv, in, tmp);
            spmv_into(fact.inv.upper_inv, tmp, y);
        };
        it = bicgstab(a, apply, b, cfg);
    } else {
        throw std::invalid_argument("unknown method '" + method + "' (base | iilu | auto)");
    }
    out.report.time_iterations =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.report.time_symbolic = stats.symbolic_seconds;
    out.report.time_numeric = stats.numeric_seconds;
    out.report.time_inverse = stats.inverse_seconds;
    out.report.outcome = it.outcome;
    out.report.iterations = it.iterations;
    out.report.residual_history = std::move(it.residual_history);
    out.x = std::move(it.x);

    const double bnorm = norm2(b);
    Vector res = spmv(a, out.x);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = b[i] - res[i];
    out.report.true_residual = bnorm == 0.0 ? norm2(res) : norm2(res) / bnorm;
    return out;
}

int outcome_exit_code(SolveOutcome o) {
    switch (o) {
        case SolveOutcome::converged: return exit_ok;
        case SolveOutcome::breakdown: return exit_breakdown;
        default: return exit_not_converged;
    }
}

void add_solve_fields(Report& rep, const SolveReport& r) {
    rep.add("method_used", to_string(r.method));
    rep.add("outcome", to_string(r.outcome));
    rep.add("converged", r.outcome == SolveOutcome::converged ? 1 : 0);
    rep.add("iterations", r.iterations);
    rep.add("attempt_iterations", r.attempt_iterations);
    rep.add("attempt_failfast", r.attempt_failfast ? 1 : 0);
    rep.add("residual_final",
            r.residual_history.empty() ? 0.0 : r.residual_history.back());
    rep.add("true_residual", r.true_residual);
    std::string hist;
    for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
        if (i) hist += ' ';
        hist += fmt_double(r.residual_history[i]);
    }
    rep.add("residual_history", hist);
    rep.add("pattern_entries", r.pattern_entries);
    rep.add("fpa_total", r.fpa.total());
    rep.add("fpa_factor", r.fpa.factor);
    rep.add("fpa_inverse", r.fpa.inverse);
    rep.add("time_symbolic_s", fmt_time(r.time_symbolic));
    rep.add("time_numeric_s", fmt_time(r.time_numeric));
    rep.add("time_inverse_s", fmt_time(r.time_inverse));
    rep.add("time_iterations_s", fmt_time(r.time_iterations));
}

void emit_solve_human(std::ostream& o, const std::string& label, const SparseMatrixCsr& a,
                      const RunSpec& spec, const ResolvedRun& rr, const SolveReport& r) {
    o << "solve: " << label << " (n = " << a.n << ", nnz = " << a.nnz() << ")\n";
    o << "  k = " << spec.k << "  threads = " << rr.threads << "  band size = " << rr.band_size
      << "  method = " << spec.method << "\n";
    o << "  pattern entries = " << r.pattern_entries << " (diagonal included, unit lower "
      << "diagonal implicit)\n";
    o << "  fpa = " << r.fpa.total() << " (factor " << r.fpa.factor << ", inverse "
      << r.fpa.inverse << ")\n";
    o << "  preconditioning: symbolic " << fmt_time(r.time_symbolic) << " s, numeric "
      << fmt_time(r.time_numeric) << " s, inverse " << fmt_time(r.time_inverse) << " s\n";
    o << "  method used = " << to_string(r.method);
    if (r.method == PrecondMethod::fallback_after_failfast)
        o << " (abandoned after " << r.attempt_iterations << " iterations)";
    o << "\n";
    o << "  outcome = " << to_string(r.outcome) << " in " << r.iterations
      << " iterations, final residual "
      << fmt_double(r.residual_history.empty() ? 0.0 : r.residual_history.back())
      << ", true residual " << fmt_double(r.true_residual) << "\n";
    o << "  iteration time = " << fmt_time(r.time_iterations) << " s\n";
}

int run_solve(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    LoadedMatrix m;
    try {
        m = load_matrix(spec);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }

    ResolvedRun rr;
    rr.threads = resolve_threads(spec, rr.threads_from_env);
    rr.band_size = spec.band_size > 0 ? spec.band_size : default_band_size(m.a.n, rr.threads);

    SolverConfig cfg;
    cfg.rtol = spec.rtol;
    cfg.max_iters = spec.max_iters;
    cfg.failfast_window = spec.failfast_window;
    cfg.failfast_growth = spec.failfast_growth;
    NumericOptions nopt;
    nopt.perturb_zero_pivot = spec.perturb_pivots;

    SolveRun sr;
    try {
        sr = execute_solve(m.a, spec.method, spec.k, rr.threads, rr.band_size, cfg, nopt);
    } catch (const BreakdownError& e) {
        err << "breakdown: " << e.what() << "\n";
        return exit_breakdown;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }

    const int code = outcome_exit_code(sr.report.outcome);
    if (spec.structured) {
        Report rep;
        rep.add("schema", "ilukit-report-1");
        rep.add("command", "solve");
        rep.add("matrix", m.label);
        rep.add("n", static_cast<std::int64_t>(m.a.n));
        rep.add("nnz", m.a.nnz());
        rep.add("k", spec.k);
        rep.add("threads", rr.threads);
        rep.add("threads_from_env", rr.threads_from_env ? 1 : 0);
        rep.add("band_size", rr.band_size);
        rep.add("method", spec.method);
        rep.add("rtol", spec.rtol);
        rep.add("max_iters", spec.max_iters);
        rep.add("failfast_window", spec.failfast_window);
        rep.add("failfast_growth", spec.failfast_growth);
        add_solve_fields(rep, sr.report);
        rep.add("exit_code", code);
        rep.emit_structured(out);
    } else {
        emit_solve_human(out, m.label, m.a, spec, rr, sr.report);
    }
    return code;
}

int run_bench(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    LoadedMatrix m;
    try {
        m = load_matrix(spec);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }

    ResolvedRun rr;
    rr.threads = resolve_threads(spec, rr.threads_from_env);
    std::vector<int> ks = spec.bench_k.empty() ? std::vector<int>{spec.k} : spec.bench_k;
    std::vector<int> ws =
        spec.bench_threads.empty() ? std::vector<int>{rr.threads} : spec.bench_threads;

    SolverConfig cfg;
    cfg.rtol = spec.rtol;
    cfg.max_iters = spec.max_iters;
    NumericOptions nopt;
    nopt.perturb_zero_pivot = spec.perturb_pivots;

    Report rep;
    rep.add("schema", "ilukit-report-1");
    rep.add("command", "bench");
    rep.add("matrix", m.label);
    rep.add("n", static_cast<std::int64_t>(m.a.n));
    rep.add("nnz", m.a.nnz());
    rep.add("method", spec.method);
    rep.add("runs", static_cast<int>(ks.size() * ws.size()));

    if (!spec.structured) {
        out << "bench: " << m.label << " (n = " << m.a.n << ", nnz = " << m.a.nnz()
            << ", method = " << spec.method << ")\n";
        out << "   k   w   band    symbolic    numeric    inverse   entries       fpa   iters"
               "   iter time   outcome\n";
    }

    int idx = 0;
    int worst = exit_ok;
    for (const int k : ks) {
        for (const int w : ws) {
            const std::int64_t band =
                spec.band_size > 0 ? spec.band_size : default_band_size(m.a.n, w);
            int code;
            SolveRun sr;
            try {
                sr = execute_solve(m.a, spec.method, k, w, band, cfg, nopt);
                code = outcome_exit_code(sr.report.outcome);
            } catch (const BreakdownError& e) {
                err << "breakdown at k = " << k << ", threads = " << w << ": " << e.what()
                    << "\n";
                code = exit_breakdown;
            }
            worst = std::max(worst, code);
            const std::string prefix = "run." + std::to_string(idx) + ".";
            rep.add(prefix + "k", k);
            rep.add(prefix + "threads", w);
            rep.add(prefix + "band_size", band);
            if (code != exit_breakdown) {
                rep.add(prefix + "outcome", to_string(sr.report.outcome));
                rep.add(prefix + "method_used", to_string(sr.report.method));
                rep.add(prefix + "iterations", sr.report.iterations);
                rep.add(prefix + "pattern_entries", sr.report.pattern_entries);
                rep.add(prefix + "fpa_total", sr.report.fpa.total());
                rep.add(prefix + "time_symbolic_s", fmt_time(sr.report.time_symbolic));
                rep.add(prefix + "time_numeric_s", fmt_time(sr.report.time_numeric));
                rep.add(prefix + "time_inverse_s", fmt_time(sr.report.time_inverse));
                rep.add(prefix + "time_iterations_s", fmt_time(sr.report.time_iterations));
                if (!spec.structured) {
                    char line[256];
                    std::snprintf(line, sizeof line,
                                  "%4d %3d %6lld %10.4f %10.4f %10.4f %9lld %9llu %7d %11.4f"
                                  "   %s\n",
                                  k, w, static_cast<long long>(band), sr.report.time_symbolic,
                                  sr.report.time_numeric, sr.report.time_inverse,
                                  static_cast<long long>(sr.report.pattern_entries),
                                  static_cast<unsigned long long>(sr.report.fpa.total()),
                                  sr.report.iterations, sr.report.time_iterations,
                                  to_string(sr.report.outcome).c_str());
                    out << line;
                }
            } else {
                rep.add(prefix + "outcome", "breakdown");
                if (!spec.structured)
                    out << "  " << k << "  " << w << "  breakdown\n";
            }
            ++idx;
        }
    }
    if (spec.structured) rep.emit_structured(out);
    return worst;
}

int run_stencil(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    if (spec.grid <= 0) {
        err << "error: stencil requires --grid N with N >= 1\n";
        return exit_usage;
    }
    if (spec.out_path.empty()) {
        err << "error: stencil requires --out FILE\n";
        return exit_usage;
    }
    SparseMatrixCsr a;
    try {
        a = gen_stencil_27pt(spec.grid);
        write_matrix_market_file(a, spec.out_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    if (spec.structured) {
        Report rep;
        rep.add("schema", "ilukit-report-1");
        rep.add("command", "stencil");
        rep.add("grid", static_cast<std::int64_t>(spec.grid));
        rep.add("n", static_cast<std::int64_t>(a.n));
        rep.add("nnz", a.nnz());
        rep.add("path", spec.out_path);
        rep.emit_structured(out);
    } else {
        out << "stencil: wrote " << spec.out_path << " (grid " << spec.grid << ", n = " << a.n
            << ", nnz = " << a.nnz() << ")\n";
    }
    return exit_ok;
}

int run_pipeline_sim(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    if (spec.sim_bands < 1 || spec.sim_nodes < 1) {
        err << "error: pipeline-sim requires --bands >= 1 and --nodes >= 1\n";
        return exit_usage;
    }
    const PipelineTrace trace = pipeline_simulate(spec.sim_bands, spec.sim_nodes);
    if (spec.structured) {
        Report rep;
        rep.add("schema", "ilukit-report-1");
        rep.add("command", "pipeline-sim");
        rep.add("bands", spec.sim_bands);
        rep.add("nodes", spec.sim_nodes);
        rep.add("messages", static_cast<std::int64_t>(trace.messages.size()));
        for (std::size_t i = 0; i < trace.messages.size(); ++i) {
            const auto& msg = trace.messages[i];
            rep.add("message." + std::to_string(i),
                    std::to_string(msg.timestep) + " " + std::to_string(msg.sender) + " " +
                        std::to_string(msg.receiver) + " " + std::to_string(msg.band));
        }
        rep.emit_structured(out);
    } else {
        out << "pipeline-sim: " << spec.sim_bands << " bands over " << spec.sim_nodes
            << " nodes, " << trace.messages.size() << " messages\n";
        for (const auto& msg : trace.messages)
            out << "  t=" << msg.timestep << "  " << msg.sender << " -> " << msg.receiver
                << "  band " << msg.band << "\n";
    }
    return exit_ok;
}

} // namespace

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    std::ofstream file;
    std::ostream* dest = &out;
    if (!spec.out_path.empty() && spec.command != RunSpec::Command::stencil) {
        file.open(spec.out_path);
        if (!file) {
            err << "error: cannot open '" << spec.out_path << "' for writing\n";
            return exit_input_error;
        }
        dest = &file;
    }
    switch (spec.command) {
        case RunSpec::Command::solve: return run_solve(spec, *dest, err);
        case RunSpec::Command::bench: return run_bench(spec, *dest, err);
        case RunSpec::Command::stencil: return run_stencil(spec, *dest, err);
        case RunSpec::Command::pipeline_sim: return run_pipeline_sim(spec, *dest, err);
    }
    err << "error: unknown command\n";
    return exit_usage;
}

} // namespace ilukit
