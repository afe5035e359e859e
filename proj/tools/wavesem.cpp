// wavesem: run, convergence, scaling and analyze subcommands.
//
// Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "wavesem/config.hpp"
#include "wavesem/io.hpp"
#include "wavesem/parallel.hpp"
#include "wavesem/profiling.hpp"
#include "wavesem/workflows.hpp"

using namespace wavesem;

namespace {

enum Exit { Ok = 0, Validation = 2, Numerical = 3, Io = 4 };

struct Globals {
    std::string config;
    int threads = 0;
    std::string out;
    unsigned long seed = 0;
    bool quiet = false;
};

ConfigTree require_config(const Globals& g)
{
    if (g.config.empty()) {
        throw ValidationError("--config", "this command needs a config file");
    }
    return load_config_tree(g.config);
}

fs::path output_dir(const Globals& g, const std::string& fallback)
{
    return g.out.empty() ? fs::path(fallback) : fs::path(g.out);
}

RunOptions options(const Globals& g, const fs::path& dir)
{
    RunOptions o;
    o.output = dir;
    o.threads = num_threads();
    o.seed = g.seed;
    o.quiet = g.quiet;
    return o;
}

RunManifest start_manifest(const Globals& g, const std::string& command, const fs::path& dir)
{
    RunManifest m;
    m.command = command;
    m.output_directory = dir;
    m.threads = num_threads();
    m.seed = g.seed;
    m.started = std::chrono::system_clock::now();
    return m;
}

void finish_manifest(RunManifest& m, std::chrono::steady_clock::time_point t0)
{
    m.finished = std::chrono::system_clock::now();
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(m);
}

int cmd_run(const Globals& g)
{
    const RunConfig c = parse_run_config(require_config(g));
    const fs::path dir = output_dir(g, c.output.directory);
    const auto r = run_simulation(c, options(g, dir));
    if (!g.quiet) {
        std::cout << "wrote " << r.manifest.files.size() + 1 << " files to " << dir.string() << '\n';
    }
    return Ok;
}

int cmd_convergence(const Globals& g)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ConfigTree tree = require_config(g);
    const fs::path dir = output_dir(g, tree.get<std::string>("output.directory", "out"));
    ensure_directory(dir);
    RunManifest m = start_manifest(g, "convergence", dir);
    m.config = tree;
    const auto sweep = run_convergence(tree, options(g, dir));
    m.files = write_convergence_outputs(dir, sweep);
    long failed = 0;
    for (const auto& c : sweep.cases) failed += c.ok() ? 0 : 1;
    m.extra = {{"cases", sweep.cases.size()}, {"failed_cases", failed}};
    finish_manifest(m, t0);
    if (!g.quiet) {
        std::cout << sweep.cases.size() << " cases, " << failed << " failed; tables in " << dir.string() << '\n';
    }
    return Ok;
}

int cmd_scaling(const Globals& g)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ConfigTree tree = require_config(g);
    const RunConfig c = scaling_config(tree);
    const fs::path dir = output_dir(g, c.output.directory);
    ensure_directory(dir);
    RunManifest m = start_manifest(g, "scaling", dir);
    m.config = tree;
    const auto r = run_scaling(c, options(g, dir));
    m.files = write_scaling_outputs(dir, r, c.scaling.threads);
    for (const auto& t : r.timers) m.timers.merge(t);
    finish_manifest(m, t0);
    if (!g.quiet) {
        write_scaling_csv(std::cout, r.routines.at(Routine::LaplaceSolve), "LaplaceSolve");
    }
    return Ok;
}

struct AnalyzeArgs {
    std::string kind;
    std::vector<std::string> inputs;
    double period = 0.0;
    int harmonics = 4;
    double t_start = 0.0;
    double t_end = std::numeric_limits<double>::infinity();
    std::string resolution_column = "h_max";
    std::string error_column = "error";
};

int cmd_analyze(const Globals& g, const AnalyzeArgs& a)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
    for (const auto& f : inputs) {
        if (!fs::exists(f)) throw IoError("input '" + f.string() + "' does not exist");
    }
    const fs::path dir = output_dir(g, "analysis");
    ensure_directory(dir);
    RunManifest m = start_manifest(g, "analyze " + a.kind, dir);
    if (a.kind == "harmonics") {
        HarmonicsRequest q;
        q.inputs = inputs;
        q.period = a.period;
        q.harmonics = a.harmonics;
        q.t_start = a.t_start;
        q.t_end = a.t_end;
        const auto fits = analyze_harmonics(q);
        auto os = open_output(dir / "harmonics.csv");
        write_harmonics_csv(os, fits);
        m.files.push_back("harmonics.csv");
    } else if (a.kind == "probes") {
        auto os = open_output(dir / "probe_stats.csv");
        write_probe_stats_csv(os, analyze_probes(inputs));
        m.files.push_back("probe_stats.csv");
    } else {
        if (inputs.size() != 1) {
            throw ValidationError("inputs", "convergence analysis takes exactly one CSV");
        }
        const auto rec = analyze_convergence(inputs.front(), a.resolution_column, a.error_column);
        auto os = open_output(dir / "convergence_orders.csv");
        write_convergence_csv(os, rec, a.resolution_column);
        m.files.push_back("convergence_orders.csv");
    }
    finish_manifest(m, t0);
    if (!g.quiet) {
        std::cout << "wrote " << (dir / m.files.front()).string() << '\n';
    }
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral element potential-flow wave solver"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "INI configuration file");
    app.add_option("--threads", g.threads, "worker threads (overrides WAVESEM_THREADS)")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output directory (overrides output.directory)");
    app.add_option("--seed", g.seed, "seed recorded for randomized components");
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    auto* run = app.add_subcommand("run", "run one simulation");
    auto* conv = app.add_subcommand("convergence", "run a convergence sweep (list-valued keys)");
    auto* scal = app.add_subcommand("scaling", "strong or weak scaling benchmark");
    auto* anal = app.add_subcommand("analyze", "post-process probe or convergence CSVs");
    AnalyzeArgs aa;
    anal->add_option("kind", aa.kind, "harmonics | probes | convergence")
        ->required()
        ->check(CLI::IsMember({"harmonics", "probes", "convergence"}));
    anal->add_option("inputs", aa.inputs, "input CSV files")->required();
    anal->add_option("--period", aa.period, "wave period for harmonic fits");
    anal->add_option("--harmonics", aa.harmonics, "number of harmonics")->check(CLI::PositiveNumber);
    anal->add_option("--t-start", aa.t_start, "start of the fitting window (s)");
    anal->add_option("--t-end", aa.t_end, "end of the fitting window (s)");
    anal->add_option("--resolution-column", aa.resolution_column, "resolution column for convergence");
    anal->add_option("--error-column", aa.error_column, "error column for convergence");
    // global options may follow the subcommand
    for (auto* sub : {run, conv, scal, anal}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Validation;
    }

    set_num_threads(g.threads > 0 ? g.threads : threads_from_env("WAVESEM_THREADS", num_threads()));
    try {
        if (*run) return cmd_run(g);
        if (*conv) return cmd_convergence(g);
        if (*scal) return cmd_scaling(g);
        return cmd_analyze(g, aa);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return Validation;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return Io;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.numerical() ? Numerical : Validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Numerical;
    }
}
