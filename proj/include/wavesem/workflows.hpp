#pragma once

// Run, convergence sweep, scaling benchmark and post-processing workflows
// behind the command-line tool.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "wavetheory.hpp"

namespace wavesem {

/// Analytic wave behind a config: initial data, generation target and
/// convergence reference.
struct ReferenceWave {
    WaveSpec spec;
    WaveTheory theory = WaveTheory::Airy;
    std::optional<StreamFunctionWave> stream;
    SurfaceWave surface;
};

inline std::optional<ReferenceWave> make_reference_wave(const RunConfig& c)
{
    if (c.wave.theory == WaveTheory::None) {
        return std::nullopt;
    }
    WaveInput in;
    in.depth = *c.domain.depth;
    in.period = c.wave.period;
    in.wavelength = c.wave.wavelength;
    in.kh = c.wave.kh;
    in.height = c.wave.height;
    in.relative_steepness = c.wave.relative_steepness;
    in.g = c.g;
    ReferenceWave r;
    r.theory = c.wave.theory;
    r.spec = dispersion_solve(in);
    if (c.wave.theory == WaveTheory::StreamFunction) {
        r.stream = stream_function_solve(r.spec, c.wave.modes, c.wave.period.has_value());
        r.spec = r.stream->spec();
        r.surface = surface_wave(*r.stream);
    } else {
        r.surface = surface_wave(AiryWave(r.spec), c.wave.mode);
    }
    if (c.domain.periodic) {
        const double m = c.domain.length / r.spec.wavelength;
        if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m) || std::round(m) < 1.0) {
            const char* key = c.wave.kh ? "wave.kh" : c.wave.period ? "wave.period" : "wave.wavelength";
            throw ValidationError(key, "the wavelength does not divide the periodic domain length");
        }
    }
    return r;
}

inline VolumeMesh build_volume_mesh(const RunConfig& c)
{
    auto surface = build_surface_mesh(c.domain.length, c.discretization.nx, c.discretization.p, c.domain.periodic);
    const Bathymetry bath = c.domain.bathymetry == "bar" ? Bathymetry(c.domain.bar) : flat_bottom(*c.domain.depth);
    return extrude(surface, c.discretization.nz, bath, c.domain.spacing);
}

inline double end_time(const RunConfig& c, const std::optional<ReferenceWave>& wave)
{
    if (c.time.periods) {
        return *c.time.periods * wave->spec.period;
    }
    return c.time.end.value_or(0.0);
}

/// The wave starts in the domain unless a generation zone brings it in.
inline SimulationSetup build_setup(const RunConfig& c, const std::optional<ReferenceWave>& wave)
{
    SimulationSetup s;
    s.model = c.wave.mode;
    s.g = c.g;
    s.filter = c.filter.params;
    s.solver = c.solver;
    s.time.cfl = c.time.cfl;
    s.time.dt = c.time.dt;
    s.time.end_time = end_time(c, wave);
    s.time.filter_every = c.filter.every;
    s.time.filter_eta = c.filter.eta;
    s.time.filter_phi = c.filter.phi;
    s.time.mesh_update = c.time.mesh_update;
    if (c.time.u_max > 0.0) {
        s.time.u_max = c.time.u_max;
    } else if (wave) {
        s.time.u_max = estimate_u_max(wave->spec);
    } else {
        const double h = c.domain.bathymetry == "bar" ? c.domain.bar.deep : *c.domain.depth;
        s.time.u_max = std::sqrt(c.g * h);
    }
    const double L = c.domain.length;
    if (c.zones.generation) {
        const auto [x0, x1] = *c.zones.generation;
        auto z = generation_zone(x0, x1, x0 <= L - x1, wave->surface, c.zones.ramp_periods * wave->spec.period,
                                 c.zones.ramp);
        z.exponent = c.zones.exponent;
        s.zones.push_back(std::move(z));
    }
    if (c.zones.absorption) {
        const auto [x0, x1] = *c.zones.absorption;
        auto z = absorption_zone(x0, x1, x0 <= L - x1);
        z.exponent = c.zones.exponent;
        s.zones.push_back(std::move(z));
    }
    if (wave && !c.zones.generation) {
        s.initial = wave->surface;
    }
    s.probes = c.probes;
    return s;
}

struct RunOptions {
    fs::path output;         // empty: no files
    int threads = 1;
    unsigned long seed = 0;
    bool quiet = true;
    std::ostream* log = &std::clog;
};

struct RunOutcome {
    RunManifest manifest;
    std::vector<std::vector<ProbeSample>> probes;
    SimulationState final_state;
    SolveStats laplace, recovery, mass;
    double dt = 0.0;
    long steps = 0;
};

namespace detail {

inline std::string step_name(long step)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06ld.vtk", step);
    return buf;
}

inline void write_snapshot(const fs::path& dir, const std::string& name, const VolumeMesh& mesh,
                           const SimulationState& s, std::vector<std::string>& files)
{
    VolumeMesh m = mesh;
    m.update(s.eta.values);
    auto os = open_output(dir / name);
    write_vtk_snapshot(os, m, s.phi.values, s.w.values, s.t);
    files.push_back(name);
}

inline std::string probe_name(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "probe_%02zu.csv", i);
    return buf;
}

} // namespace detail

/// Execute one configured simulation and write probes, snapshots, timings,
/// solve summaries and the manifest. On a runtime failure the last good
/// state is written before the error propagates.
inline RunOutcome run_simulation(const RunConfig& c, const RunOptions& opt = {})
{
    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    const bool write = !opt.output.empty();
    if (write) {
        ensure_directory(opt.output);
    }
    const auto wave = make_reference_wave(c);
    Simulation sim(build_volume_mesh(c), build_setup(c, wave));
    RunOutcome out;
    std::vector<std::string>& files = out.manifest.files;
    const int every = c.output.snapshot_every;
    if (write && every > 0) {
        detail::write_snapshot(opt.output, detail::step_name(0), sim.op().mesh(), sim.state(), files);
    }
    const long report = std::max(1L, sim.total_steps() / 10);
    if (!opt.quiet && opt.log) {
        *opt.log << "run: " << sim.total_steps() << " steps of dt = " << sim.dt() << " s, "
                 << sim.op().mesh().num_dofs() << " volume DoFs\n";
    }
    try {
        sim.run([&](const Simulation& s) {
            const long k = s.state().step;
            if (write && every > 0 && k % every == 0) {
                detail::write_snapshot(opt.output, detail::step_name(k), s.op().mesh(), s.state(), files);
            }
            if (!opt.quiet && opt.log && (k % report == 0 || s.finished())) {
                *opt.log << "  step " << k << "/" << s.total_steps() << "  t = " << s.state().t << '\n';
            }
        });
    } catch (const Error&) {
        if (write) {
            const SimulationState& good = sim.last_good();
            std::vector<std::string> ignored;
            detail::write_snapshot(opt.output, "last_good.vtk", sim.op().mesh(), good, ignored);
            auto os = open_output(opt.output / "last_good_surface.csv");
            write_surface_csv(os, sim.op().surface_mesh(), good);
        }
        throw;
    }

    out.probes = sim.probe_series();
    out.final_state = sim.state();
    out.laplace = sim.op().laplace_stats();
    out.recovery = sim.op().recovery_stats();
    out.mass = sim.op().mass_stats();
    out.dt = sim.dt();
    out.steps = sim.total_steps();

    RunManifest& m = out.manifest;
    m.config = c.tree;
    m.output_directory = opt.output;
    m.threads = opt.threads;
    m.seed = opt.seed;
    m.timers = sim.op().timers();
    m.extra = {{"dt", out.dt},
               {"steps", out.steps},
               {"end_time", sim.state().t},
               {"volume_dofs", sim.op().mesh().num_dofs()},
               {"surface_dofs", sim.op().surface_mesh().num_dofs()},
               {"laplace_solves_converged", out.laplace.all_converged()},
               {"mass_solves_converged", out.mass.all_converged()}};
    if (wave) {
        m.extra["wave"] = {{"depth", wave->spec.depth},     {"wavelength", wave->spec.wavelength},
                           {"period", wave->spec.period},   {"height", wave->spec.height},
                           {"kh", wave->spec.kh()},         {"celerity", wave->spec.celerity()}};
    }
    if (write) {
        {
            auto os = open_output(opt.output / "probes.csv");
            os << "probe,x,file\n";
            for (std::size_t i = 0; i < c.probes.size(); ++i) {
                os << i << ',' << c.probes[i] << ',' << detail::probe_name(i) << '\n';
            }
            files.push_back("probes.csv");
        }
        for (std::size_t i = 0; i < out.probes.size(); ++i) {
            auto os = open_output(opt.output / detail::probe_name(i));
            write_probe_csv(os, out.probes[i]);
            files.push_back(detail::probe_name(i));
        }
        {
            auto os = open_output(opt.output / "surface_final.csv");
            write_surface_csv(os, sim.op().surface_mesh(), sim.state());
            files.push_back("surface_final.csv");
        }
        {
            auto os = open_output(opt.output / "timings.csv");
            m.timers.write_csv(os);
            files.push_back("timings.csv");
        }
        {
            auto os = open_output(opt.output / "solves.csv");
            write_solves_csv(os, sim.op());
            files.push_back("solves.csv");
        }
    }
    m.finished = std::chrono::system_clock::now();
    m.started = started;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (write) {
        write_manifest(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceCase {
    std::vector<std::pair<std::string, std::string>> keys;
    int p = 0;
    int nx = 0;
    double h_max = 0.0;
    int dofs = 0;
    double error_w = 0.0;   // |w_eta - w_eta_true|_inf
    double error_eta = 0.0; // |eta - eta_true|_inf
    bool solves_converged = false;
    SolveStats laplace, mass;
    std::string status = "ok";
    bool ok() const { return status == "ok"; }
};

/// Error of one case against its analytic wave at the configured end time
/// (t = 0 gives a single Laplace solve on the exact initial surface).
inline ConvergenceCase evaluate_case(const RunConfig& c)
{
    ConvergenceCase r;
    r.keys = c.case_keys;
    r.p = c.discretization.p;
    r.nx = c.discretization.nx;
    try {
        const auto wave = make_reference_wave(c);
        if (!wave) {
            throw ValidationError("wave.theory", "a convergence case needs an analytic wave");
        }
        Simulation sim(build_volume_mesh(c), build_setup(c, wave));
        sim.run();
        const SurfaceMesh& sm = sim.op().surface_mesh();
        const double t = sim.state().t;
        r.h_max = sm.max_element_length();
        r.dofs = sim.op().mesh().num_dofs();
        r.error_w = inf_error(sm, sim.state().w_eta.values, [&](double x) { return wave->surface(x, t).w_eta; });
        r.error_eta = inf_error(sm, sim.state().eta.values, [&](double x) { return wave->surface(x, t).eta; });
        r.laplace = sim.op().laplace_stats();
        r.mass = sim.op().mass_stats();
        r.solves_converged = r.laplace.all_converged() && r.mass.all_converged();
    } catch (const std::exception& e) {
        r.status = std::string("failed: ") + e.what();
    }
    return r;
}

struct ConvergenceSweep {
    std::vector<ConvergenceCase> cases;
    std::vector<std::string> swept; // keys varied by the sweep
    std::vector<std::string> zip;   // keys varied together

    /// `key` plus the keys that move with it.
    std::vector<std::string> moving_with(const std::string& key) const
    {
        if (std::find(zip.begin(), zip.end(), key) != zip.end()) return zip;
        return {key};
    }
};

namespace detail {

inline std::string group_label(const ConvergenceCase& c, const std::vector<std::string>& skip)
{
    std::string s;
    for (const auto& [k, v] : c.keys) {
        if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
        s += (s.empty() ? "" : ";") + k + "=" + v;
    }
    return s.empty() ? "all" : s;
}

inline std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

} // namespace detail

/// Sample pairs grouped by all swept keys except `varying`, in sweep order.
inline std::map<std::string, ConvergenceRecord> group_cases(const ConvergenceSweep& s, const std::string& varying)
{
    std::map<std::string, ConvergenceRecord> groups;
    for (const auto& c : s.cases) {
        if (!c.ok()) continue;
        auto& rec = groups[detail::group_label(c, s.moving_with(varying))];
        rec.add(varying == "discretization.p" ? static_cast<double>(c.p) : c.h_max, c.error_w);
    }
    return groups;
}

inline ConvergenceSweep run_convergence(const ConfigTree& tree, const RunOptions& opt = {})
{
    ConvergenceSweep sweep;
    const auto configs = expand_sweep(tree);
    if (!configs.empty()) {
        for (const auto& [k, v] : configs.front().case_keys) sweep.swept.push_back(k);
    }
    if (auto z = tree.get_optional<std::string>("sweep.zip")) sweep.zip = detail::split_list(*z);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        auto r = evaluate_case(configs[i]);
        if (!opt.quiet && opt.log) {
            *opt.log << "case " << i + 1 << "/" << configs.size() << " [" << detail::group_label(r, {}) << "] ";
            if (r.ok()) *opt.log << "error " << r.error_w << '\n';
            else *opt.log << r.status << '\n';
        }
        sweep.cases.push_back(std::move(r));
    }
    return sweep;
}

inline void write_convergence_cases_csv(std::ostream& os, const ConvergenceSweep& s)
{
    os << "case";
    for (const auto& k : s.swept) os << ',' << k;
    os << ",p,nx,h_max,dofs,error_w_eta,error_eta,solves_converged,status\n";
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
        const auto& c = s.cases[i];
        os << i;
        for (const auto& [k, v] : c.keys) os << ',' << v;
        os << ',' << c.p << ',' << c.nx << ',' << c.h_max << ',' << c.dofs << ',' << c.error_w << ',' << c.error_eta
           << ',' << (c.solves_converged ? "true" : "false") << ',' << detail::csv_quote(c.status) << '\n';
    }
}

/// group,h_max,error,order per group. Algebraic orders mean nothing under
/// p-refinement, so the p table reports the error reduction e_{i-1}/e_i.
inline void write_rate_tables(std::ostream& os, const std::map<std::string, ConvergenceRecord>& groups,
                              const std::string& resolution)
{
    const bool p_table = resolution == "p";
    os << "group," << resolution << ",error," << (p_table ? "reduction" : "order") << "\n";
    for (const auto& [label, rec] : groups) {
        std::vector<std::optional<double>> rates;
        if (!p_table && rec.error.size() >= 2) rates = convergence_rate(rec);
        for (std::size_t i = 0; i < rec.error.size(); ++i) {
            os << detail::csv_quote(label) << ',' << rec.resolution[i] << ',' << rec.error[i] << ',';
            if (i > 0 && p_table && rec.error[i] > 0.0) os << rec.error[i - 1] / rec.error[i];
            if (i > 0 && !p_table && rates[i - 1]) os << *rates[i - 1];
            os << '\n';
        }
    }
}

/// Writes convergence_cases.csv plus error-vs-h and error-vs-p tables for
/// whichever of discretization.nx / discretization.p were swept.
inline std::vector<std::string> write_convergence_outputs(const fs::path& dir, const ConvergenceSweep& s)
{
    std::vector<std::string> files;
    {
        auto os = open_output(dir / "convergence_cases.csv");
        write_convergence_cases_csv(os, s);
        files.push_back("convergence_cases.csv");
    }
    const auto swept = [&](const char* k) { return std::find(s.swept.begin(), s.swept.end(), k) != s.swept.end(); };
    if (swept("discretization.nx")) {
        auto os = open_output(dir / "convergence_h.csv");
        write_rate_tables(os, group_cases(s, "discretization.nx"), "h_max");
        files.push_back("convergence_h.csv");
    }
    if (swept("discretization.p")) {
        auto os = open_output(dir / "convergence_p.csv");
        write_rate_tables(os, group_cases(s, "discretization.p"), "p");
        files.push_back("convergence_p.csv");
    }
    return files;
}

// ---------------------------------------------------------------------------
// scaling

struct ScalingResult {
    ScalingKind kind = ScalingKind::Strong;
    std::map<Routine, ScalingRecord> routines;
    ScalingRecord total;
    std::vector<RoutineTimers> timers; // per thread count, best repeat
    std::vector<int> dofs;
};

/// Config for `workers` in a weak sweep: the domain and element count grow
/// with the worker count so the work per worker stays fixed.
inline RunConfig weak_scaled(const RunConfig& base, int workers, int base_workers)
{
    RunConfig c = base;
    if (workers % base_workers != 0) {
        throw ValidationError("scaling.threads", "weak scaling needs thread counts that are multiples of the first");
    }
    const int f = workers / base_workers;
    c.domain.length *= f;
    c.discretization.nx *= f;
    return c;
}

/// Time per stage of each routine over `scaling.steps` steps, best of
/// `scaling.repeats`, for every thread count.
inline ScalingResult run_scaling(const RunConfig& base, const RunOptions& opt = {})
{
    const auto& sc = base.scaling;
    if (sc.kind == ScalingKind::Weak && (base.zones.generation || base.zones.absorption || !base.domain.periodic)) {
        throw ValidationError("scaling.kind", "weak scaling needs a periodic domain without zones");
    }
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (int n : sc.threads) {
        if (n > hw) {
            throw ValidationError("scaling.threads", std::to_string(n) + " threads requested, host has " +
                                                         std::to_string(hw));
        }
    }
    ScalingResult res;
    res.kind = sc.kind;
    res.total.kind = sc.kind;
    for (Routine r : kRoutines) res.routines[r].kind = sc.kind;
    const int saved = num_threads();
    for (int n : sc.threads) {
        const RunConfig c = sc.kind == ScalingKind::Weak ? weak_scaled(base, n, sc.threads.front()) : base;
        set_num_threads(n);
        RoutineTimers best;
        double best_total = std::numeric_limits<double>::infinity();
        int dofs = 0;
        for (int rep = 0; rep < sc.repeats; ++rep) {
            const auto wave = make_reference_wave(c);
            Simulation sim(build_volume_mesh(c), build_setup(c, wave));
            dofs = sim.op().mesh().num_dofs();
            sim.op().timers().reset();
            for (int s = 0; s < sc.steps; ++s) sim.step();
            const RoutineTimers& t = sim.op().timers();
            if (t.total() < best_total) {
                best_total = t.total();
                best = t;
            }
        }
        const double stages = 4.0 * sc.steps;
        for (Routine r : kRoutines) res.routines[r].add(n, best.seconds(r) / stages);
        res.total.add(n, best.total() / stages);
        res.timers.push_back(best);
        res.dofs.push_back(dofs);
        if (!opt.quiet && opt.log) {
            *opt.log << "threads " << n << ": " << dofs << " DoFs, " << best.total() / stages << " s per stage\n";
        }
    }
    set_num_threads(saved);
    return res;
}

/// The benchmark's default preconditioner is Jacobi, which parallelizes;
/// an explicit solver.preconditioner wins.
inline RunConfig scaling_config(const ConfigTree& tree)
{
    RunConfig c = parse_run_config(tree);
    if (!tree.get_optional<std::string>("solver.preconditioner")) {
        c.solver.laplace_preconditioner = PreconditionerKind::Jacobi;
    }
    return c;
}

inline std::vector<std::string> write_scaling_outputs(const fs::path& dir, const ScalingResult& r,
                                                      const std::vector<int>& threads)
{
    std::vector<std::string> files;
    {
        auto os = open_output(dir / "scaling.csv");
        bool header = true;
        for (Routine rt : kRoutines) {
            write_scaling_csv(os, r.routines.at(rt), to_string(rt), header);
            header = false;
        }
        write_scaling_csv(os, r.total, "total", false);
        files.push_back("scaling.csv");
    }
    for (std::size_t i = 0; i < threads.size(); ++i) {
        const std::string name = "timings_" + std::to_string(threads[i]) + "threads.csv";
        auto os = open_output(dir / name);
        r.timers[i].write_csv(os);
        files.push_back(name);
    }
    return files;
}

// ---------------------------------------------------------------------------
// post-processing of probe files

struct HarmonicsRequest {
    std::vector<fs::path> inputs;
    double period = 0.0;
    int harmonics = 4;
    double t_start = 0.0;
    double t_end = std::numeric_limits<double>::infinity();
};

namespace detail {

/// x of a probe file from the probes.csv index written next to it, if any.
inline std::optional<double> probe_position(const fs::path& file)
{
    const fs::path index = file.parent_path() / "probes.csv";
    if (!fs::exists(index)) return std::nullopt;
    std::ifstream in(index);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto cells = split_list(line);
        if (cells.size() == 3 && cells[2] == file.filename().string()) {
            return to_double("probes.csv", cells[1]);
        }
    }
    return std::nullopt;
}

} // namespace detail

inline std::vector<std::pair<double, HarmonicFit>> analyze_harmonics(const HarmonicsRequest& q)
{
    if (!(q.period > 0.0)) {
        throw ValidationError("period", "a positive wave period is required");
    }
    std::vector<std::pair<double, HarmonicFit>> fits;
    for (std::size_t i = 0; i < q.inputs.size(); ++i) {
        const auto t = CsvTable::read(q.inputs[i]);
        t.require({"t", "eta"});
        const auto tt = t.column("t");
        const auto ee = t.column("eta");
        const auto [tw, ew] = time_window(tt, ee, q.t_start, q.t_end);
        const double x = detail::probe_position(q.inputs[i]).value_or(static_cast<double>(i));
        fits.emplace_back(x, harmonic_fit(tw, ew, q.period, q.harmonics));
    }
    return fits;
}

inline std::vector<std::pair<std::string, ProbeStats>> analyze_probes(const std::vector<fs::path>& inputs)
{
    std::vector<std::pair<std::string, ProbeStats>> out;
    for (const auto& f : inputs) {
        const auto t = CsvTable::read(f);
        t.require({"eta"});
        out.emplace_back(f.filename().string(), probe_stats(t.column("eta")));
    }
    return out;
}

inline void write_probe_stats_csv(std::ostream& os, const std::vector<std::pair<std::string, ProbeStats>>& stats)
{
    os << "file,eta_max,eta_variation\n";
    for (const auto& [name, s] : stats) {
        os << detail::csv_quote(name) << ',' << s.eta_max << ',' << s.eta_variation << '\n';
    }
}

inline ConvergenceRecord analyze_convergence(const fs::path& input, const std::string& resolution_column,
                                             const std::string& error_column)
{
    const auto t = CsvTable::read(input);
    t.require({resolution_column, error_column});
    ConvergenceRecord r;
    const auto h = t.column(resolution_column);
    const auto e = t.column(error_column);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        r.add(h[i], e[i]);
    }
    return r;
}

} // namespace wavesem
