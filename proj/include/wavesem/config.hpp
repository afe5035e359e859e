#pragma once

// INI run configuration. One file describes one run; list-valued keys
// (comma separated) are only accepted by sweeps, which expand them into a
// cartesian product of scalar runs.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "analysis.hpp"
#include "basis.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "mesh.hpp"
#include "physics.hpp"
#include "solver.hpp"

namespace wavesem {

using ConfigTree = boost::property_tree::ptree;

enum class WaveTheory { None, Airy, StreamFunction };

struct DomainConfig {
    double length = 1.0;
    std::optional<double> depth; // absent: from wave.kh with one wavelength spanning the domain
    std::string bathymetry = "flat";
    BarProfile bar;
    bool periodic = true;
    LayerSpacing spacing = LayerSpacing::Uniform;
};

struct DiscretizationConfig {
    int nx = 8;
    int nz = 3;
    int p = 4;
    int quad_order = -1;
    int fs_exactness = -1;
};

struct WaveConfig {
    FlowModel mode = FlowModel::FNPF;
    WaveTheory theory = WaveTheory::None;
    std::optional<double> kh;
    std::optional<double> period;
    std::optional<double> wavelength;
    std::optional<double> height;
    std::optional<double> relative_steepness;
    int modes = 0;
};

struct ZonesConfig {
    std::optional<std::pair<double, double>> generation;
    std::optional<std::pair<double, double>> absorption;
    double ramp_periods = 5.0;
    RampShape ramp = RampShape::Cosine;
    double exponent = 3.5;
};

struct TimeConfig {
    std::optional<double> periods;
    std::optional<double> end;
    double cfl = 0.95;
    double u_max = 0.0; // 0: estimated from the wave
    double dt = 0.0;    // 0: CFL rule
    MeshUpdateCadence mesh_update = MeshUpdateCadence::Stage;
};

struct FilterConfig {
    FilterParams params;
    int every = 1;
    bool eta = true;
    bool phi = true;
};

struct OutputConfig {
    std::string directory = "out";
    int snapshot_every = 0; // steps; 0 disables snapshots
};

struct ScalingConfig {
    ScalingKind kind = ScalingKind::Strong;
    std::vector<int> threads{1};
    int steps = 5;
    int repeats = 1;
};

struct RunConfig {
    DomainConfig domain;
    DiscretizationConfig discretization;
    WaveConfig wave;
    ZonesConfig zones;
    TimeConfig time;
    FilterConfig filter;
    std::vector<double> probes;
    OutputConfig output;
    SolverSettings solver;
    ScalingConfig scaling;
    double g = kGravity;

    ConfigTree tree;                                 // the scalar tree this run was parsed from
    std::vector<std::pair<std::string, std::string>> case_keys; // swept keys and their values
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty() && std::isfinite(d)) {
            return d;
        }
    } catch (...) {
    }
    throw ValidationError(key, "expected a number, got '" + v + "'");
}

inline int to_int(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (trim(v.substr(pos)).empty()) {
            return i;
        }
    } catch (...) {
    }
    throw ValidationError(key, "expected an integer, got '" + v + "'");
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    const std::string l = lower(v);
    if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
    if (l == "false" || l == "no" || l == "off" || l == "0") return false;
    throw ValidationError(key, "expected true or false, got '" + v + "'");
}

inline std::pair<double, double> to_interval(const std::string& key, const std::string& v)
{
    const auto parts = split_list(v);
    if (parts.size() != 2) {
        throw ValidationError(key, "expected an interval 'x0, x1'");
    }
    return {to_double(key, parts[0]), to_double(key, parts[1])};
}

// Known keys per section. Keys that may hold a list in sweeps are marked.
struct KeyInfo {
    bool sweepable = false;
    bool list = false; // always a list (probes.x, scaling.threads)
};

inline const std::map<std::string, KeyInfo>& known_keys()
{
    static const std::map<std::string, KeyInfo> keys = {
        {"domain.length", {}},
        {"domain.h", {true}},
        {"domain.bathymetry", {}},
        {"domain.periodic", {}},
        {"domain.layer_spacing", {}},
        {"domain.bar_start", {}},
        {"domain.bar_deep", {}},
        {"domain.bar_shallow", {}},
        {"domain.g", {}},
        {"discretization.nx", {true}},
        {"discretization.nz", {true}},
        {"discretization.p", {true}},
        {"discretization.quad_order", {}},
        {"discretization.fs_exactness", {}},
        {"wave.mode", {true}},
        {"wave.theory", {}},
        {"wave.kh", {true}},
        {"wave.period", {true}},
        {"wave.wavelength", {true}},
        {"wave.height", {true}},
        {"wave.relative_steepness", {true}},
        {"wave.modes", {}},
        {"zones.generation", {false, true}},
        {"zones.absorption", {false, true}},
        {"zones.ramp_periods", {}},
        {"zones.ramp", {}},
        {"zones.exponent", {}},
        {"time.periods", {true}},
        {"time.end", {}},
        {"time.cfl", {true}},
        {"time.u_max", {}},
        {"time.dt", {true}},
        {"time.mesh_update", {}},
        {"filter.cutoff", {}},
        {"filter.alpha", {}},
        {"filter.s", {}},
        {"filter.every", {}},
        {"filter.fields", {false, true}},
        {"probes.x", {false, true}},
        {"output.directory", {}},
        {"output.snapshot_every", {}},
        {"solver.preconditioner", {}},
        {"solver.laplace_rtol", {}},
        {"solver.laplace_atol", {}},
        {"solver.mass_rtol", {}},
        {"solver.max_iterations", {}},
        {"scaling.kind", {}},
        {"scaling.threads", {false, true}},
        {"scaling.steps", {}},
        {"scaling.repeats", {}},
        {"sweep.zip", {false, true}},
    };
    return keys;
}

class Reader {
public:
    explicit Reader(const ConfigTree& t) : t_(t) {}

    std::optional<std::string> str(const std::string& key) const
    {
        if (auto v = t_.get_optional<std::string>(ConfigTree::path_type(key, '.'))) {
            const std::string s = trim(*v);
            if (!s.empty()) {
                return s;
            }
        }
        return std::nullopt;
    }
    std::optional<double> num(const std::string& key) const
    {
        const auto s = str(key);
        return s ? std::optional<double>(to_double(key, *s)) : std::nullopt;
    }
    void get(const std::string& key, double& out) const
    {
        if (auto v = num(key)) out = *v;
    }
    void get(const std::string& key, int& out) const
    {
        if (auto s = str(key)) out = to_int(key, *s);
    }
    void get(const std::string& key, bool& out) const
    {
        if (auto s = str(key)) out = to_bool(key, *s);
    }

private:
    const ConfigTree& t_;
};

inline void positive(const std::string& key, double v)
{
    if (!(v > 0.0)) {
        throw ValidationError(key, "must be positive");
    }
}

} // namespace detail

/// Parse INI text into a tree. Syntax errors carry the line number.
inline ConfigTree parse_config_text(const std::string& text)
{
    ConfigTree t;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError("config", "line " + std::to_string(e.line()) + ": " + e.message());
    }
    return t;
}

inline ConfigTree load_config_tree(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Reject unknown sections and keys, naming the first offender.
inline void check_known_keys(const ConfigTree& t)
{
    const auto& keys = detail::known_keys();
    for (const auto& [section, body] : t) {
        if (body.empty()) {
            throw ValidationError(section, "key outside of a section");
        }
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            if (!keys.contains(key)) {
                throw ValidationError(key, "unknown key");
            }
        }
    }
}

/// Keys holding more than one value, excluding keys that are always lists.
inline std::vector<std::string> list_valued_keys(const ConfigTree& t)
{
    std::vector<std::string> out;
    for (const auto& [key, info] : detail::known_keys()) {
        if (info.list) continue;
        if (auto v = t.get_optional<std::string>(ConfigTree::path_type(key, '.'))) {
            if (detail::split_list(*v).size() > 1) {
                out.push_back(key);
            }
        }
    }
    return out;
}

/// Build a scalar RunConfig. The tree must not contain list values.
inline RunConfig parse_run_config(const ConfigTree& t)
{
    using namespace detail;
    check_known_keys(t);
    if (const auto lists = list_valued_keys(t); !lists.empty()) {
        throw ValidationError(lists.front(), "list values are only accepted by sweeps");
    }
    const Reader r(t);
    RunConfig c;
    c.tree = t;

    r.get("domain.g", c.g);
    positive("domain.g", c.g);
    r.get("domain.length", c.domain.length);
    positive("domain.length", c.domain.length);
    c.domain.depth = r.num("domain.h");
    if (c.domain.depth) {
        positive("domain.h", *c.domain.depth);
    }
    r.get("domain.periodic", c.domain.periodic);
    if (auto s = r.str("domain.bathymetry")) {
        c.domain.bathymetry = lower(*s);
        if (c.domain.bathymetry != "flat" && c.domain.bathymetry != "bar") {
            throw ValidationError("domain.bathymetry", "expected flat or bar");
        }
    }
    r.get("domain.bar_start", c.domain.bar.incline_start);
    r.get("domain.bar_deep", c.domain.bar.deep);
    r.get("domain.bar_shallow", c.domain.bar.shallow);
    if (c.domain.bathymetry == "bar") {
        positive("domain.bar_shallow", c.domain.bar.shallow);
        if (!(c.domain.bar.deep > c.domain.bar.shallow)) {
            throw ValidationError("domain.bar_deep", "must exceed domain.bar_shallow");
        }
        if (c.domain.depth) {
            throw ValidationError("domain.h", "not used with a bar profile; set domain.bar_deep");
        }
        c.domain.depth = c.domain.bar.deep;
    }
    if (auto s = r.str("domain.layer_spacing")) {
        const std::string l = lower(*s);
        if (l == "uniform") c.domain.spacing = LayerSpacing::Uniform;
        else if (l == "cosine") c.domain.spacing = LayerSpacing::Cosine;
        else throw ValidationError("domain.layer_spacing", "expected uniform or cosine");
    }

    r.get("discretization.nx", c.discretization.nx);
    r.get("discretization.nz", c.discretization.nz);
    r.get("discretization.p", c.discretization.p);
    r.get("discretization.quad_order", c.discretization.quad_order);
    r.get("discretization.fs_exactness", c.discretization.fs_exactness);
    if (c.discretization.nx < 1) throw ValidationError("discretization.nx", "must be >= 1");
    if (c.discretization.nz < 1) throw ValidationError("discretization.nz", "must be >= 1");
    if (c.discretization.p < 1) throw ValidationError("discretization.p", "must be >= 1");

    if (auto s = r.str("wave.mode")) {
        try {
            c.wave.mode = parse_flow_model(*s);
        } catch (const ValidationError&) {
            throw ValidationError("wave.mode", "expected LPF or FNPF");
        }
    }
    c.wave.kh = r.num("wave.kh");
    c.wave.period = r.num("wave.period");
    c.wave.wavelength = r.num("wave.wavelength");
    c.wave.height = r.num("wave.height");
    c.wave.relative_steepness = r.num("wave.relative_steepness");
    r.get("wave.modes", c.wave.modes);
    const bool any_wave = c.wave.kh || c.wave.period || c.wave.wavelength || c.wave.height || c.wave.relative_steepness;
    if (auto s = r.str("wave.theory")) {
        const std::string l = lower(*s);
        if (l == "none") c.wave.theory = WaveTheory::None;
        else if (l == "airy" || l == "linear") c.wave.theory = WaveTheory::Airy;
        else if (l == "stream" || l == "stream_function") c.wave.theory = WaveTheory::StreamFunction;
        else throw ValidationError("wave.theory", "expected none, airy or stream");
    } else if (any_wave) {
        c.wave.theory = c.wave.mode == FlowModel::LPF ? WaveTheory::Airy : WaveTheory::StreamFunction;
    }
    if (c.wave.theory != WaveTheory::None) {
        const int given = (c.wave.kh ? 1 : 0) + (c.wave.period ? 1 : 0) + (c.wave.wavelength ? 1 : 0);
        if (given != 1) {
            throw ValidationError("wave.kh", "give exactly one of wave.kh, wave.period, wave.wavelength");
        }
        if (c.wave.height.has_value() == c.wave.relative_steepness.has_value()) {
            throw ValidationError("wave.height", "give exactly one of wave.height, wave.relative_steepness");
        }
        for (const char* key : {"wave.kh", "wave.period", "wave.wavelength"}) {
            if (auto v = r.num(key)) positive(key, *v);
        }
        if (c.wave.height && *c.wave.height < 0.0) throw ValidationError("wave.height", "must be non-negative");
        if (c.wave.relative_steepness &&
            !(*c.wave.relative_steepness >= 0.0 && *c.wave.relative_steepness < 1.0)) {
            throw ValidationError("wave.relative_steepness", "must lie in [0, 1)");
        }
    }
    if (!c.domain.depth) {
        if (!(c.wave.kh && c.domain.periodic)) {
            throw ValidationError("domain.h", "depth is required unless a periodic domain takes it from wave.kh");
        }
        c.domain.depth = *c.wave.kh * c.domain.length / (2.0 * std::numbers::pi);
    }

    if (auto s = r.str("zones.generation")) c.zones.generation = to_interval("zones.generation", *s);
    if (auto s = r.str("zones.absorption")) c.zones.absorption = to_interval("zones.absorption", *s);
    r.get("zones.ramp_periods", c.zones.ramp_periods);
    r.get("zones.exponent", c.zones.exponent);
    positive("zones.exponent", c.zones.exponent);
    if (c.zones.ramp_periods < 0.0) throw ValidationError("zones.ramp_periods", "must be non-negative");
    if (auto s = r.str("zones.ramp")) {
        const std::string l = lower(*s);
        if (l == "cosine") c.zones.ramp = RampShape::Cosine;
        else if (l == "linear") c.zones.ramp = RampShape::Linear;
        else if (l == "none") c.zones.ramp = RampShape::None;
        else throw ValidationError("zones.ramp", "expected cosine, linear or none");
    }
    if (c.zones.generation && c.wave.theory == WaveTheory::None) {
        throw ValidationError("zones.generation", "a generation zone needs a wave");
    }
    for (const auto& [key, z] : {std::pair{"zones.generation", c.zones.generation},
                                 std::pair{"zones.absorption", c.zones.absorption}}) {
        if (z && (z->first < 0.0 || z->second > c.domain.length || !(z->second > z->first))) {
            throw ValidationError(key, "interval must satisfy 0 <= x0 < x1 <= domain.length");
        }
    }

    c.time.periods = r.num("time.periods");
    c.time.end = r.num("time.end");
    if (c.time.periods && c.time.end) throw ValidationError("time.end", "give time.periods or time.end, not both");
    if (c.time.periods) {
        if (*c.time.periods < 0.0) throw ValidationError("time.periods", "must be non-negative");
        if (c.wave.theory == WaveTheory::None) throw ValidationError("time.periods", "needs a wave period");
    }
    if (c.time.end && *c.time.end < 0.0) throw ValidationError("time.end", "must be non-negative");
    r.get("time.cfl", c.time.cfl);
    positive("time.cfl", c.time.cfl);
    r.get("time.u_max", c.time.u_max);
    r.get("time.dt", c.time.dt);
    if (c.time.u_max < 0.0) throw ValidationError("time.u_max", "must be non-negative");
    if (c.time.dt < 0.0) throw ValidationError("time.dt", "must be non-negative");
    if (auto s = r.str("time.mesh_update")) {
        const std::string l = lower(*s);
        if (l == "stage") c.time.mesh_update = MeshUpdateCadence::Stage;
        else if (l == "step") c.time.mesh_update = MeshUpdateCadence::Step;
        else throw ValidationError("time.mesh_update", "expected stage or step");
    }

    r.get("filter.cutoff", c.filter.params.cutoff);
    r.get("filter.alpha", c.filter.params.strength);
    r.get("filter.s", c.filter.params.exponent);
    r.get("filter.every", c.filter.every);
    if (c.filter.every < 0) throw ValidationError("filter.every", "must be >= 0");
    if (auto s = r.str("filter.fields")) {
        c.filter.eta = c.filter.phi = false;
        for (const auto& f : split_list(lower(*s))) {
            if (f == "eta") c.filter.eta = true;
            else if (f == "phi" || f == "phi_eta") c.filter.phi = true;
            else if (f == "none") {}
            else throw ValidationError("filter.fields", "unknown field '" + f + "'");
        }
    }
    filter_factors(c.discretization.p, c.filter.params); // validates cutoff/alpha/s

    if (auto s = r.str("probes.x")) {
        for (const auto& v : split_list(*s)) {
            const double x = to_double("probes.x", v);
            if (x < 0.0 || x > c.domain.length) {
                throw ValidationError("probes.x", "probe " + v + " lies outside the domain");
            }
            c.probes.push_back(x);
        }
    }

    if (auto s = r.str("output.directory")) c.output.directory = *s;
    r.get("output.snapshot_every", c.output.snapshot_every);
    if (c.output.snapshot_every < 0) throw ValidationError("output.snapshot_every", "must be >= 0");

    if (auto s = r.str("solver.preconditioner")) {
        try {
            c.solver.laplace_preconditioner = parse_preconditioner(*s);
        } catch (const ValidationError&) {
            throw ValidationError("solver.preconditioner", "expected none, jacobi, sgs or cholesky");
        }
    }
    r.get("solver.laplace_rtol", c.solver.laplace_rtol);
    r.get("solver.laplace_atol", c.solver.laplace_atol);
    r.get("solver.mass_rtol", c.solver.mass_rtol);
    r.get("solver.max_iterations", c.solver.laplace_max_iterations);
    positive("solver.laplace_rtol", c.solver.laplace_rtol);
    positive("solver.mass_rtol", c.solver.mass_rtol);
    if (c.solver.laplace_atol < 0.0) throw ValidationError("solver.laplace_atol", "must be non-negative");
    if (c.solver.laplace_max_iterations < 1) throw ValidationError("solver.max_iterations", "must be >= 1");
    c.solver.quad_order = c.discretization.quad_order;
    c.solver.fs_exactness = c.discretization.fs_exactness;

    if (auto s = r.str("scaling.kind")) {
        const std::string l = lower(*s);
        if (l == "strong") c.scaling.kind = ScalingKind::Strong;
        else if (l == "weak") c.scaling.kind = ScalingKind::Weak;
        else throw ValidationError("scaling.kind", "expected strong or weak");
    }
    if (auto s = r.str("scaling.threads")) {
        c.scaling.threads.clear();
        for (const auto& v : split_list(*s)) {
            const int n = to_int("scaling.threads", v);
            if (n < 1) throw ValidationError("scaling.threads", "thread counts must be >= 1");
            c.scaling.threads.push_back(n);
        }
        if (c.scaling.threads.empty()) throw ValidationError("scaling.threads", "empty list");
    }
    r.get("scaling.steps", c.scaling.steps);
    r.get("scaling.repeats", c.scaling.repeats);
    if (c.scaling.steps < 1) throw ValidationError("scaling.steps", "must be >= 1");
    if (c.scaling.repeats < 1) throw ValidationError("scaling.repeats", "must be >= 1");
    return c;
}

inline RunConfig load_run_config(const std::string& path)
{
    return parse_run_config(load_config_tree(path));
}

/// Expand list-valued keys into the cartesian product of scalar configs.
/// Keys named in sweep.zip advance together instead (equal list lengths).
/// The first listed key varies slowest.
inline std::vector<RunConfig> expand_sweep(const ConfigTree& t)
{
    check_known_keys(t);
    const auto keys = list_valued_keys(t);
    const auto value_list = [&](const std::string& k) {
        return detail::split_list(t.get<std::string>(ConfigTree::path_type(k, '.')));
    };
    std::vector<std::string> zip;
    if (auto z = t.get_optional<std::string>("sweep.zip")) {
        zip = detail::split_list(*z);
        for (const auto& k : zip) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                throw ValidationError("sweep.zip", "'" + k + "' is not a list-valued key");
            }
        }
    }
    // One dimension per independent key, plus one for the zipped group.
    std::vector<std::vector<std::string>> dims;
    bool zip_added = false;
    for (const auto& k : keys) {
        if (!detail::known_keys().at(k).sweepable) {
            throw ValidationError(k, "this key cannot be swept");
        }
        const bool zipped = std::find(zip.begin(), zip.end(), k) != zip.end();
        if (!zipped) {
            dims.push_back({k});
        } else if (!zip_added) {
            dims.push_back(zip);
            zip_added = true;
        }
    }
    std::vector<std::size_t> sizes;
    for (const auto& d : dims) {
        const std::size_t n = value_list(d.front()).size();
        for (const auto& k : d) {
            if (value_list(k).size() != n) {
                throw ValidationError("sweep.zip", "zipped keys must have lists of equal length");
            }
        }
        sizes.push_back(n);
    }
    std::vector<RunConfig> out;
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
        ConfigTree scalar = t;
        scalar.erase("sweep");
        std::vector<std::pair<std::string, std::string>> labels;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            for (const auto& k : dims[i]) {
                const std::string v = value_list(k)[idx[i]];
                scalar.put(ConfigTree::path_type(k, '.'), v);
                labels.emplace_back(k, v);
            }
        }
        RunConfig c = parse_run_config(scalar);
        c.case_keys = std::move(labels);
        out.push_back(std::move(c));
        std::size_t d = dims.size();
        while (true) {
            if (d == 0) return out;
            --d;
            if (++idx[d] < sizes[d]) break;
            idx[d] = 0;
        }
    }
}

} // namespace wavesem
