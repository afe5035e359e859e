#pragma once

// Output files: probe series, VTK snapshots, timing and solve summaries, the
// run manifest, and a small CSV reader for the analysis commands.

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "mesh.hpp"
#include "profiling.hpp"

namespace wavesem {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "1.0.0";

inline std::ofstream open_output(const fs::path& path)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream os(path);
    if (!os) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    return os;
}

inline void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

/// t,eta,phi_eta,w_eta at full precision, so identical runs give identical files.
inline void write_probe_csv(std::ostream& os, const std::vector<ProbeSample>& series)
{
    os << "t,eta,phi_eta,w_eta\n";
    for (const auto& s : series) {
        os << s.t << ',' << s.eta << ',' << s.phi_eta << ',' << s.w_eta << '\n';
    }
}

/// x,eta,phi_eta,w_eta at the surface DoFs.
inline void write_surface_csv(std::ostream& os, const SurfaceMesh& mesh, const SimulationState& s)
{
    os << "x,eta,phi_eta,w_eta\n";
    for (int i = 0; i < mesh.num_dofs(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        os << mesh.node_x()[k] << ',' << s.eta[k] << ',' << s.phi_eta[k] << ',' << s.w_eta[k] << '\n';
    }
}

/// Legacy VTK structured grid: one point per volume DoF (columns along i,
/// levels along j) with phi and w as point data.
inline void write_vtk_snapshot(std::ostream& os, const VolumeMesh& mesh, const std::vector<double>& phi,
                               const std::vector<double>& w, double t)
{
    const int nc = mesh.num_columns(), nl = mesh.levels();
    if (static_cast<int>(phi.size()) != mesh.num_dofs() || static_cast<int>(w.size()) != mesh.num_dofs()) {
        throw DimensionMismatch("write_vtk_snapshot: fields do not match the volume mesh");
    }
    os << "# vtk DataFile Version 3.0\n";
    os << "wavesem t=" << t << '\n';
    os << "ASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << nc << ' ' << nl << " 1\n";
    os << "POINTS " << mesh.num_dofs() << " double\n";
    for (int l = 0; l < nl; ++l) {
        for (int c = 0; c < nc; ++c) {
            const int d = mesh.dof(c, l);
            os << mesh.x(d) << ' ' << mesh.z(d) << " 0\n";
        }
    }
    os << "POINT_DATA " << mesh.num_dofs() << '\n';
    for (const auto& [name, f] : {std::pair{"phi", &phi}, std::pair{"w", &w}}) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int l = 0; l < nl; ++l) {
            for (int c = 0; c < nc; ++c) {
                os << (*f)[static_cast<std::size_t>(mesh.dof(c, l))] << '\n';
            }
        }
    }
}

inline void write_solves_csv(std::ostream& os, const FreeSurfaceOperator& op)
{
    os << "solve,count,failures,total_iterations,max_iterations,max_relative_residual,seconds\n";
    for (const auto& [name, s] : {std::pair{"laplace", &op.laplace_stats()}, std::pair{"recovery", &op.recovery_stats()},
                                  std::pair{"mass", &op.mass_stats()}}) {
        os << name << ',' << s->count << ',' << s->failures << ',' << s->total_iterations << ',' << s->max_iterations
           << ',' << s->max_relative_residual << ',' << s->seconds << '\n';
    }
}

/// Sections become objects, keys become strings.
inline Json config_to_json(const ConfigTree& t)
{
    Json j = Json::object();
    for (const auto& [key, child] : t) {
        if (child.empty()) {
            j[key] = child.data();
        } else {
            j[key] = config_to_json(child);
        }
    }
    return j;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp)
{
    const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    ConfigTree config;
    fs::path output_directory;
    std::string version = kArtifactVersion;
    std::string command = "run";
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
    double wall_seconds = 0.0;
    int threads = 1;
    unsigned long seed = 0;
    RoutineTimers timers;
    std::vector<std::string> files; // relative to output_directory
    Json extra = Json::object();

    Json to_json() const
    {
        Json j;
        j["version"] = version;
        j["command"] = command;
        j["output_directory"] = output_directory.string();
        j["started"] = utc_timestamp(started);
        j["finished"] = utc_timestamp(finished);
        j["wall_seconds"] = wall_seconds;
        j["threads"] = threads;
        j["seed"] = seed;
        Json t = Json::object();
        for (Routine r : kRoutines) {
            t[to_string(r)] = {{"calls", timers.calls(r)}, {"seconds", timers.seconds(r)}};
        }
        j["timings"] = t;
        j["config"] = config_to_json(config);
        j["files"] = files;
        if (!extra.empty()) {
            j["results"] = extra;
        }
        return j;
    }
};

/// Write manifest.json into the output directory. Every listed file must exist.
inline fs::path write_manifest(const RunManifest& m)
{
    for (const auto& f : m.files) {
        if (!fs::exists(m.output_directory / f)) {
            throw IoError("manifest lists '" + f + "' but it was not written");
        }
    }
    const fs::path path = m.output_directory / "manifest.json";
    auto os = open_output(path);
    os << m.to_json().dump(2) << '\n';
    if (!os) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    return path;
}

/// Files listed in a manifest that do not exist next to it.
inline std::vector<std::string> missing_manifest_files(const fs::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("cannot open '" + manifest_path.string() + "'");
    }
    const Json j = Json::parse(in);
    std::vector<std::string> missing;
    for (const auto& f : j.at("files")) {
        const auto name = f.get<std::string>();
        if (!fs::exists(manifest_path.parent_path() / name)) {
            missing.push_back(name);
        }
    }
    return missing;
}

/// Numeric CSV with a header row.
class CsvTable {
public:
    static CsvTable read(const fs::path& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open '" + path.string() + "'");
        }
        CsvTable t;
        t.source_ = path.string();
        std::string line;
        if (!std::getline(in, line)) {
            throw ValidationError(t.source_, "empty file");
        }
        for (const auto& h : split(line)) {
            t.names_.push_back(detail::trim(h));
        }
        t.columns_.resize(t.names_.size());
        int row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (detail::trim(line).empty()) continue;
            const auto cells = split(line);
            if (cells.size() != t.names_.size()) {
                throw ValidationError(t.source_, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                                     " cells, header has " + std::to_string(t.names_.size()));
            }
            for (std::size_t c = 0; c < cells.size(); ++c) {
                t.columns_[c].push_back(detail::trim(cells[c]));
            }
        }
        return t;
    }

    bool has(const std::string& name) const { return index(name) >= 0; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }

    /// Numeric values of a column; empty cells read as NaN.
    std::vector<double> column(const std::string& name) const
    {
        const int i = index(name);
        if (i < 0) {
            throw ValidationError(name, "missing column in " + source_);
        }
        std::vector<double> out;
        for (const auto& v : columns_[static_cast<std::size_t>(i)]) {
            out.push_back(v.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : detail::to_double(source_ + ":" + name, v));
        }
        return out;
    }

    /// Throws naming every missing column at once.
    void require(const std::vector<std::string>& names) const
    {
        std::string missing;
        for (const auto& n : names) {
            if (!has(n)) missing += (missing.empty() ? "" : ", ") + n;
        }
        if (!missing.empty()) {
            throw ValidationError(missing, "missing column(s) in " + source_);
        }
    }

private:
    static std::vector<std::string> split(const std::string& line)
    {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream is(line);
        while (std::getline(is, cell, ',')) out.push_back(cell);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    }
    int index(const std::string& name) const
    {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == name) return static_cast<int>(i);
        }
        return -1;
    }

    std::string source_;
    std::vector<std::string> names_;
    std::vector<std::vector<std::string>> columns_;
};

} // namespace wavesem
