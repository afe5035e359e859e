#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / "wavesem_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result run(const std::string& args, const fs::path& dir, const std::string& env = "")
{
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + WAVESEM_CLI + "' " + args + " >'" + out.string() +
                            "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const auto p = dir / "case.ini";
    std::ofstream(p) << text;
    return p;
}

std::string config_path(const char* name)
{
    return (fs::path(WAVESEM_CONFIG_DIR) / name).string();
}

const char* kSmallWave = "[domain]\nlength = 1\n[discretization]\nnx = 4\nnz = 2\np = 4\n"
                         "[wave]\nkh = 1\nrelative_steepness = 0.3\n[time]\nperiods = 0.25\n[probes]\nx = 0, 0.5\n";

} // namespace

TEST(Cli, StillWaterRunWritesCompleteManifest)
{
    const auto dir = scratch("still");
    const auto r = run("run --quiet --config '" + config_path("still_water.ini") + "' --out '" + (dir / "o").string() + "'",
                       dir);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    EXPECT_EQ(j["command"], "run");
    for (const auto& f : j["files"]) {
        EXPECT_TRUE(fs::exists(dir / "o" / f.get<std::string>())) << f;
    }
    EXPECT_TRUE(fs::exists(dir / "o" / "probe_00.csv"));
}

TEST(Cli, NegativeDepthIsValidationError)
{
    const auto dir = scratch("negative");
    const auto cfg = write_config(dir, "[domain]\nlength = 1\nh = -1\n");
    const auto r = run("run --config '" + cfg.string() + "' --out '" + (dir / "o").string() + "'", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("domain.h"), std::string::npos) << r.err;
}

TEST(Cli, MissingConfigIsIoError)
{
    const auto dir = scratch("missing");
    const auto r = run("run --config '" + (dir / "nope.ini").string() + "'", dir);
    EXPECT_EQ(r.code, 4);
}

TEST(Cli, UsageErrors)
{
    const auto dir = scratch("usage");
    EXPECT_EQ(run("", dir).code, 2);
    EXPECT_EQ(run("run --threads 0 --config x.ini", dir).code, 2);
    EXPECT_EQ(run("analyze spectra x.csv", dir).code, 2);
    EXPECT_EQ(run("--help", dir).code, 0);
}

TEST(Cli, ThreadFlagOverridesEnvironment)
{
    const auto dir = scratch("threads");
    const auto cfg = config_path("still_water.ini");
    auto r = run("run --quiet --config '" + cfg + "' --out '" + (dir / "env").string() + "'", dir, "WAVESEM_THREADS=2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "env" / "manifest.json"))["threads"], 2);
    r = run("run --quiet --threads 3 --config '" + cfg + "' --out '" + (dir / "flag").string() + "'", dir,
            "WAVESEM_THREADS=2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "flag" / "manifest.json"))["threads"], 3);
}

TEST(Cli, IdenticalRunsGiveIdenticalProbeFiles)
{
    const auto dir = scratch("determinism");
    const auto cfg = write_config(dir, kSmallWave);
    for (const char* o : {"a", "b"}) {
        const auto r = run("run --quiet --config '" + cfg.string() + "' --out '" + (dir / o).string() + "'", dir);
        ASSERT_EQ(r.code, 0) << r.err;
    }
    for (const char* f : {"probe_00.csv", "probe_01.csv"}) {
        const auto a = slurp(dir / "a" / f);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
    }
}

TEST(Cli, BlowUpIsNumericalFailure)
{
    const auto dir = scratch("blowup");
    const auto cfg = write_config(dir, "[domain]\nlength = 1\n[discretization]\nnx = 4\nnz = 2\np = 4\n"
                                       "[wave]\nkh = 1\nrelative_steepness = 0.3\n[time]\nend = 50\ndt = 5\n");
    const auto r = run("run --config '" + cfg.string() + "' --out '" + (dir / "o").string() + "'", dir);
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_TRUE(fs::exists(dir / "o" / "last_good.vtk"));
    EXPECT_TRUE(fs::exists(dir / "o" / "last_good_surface.csv"));
}

TEST(Cli, AnalyzeProbesAndMissingColumn)
{
    const auto dir = scratch("analyze");
    const auto cfg = write_config(dir, kSmallWave);
    ASSERT_EQ(run("run --quiet --config '" + cfg.string() + "' --out '" + (dir / "o").string() + "'", dir).code, 0);
    auto r = run("analyze probes '" + (dir / "o" / "probe_00.csv").string() + "' --out '" + (dir / "a").string() + "'",
                 dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "a" / "probe_stats.csv"));
    EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
    // probes.csv is the index file and has no eta column
    r = run("analyze probes '" + (dir / "o" / "probes.csv").string() + "' --out '" + (dir / "b").string() + "'", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("eta"), std::string::npos) << r.err;
    r = run("analyze probes '" + (dir / "o" / "absent.csv").string() + "'", dir);
    EXPECT_EQ(r.code, 4);
}

TEST(Cli, ConvergenceSweepWritesTables)
{
    const auto dir = scratch("convergence");
    const auto cfg = write_config(dir, "[domain]\nlength = 1\n[discretization]\nnx = 4, 8\nnz = 2\np = 3\n"
                                       "[wave]\nkh = 1\nrelative_steepness = 0.1\n");
    const auto r = run("convergence --quiet --config '" + cfg.string() + "' --out '" + (dir / "o").string() + "'", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    EXPECT_EQ(j["results"]["cases"], 2);
    EXPECT_TRUE(fs::exists(dir / "o" / "convergence_h.csv"));
}
