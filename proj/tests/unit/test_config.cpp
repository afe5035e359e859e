#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include "wavesem/config.hpp"

using namespace wavesem;

namespace {

RunConfig parse(const std::string& text)
{
    return parse_run_config(parse_config_text(text));
}

std::string key_of(const std::string& text)
{
    try {
        parse(text);
    } catch (const ValidationError& e) {
        return e.key();
    }
    return "<none>";
}

const char* kMinimal = "[domain]\nlength = 2\nh = 0.5\n";

} // namespace

TEST(Config, MinimalDefaults)
{
    const auto c = parse(kMinimal);
    EXPECT_EQ(c.domain.length, 2.0);
    EXPECT_EQ(*c.domain.depth, 0.5);
    EXPECT_TRUE(c.domain.periodic);
    EXPECT_EQ(c.wave.theory, WaveTheory::None);
    EXPECT_EQ(c.wave.mode, FlowModel::FNPF);
    EXPECT_EQ(c.time.cfl, 0.95);
    EXPECT_EQ(c.time.mesh_update, MeshUpdateCadence::Stage);
    EXPECT_EQ(c.filter.every, 1);
    EXPECT_TRUE(c.filter.eta && c.filter.phi);
    EXPECT_EQ(c.solver.laplace_rtol, 1e-6);
    EXPECT_EQ(c.solver.laplace_atol, 1e-15);
    EXPECT_EQ(c.solver.mass_rtol, 1e-5);
    EXPECT_EQ(c.zones.ramp_periods, 5.0);
    EXPECT_EQ(c.zones.exponent, 3.5);
}

TEST(Config, NegativeDepthNamesKey)
{
    EXPECT_EQ(key_of("[domain]\nlength = 1\nh = -0.5\n"), "domain.h");
    EXPECT_EQ(key_of("[domain]\nlength = 0\nh = 1\n"), "domain.length");
    EXPECT_EQ(key_of("[domain]\nh = abc\n"), "domain.h");
}

TEST(Config, UnknownKeysRejected)
{
    EXPECT_EQ(key_of("[domain]\nh = 1\nlenght = 2\n"), "domain.lenght");
    EXPECT_EQ(key_of("[domian]\nh = 1\n"), "domian.h");
}

TEST(Config, SyntaxErrorCarriesLine)
{
    try {
        parse_config_text("[domain]\nh = 1\n[broken\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Config, ListsOnlyInSweeps)
{
    EXPECT_EQ(key_of("[domain]\nh = 1\n[discretization]\np = 2, 3\n"), "discretization.p");
    const auto c = parse("[domain]\nh = 1\n[probes]\nx = 0.1, 0.5\n");
    EXPECT_EQ(c.probes, (std::vector<double>{0.1, 0.5}));
}

TEST(Config, DepthFromKhOnPeriodicDomain)
{
    const auto c = parse("[domain]\nlength = 1\n[wave]\nkh = 3\nrelative_steepness = 0.5\n");
    EXPECT_NEAR(*c.domain.depth, 3.0 / (2.0 * std::numbers::pi), 1e-15);
    EXPECT_EQ(c.wave.theory, WaveTheory::StreamFunction);
    EXPECT_EQ(key_of("[domain]\nlength = 1\nperiodic = false\n[wave]\nkh = 3\nheight = 0.01\n"), "domain.h");
}

TEST(Config, WaveInputsExactlyOne)
{
    EXPECT_EQ(key_of("[domain]\nh = 1\n[wave]\nkh = 1\nperiod = 2\nheight = 0.1\n"), "wave.kh");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[wave]\nkh = 1\n"), "wave.height");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[wave]\nkh = 1\nrelative_steepness = 1.2\n"), "wave.relative_steepness");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[wave]\nmode = SWE\n"), "wave.mode");
    const auto lpf = parse("[domain]\nh = 1\n[wave]\nmode = LPF\nperiod = 2\nheight = 0.01\n");
    EXPECT_EQ(lpf.wave.theory, WaveTheory::Airy);
}

TEST(Config, ZonesAndProbesValidated)
{
    EXPECT_EQ(key_of("[domain]\nlength = 10\nh = 1\n[zones]\ngeneration = 0, 2\n"), "zones.generation");
    EXPECT_EQ(key_of("[domain]\nlength = 10\nh = 1\n[zones]\nabsorption = 8, 12\n"), "zones.absorption");
    EXPECT_EQ(key_of("[domain]\nlength = 10\nh = 1\n[zones]\nabsorption = 8\n"), "zones.absorption");
    EXPECT_EQ(key_of("[domain]\nlength = 10\nh = 1\n[probes]\nx = 3, 11\n"), "probes.x");
    EXPECT_EQ(key_of("[domain]\nlength = 10\nh = 1\n[zones]\nramp = smooth\n"), "zones.ramp");
    const auto c = parse("[domain]\nlength = 10\nh = 1\nperiodic = false\n[zones]\nabsorption = 8, 10\n");
    EXPECT_EQ(c.zones.absorption->first, 8.0);
    EXPECT_EQ(c.zones.absorption->second, 10.0);
}

TEST(Config, TimeAndFilterKeys)
{
    EXPECT_EQ(key_of("[domain]\nh = 1\n[time]\nperiods = 2\n"), "time.periods");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[time]\nend = 1\nperiods = 2\n"), "time.end");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[time]\ncfl = 0\n"), "time.cfl");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[time]\nmesh_update = sometimes\n"), "time.mesh_update");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[filter]\ns = 3\n"), "filter.s");
    EXPECT_EQ(key_of("[domain]\nh = 1\n[filter]\nfields = eta, u\n"), "filter.fields");
    const auto c = parse("[domain]\nh = 1\n[filter]\nfields = eta\nevery = 2\n[time]\nmesh_update = step\n");
    EXPECT_TRUE(c.filter.eta);
    EXPECT_FALSE(c.filter.phi);
    EXPECT_EQ(c.filter.every, 2);
    EXPECT_EQ(c.time.mesh_update, MeshUpdateCadence::Step);
}

TEST(Config, BarBathymetry)
{
    const auto c = parse("[domain]\nlength = 38\nbathymetry = bar\nperiodic = false\n");
    EXPECT_EQ(*c.domain.depth, 0.4);
    EXPECT_EQ(c.domain.bar.shallow, 0.1);
    EXPECT_EQ(key_of("[domain]\nlength = 38\nbathymetry = bar\nh = 0.4\n"), "domain.h");
    EXPECT_EQ(key_of("[domain]\nlength = 38\nbathymetry = bar\nbar_shallow = 0.5\n"), "domain.bar_deep");
}

TEST(Config, SolverKeys)
{
    const auto c = parse("[domain]\nh = 1\n[solver]\npreconditioner = jacobi\nlaplace_rtol = 1e-8\n");
    EXPECT_EQ(c.solver.laplace_preconditioner, PreconditionerKind::Jacobi);
    EXPECT_EQ(c.solver.laplace_rtol, 1e-8);
    EXPECT_EQ(key_of("[domain]\nh = 1\n[solver]\npreconditioner = ilu\n"), "solver.preconditioner");
}

TEST(Sweep, CartesianProduct)
{
    const auto t = parse_config_text(
        "[domain]\nlength = 1\n[discretization]\np = 1, 2, 3\n[wave]\nkh = 1, 3\nrelative_steepness = 0.1\n");
    const auto cases = expand_sweep(t);
    ASSERT_EQ(cases.size(), 6u);
    // first listed key (alphabetical) varies slowest
    EXPECT_EQ(cases[0].discretization.p, 1);
    EXPECT_EQ(*cases[0].wave.kh, 1.0);
    EXPECT_EQ(*cases[1].wave.kh, 3.0);
    EXPECT_EQ(cases[5].discretization.p, 3);
    EXPECT_NEAR(*cases[1].domain.depth, 3.0 / (2.0 * std::numbers::pi), 1e-15);
    ASSERT_EQ(cases[4].case_keys.size(), 2u);
    EXPECT_EQ(cases[4].case_keys[0], (std::pair<std::string, std::string>{"discretization.p", "3"}));
}

TEST(Config, ShippedConfigsParse)
{
    for (const auto& e : std::filesystem::directory_iterator(WAVESEM_CONFIG_DIR)) {
        if (e.path().extension() != ".ini") continue;
        EXPECT_NO_THROW(expand_sweep(load_config_tree(e.path()))) << e.path();
    }
}

TEST(Sweep, ScalarConfigIsOneCase)
{
    const auto cases = expand_sweep(parse_config_text(kMinimal));
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_TRUE(cases[0].case_keys.empty());
}

TEST(Sweep, ZippedKeysAdvanceTogether)
{
    const auto t = parse_config_text("[sweep]\nzip = discretization.nx, discretization.nz\n[domain]\nh = 1\n"
                                     "[discretization]\nnx = 4, 8, 16\nnz = 1, 2, 4\np = 2, 3\n");
    const auto cases = expand_sweep(t);
    ASSERT_EQ(cases.size(), 6u);
    for (const auto& c : cases) {
        EXPECT_EQ(c.discretization.nx, 4 * c.discretization.nz);
    }
    const auto bad = parse_config_text("[sweep]\nzip = discretization.nx, discretization.nz\n[domain]\nh = 1\n"
                                       "[discretization]\nnx = 4, 8\nnz = 1, 2, 4\n");
    EXPECT_THROW(expand_sweep(bad), ValidationError);
}

TEST(Sweep, OnlySweepableKeys)
{
    const auto t = parse_config_text("[domain]\nh = 1\nlength = 1, 2\n");
    try {
        expand_sweep(t);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "domain.length");
    }
}
