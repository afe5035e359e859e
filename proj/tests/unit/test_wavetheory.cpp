#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "wavesem/wavetheory.hpp"

using namespace wavesem;

namespace {

constexpr double pi = std::numbers::pi;

WaveSpec periodic_spec(double kh, double ratio)
{
    WaveInput in;
    in.depth = kh / (2 * pi);
    in.wavelength = 1.0;
    in.relative_steepness = ratio;
    return dispersion_solve(in);
}

} // namespace

TEST(Dispersion, UnitWavelengthKhOne)
{
    WaveInput in;
    in.depth = 1.0 / (2 * pi);
    in.wavelength = 1.0;
    const auto s = dispersion_solve(in);
    EXPECT_NEAR(s.kh(), 1.0, 1e-14);
    EXPECT_NEAR(s.omega * s.omega, s.g * s.k * std::tanh(s.kh()), 1e-12 * s.omega * s.omega);
}

TEST(Dispersion, BarPeriod)
{
    WaveInput in;
    in.depth = 0.4;
    in.period = 2.018;
    const auto s = dispersion_solve(in);
    EXPECT_NEAR(s.kh(), 0.6725, 5e-4);
    EXPECT_NEAR(s.omega * s.omega, s.g * s.k * std::tanh(s.kh()), 1e-12 * s.omega * s.omega);
}

TEST(Dispersion, DeepWaterLimit)
{
    WaveInput in;
    in.depth = 10.0;
    in.kh = 5.0;
    const auto s = dispersion_solve(in);
    EXPECT_NEAR(s.omega * s.omega / (s.g * s.k), 1.0, 1e-3);
}

TEST(Dispersion, RoundTrip)
{
    for (double kh : {0.1, 0.6725, 1.0, 3.0, 6.0, 20.0}) {
        WaveInput a;
        a.depth = 0.7;
        a.kh = kh;
        const auto s = dispersion_solve(a);
        WaveInput b;
        b.depth = 0.7;
        b.period = s.period;
        const auto t = dispersion_solve(b);
        EXPECT_NEAR(t.kh(), kh, 1e-10 * kh);
    }
}

TEST(Dispersion, Validation)
{
    WaveInput a;
    a.depth = -1.0;
    a.period = 1.0;
    try {
        dispersion_solve(a);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "wave.depth");
    }
    WaveInput b;
    b.depth = 1.0;
    EXPECT_THROW(dispersion_solve(b), ValidationError);
    b.period = 1.0;
    b.wavelength = 2.0;
    EXPECT_THROW(dispersion_solve(b), ValidationError);
}

TEST(MaxSteepness, Limits)
{
    // deep water: q -> 0 gives H/L -> 0.141063
    EXPECT_NEAR(max_steepness(1e-6, 1.0), 0.141063, 1e-6);
    // shallow water: H_max/h -> 0.0077829/0.0093407
    const double q = 1e6;
    EXPECT_NEAR(max_steepness(q, 1.0) * q, 0.0077829 / 0.0093407, 1e-4);
}

TEST(MaxSteepness, MonotoneInKh)
{
    // H_max/h falls as kh increases; H_max/L stays below the deep-water limit 1/7
    double prev_h = 1e9;
    for (int i = 0; i <= 110; ++i) {
        const double kh = 0.5 + 0.05 * i;
        const double L = 2 * pi / kh;
        const double eps = max_steepness(L, 1.0);
        EXPECT_LT(eps * L, prev_h) << kh;
        EXPECT_GT(eps, 0.0);
        EXPECT_LT(eps, 1.0 / 7.0) << kh;
        prev_h = eps * L;
    }
}

TEST(Airy, CrestBottomAndKinematics)
{
    WaveInput in;
    in.depth = 0.5;
    in.period = 1.3;
    in.height = 0.04;
    const AiryWave w(dispersion_solve(in));
    EXPECT_NEAR(w.eval(0.0, 0.0, 0.0).eta, 0.02, 1e-15);
    for (double x : {0.0, 0.3, 1.1}) {
        EXPECT_NEAR(w.eval(x, -0.5, 0.7).w, 0.0, 1e-15);
        // d(eta)/dt = w at z = 0 by central difference in t
        const double dt = 1e-5;
        const double deta = (w.eval(x, 0.0, 0.2 + dt).eta - w.eval(x, 0.0, 0.2 - dt).eta) / (2 * dt);
        EXPECT_NEAR(deta, w.eval(x, 0.0, 0.2).w, 1e-8);
    }
}

TEST(StreamFunction, SmallAmplitudeMatchesAiry)
{
    const auto spec = periodic_spec(1.0, 1e-4);
    const auto sw = StreamFunctionWave::solve(spec);
    const AiryWave aw(spec);
    const double eps = spec.height / spec.wavelength;
    // second-order celerity correction with zero mean current
    const double S = 1.0 / std::cosh(2 * spec.kh());
    const double c2 = (2 + 7 * S * S) / (4 * (1 - S) * (1 - S));
    const double ka = 0.5 * spec.k * spec.height;
    EXPECT_NEAR(sw.celerity() / aw.celerity(), 1.0 + c2 * ka * ka, 0.01 * ka * ka + 1e-13);
    for (int i = 0; i < 16; ++i) {
        const double x = i / 16.0;
        EXPECT_NEAR(sw.surface_elevation(x, 0.0), aw.eval(x, 0.0, 0.0).eta, 10 * eps * spec.height);
        EXPECT_NEAR(sw.eval(x, 0.0, 0.0).phi_eta, aw.eval(x, 0.0, 0.0).phi_eta, 20 * eps * std::abs(aw.eval(0.25, 0, 0).phi));
    }
}

TEST(StreamFunction, ConvergedResidualAndConstraints)
{
    for (double kh : {1.0, 3.0, 6.0}) {
        for (double ratio : {0.1, 0.5, 0.8, 0.9}) {
            const auto spec = periodic_spec(kh, ratio);
            const auto sw = StreamFunctionWave::solve(spec);
            EXPECT_LT(sw.max_residual(), 1e-12) << kh << ' ' << ratio;
            EXPECT_NEAR(sw.crest_elevation() - sw.trough_elevation(), spec.height, 1e-10 * spec.height);
            EXPECT_NEAR(sw.wavelength(), 1.0, 1e-12);
            // zero spatial mean over a wavelength
            const int n = 512;
            double mean = 0.0;
            for (int i = 0; i < n; ++i) mean += sw.surface_elevation(static_cast<double>(i) / n, 0.0);
            EXPECT_LT(std::abs(mean / n), 1e-10 * spec.height) << kh << ' ' << ratio;
        }
    }
}

TEST(StreamFunction, NonlinearAsymmetry)
{
    const auto spec = periodic_spec(1.0, 0.5);
    const auto sw = StreamFunctionWave::solve(spec);
    EXPECT_GT(sw.crest_elevation(), spec.height / 2);
    EXPECT_GT(spec.height / 2, -sw.trough_elevation());
    // independent high-mode run agrees
    StreamFunctionWave::Options o;
    o.modes = 40;
    const auto hi = StreamFunctionWave::solve(spec, false, o);
    EXPECT_NEAR(hi.crest_elevation(), sw.crest_elevation(), 1e-6 * spec.height);
    EXPECT_NEAR(hi.celerity(), sw.celerity(), 1e-8 * sw.celerity());
    for (double x : {0.0, 0.1, 0.37}) {
        EXPECT_NEAR(hi.eval(x, 0.0, 0.0).w, sw.eval(x, 0.0, 0.0).w, 1e-6 * sw.celerity());
    }
}

TEST(StreamFunction, EvaluationMatchesCollocation)
{
    const auto sw = StreamFunctionWave::solve(periodic_spec(3.0, 0.5));
    const auto xs = sw.collocation_x();
    const auto es = sw.collocation_eta();
    for (std::size_t m = 0; m < xs.size(); ++m) {
        EXPECT_NEAR(sw.surface_elevation(xs[m], 0.0), es[m], 1e-12);
    }
    // 256 equispaced points include the collocation points when N divides 128
    StreamFunctionWave::Options o;
    o.modes = 32;
    const auto sw2 = StreamFunctionWave::solve(periodic_spec(1.0, 0.5), false, o);
    const auto es2 = sw2.collocation_eta();
    for (int i = 0; i <= 128; i += 4) {
        EXPECT_NEAR(sw2.surface_elevation(i / 256.0, 0.0), es2[static_cast<std::size_t>(i / 4)], 1e-12);
    }
}

TEST(StreamFunction, PeriodicInTimeAndBottomCondition)
{
    const auto sw = StreamFunctionWave::solve(periodic_spec(1.0, 0.5));
    const double T = sw.period();
    const double h = sw.spec().depth;
    for (double x : {0.05, 0.4, 0.77}) {
        const auto a = sw.eval(x, -0.3 * h, 0.3);
        const auto b = sw.eval(x, -0.3 * h, 0.3 + T);
        EXPECT_NEAR(a.eta, b.eta, 1e-12);
        EXPECT_NEAR(a.phi, b.phi, 1e-12);
        EXPECT_NEAR(a.u, b.u, 1e-12);
        EXPECT_NEAR(sw.eval(x, -h, 0.9).w, 0.0, 1e-15);
    }
}

TEST(StreamFunction, SatisfiesLaplaceAndSurfaceConditions)
{
    const auto sw = StreamFunctionWave::solve(periodic_spec(1.0, 0.5));
    const double c = sw.celerity();
    const double g = sw.spec().g;
    const double B = sw.bernoulli_constant();
    const double d = 1e-4;
    for (double x : {0.0, 0.13, 0.31, 0.5}) {
        const double t = 0.2;
        // Laplace by 5-point stencil well inside the fluid
        const double z = -0.5 * sw.spec().depth;
        auto phi = [&](double xx, double zz) { return sw.eval(xx, zz, t).phi; };
        const double lap = (phi(x + d, z) + phi(x - d, z) + phi(x, z + d) + phi(x, z - d) - 4 * phi(x, z)) / (d * d);
        EXPECT_NEAR(lap, 0.0, 1e-4);
        const auto s = sw.eval(x, sw.surface_elevation(x, t), t);
        // kinematic condition: eta_t + u eta_x = w with eta_t = -c eta_x
        const double ex = (sw.surface_elevation(x + d, t) - sw.surface_elevation(x - d, t)) / (2 * d);
        EXPECT_NEAR(-c * ex + s.u * ex, s.w, 1e-7);
    }
    // dynamic condition with one uniform Bernoulli constant at the collocation points
    for (double x : sw.collocation_x()) {
        const auto s = sw.eval(x, sw.surface_elevation(x, 0.0), 0.0);
        const double dphidt = -c * s.u; // steady translation: phi_t = -c phi_x
        EXPECT_NEAR(dphidt + 0.5 * (s.u * s.u + s.w * s.w) + g * s.eta, B, 1e-10 * g * sw.spec().height) << x;
    }
}

TEST(StreamFunction, MovingFrameSteady)
{
    const auto sw = StreamFunctionWave::solve(periodic_spec(3.0, 0.3));
    const double c = sw.celerity();
    for (double X : {0.1, 0.45}) {
        const auto a = sw.eval(X, -0.01, 0.0);
        const auto b = sw.eval(X + c * 0.37, -0.01, 0.37);
        EXPECT_NEAR(a.u, b.u, 1e-12);
        EXPECT_NEAR(a.w, b.w, 1e-12);
    }
}

TEST(StreamFunction, PeriodGiven)
{
    WaveInput in;
    in.depth = 0.4;
    in.period = 2.018;
    in.height = 0.02;
    const auto spec = dispersion_solve(in);
    const auto sw = StreamFunctionWave::solve(spec, true);
    EXPECT_NEAR(sw.period(), 2.018, 1e-10);
    // nonlinear dispersion lengthens the wave slightly
    EXPECT_GT(sw.wavelength(), spec.wavelength);
    EXPECT_LT(sw.wavelength(), 1.05 * spec.wavelength);
}

TEST(StreamFunction, RejectsBreakingWave)
{
    auto spec = periodic_spec(1.0, 0.5);
    spec.height = 1.01 * max_steepness(spec) * spec.wavelength;
    EXPECT_THROW(StreamFunctionWave::solve(spec), WaveSolverError);
}

TEST(StreamFunction, ProfileCsv)
{
    const auto sw = StreamFunctionWave::solve(periodic_spec(1.0, 0.1));
    std::ostringstream os;
    sw.write_profile_csv(os, 8);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, 20), "x,eta,phi_eta,w_eta\n");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 9);
}

TEST(StreamFunction, DefaultModes)
{
    EXPECT_EQ(default_stream_function_modes(0.1, 1.0), 17);
    EXPECT_EQ(default_stream_function_modes(0.9, 6.0), 24);
}
