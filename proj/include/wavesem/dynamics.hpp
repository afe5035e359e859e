#pragma once

// Method-of-lines time integration: mesh update, Laplace solve, gradient
// recovery, free-surface right-hand side, ERK4, relaxation and filtering.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "basis.hpp"
#include "errors.hpp"
#include "filter.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "physics.hpp"
#include "profiling.hpp"
#include "solver.hpp"
#include "wavetheory.hpp"

namespace wavesem {

/// Free-surface values of a known wave.
struct SurfaceValues {
    double eta = 0.0;
    double phi_eta = 0.0;
    double w_eta = 0.0;
};

using SurfaceWave = std::function<SurfaceValues(double x, double t)>;

/// Stream-function wave sampled on its own free surface. The potential
/// carries the uniform drift -B t so that it satisfies the dynamic condition
/// with a zero Bernoulli constant.
inline SurfaceWave surface_wave(const StreamFunctionWave& wave)
{
    return [wave](double x, double t) {
        const double eta = wave.surface_elevation(x, t);
        const WaveKinematics k = wave.eval(x, eta, t);
        return SurfaceValues{eta, k.phi - wave.bernoulli_constant() * t, k.w};
    };
}

/// Airy wave; LPF samples at z = 0, FNPF at z = eta.
inline SurfaceWave surface_wave(const AiryWave& wave, FlowModel model)
{
    return [wave, model](double x, double t) {
        const double eta = wave.eval(x, 0.0, t).eta;
        const WaveKinematics k = wave.eval(x, model == FlowModel::LPF ? 0.0 : eta, t);
        return SurfaceValues{eta, k.phi, k.w};
    };
}

// ---------------------------------------------------------------------------
// time controls

enum class MeshUpdateCadence { Stage, Step };

struct TimeControls {
    double cfl = 0.95;
    double dt = 0.0;       // > 0 overrides the CFL rule
    double end_time = 0.0;
    double u_max = 0.0;    // velocity scale for the CFL rule
    int filter_every = 1;  // steps between filter applications, 0 disables
    bool filter_eta = true;
    bool filter_phi = true;
    MeshUpdateCadence mesh_update = MeshUpdateCadence::Stage;
};

inline double compute_dt(double cfl, double dx_min, double u_max)
{
    if (!(cfl > 0.0)) {
        throw ValidationError("time.cfl", "CFL number must be positive");
    }
    if (!(dx_min > 0.0)) {
        throw ValidationError("dx_min", "minimum node spacing must be positive");
    }
    if (!(u_max > 0.0)) {
        throw ValidationError("time.u_max", "velocity scale must be positive");
    }
    return cfl * dx_min / u_max;
}

/// Velocity scale for the CFL rule: max(c, 1.5 * 2 pi H / T).
inline double estimate_u_max(const WaveSpec& spec)
{
    return std::max(spec.celerity(), 1.5 * 2.0 * std::numbers::pi * spec.height / spec.period);
}

/// Number of equal steps covering [0, end_time] with steps no longer than dt.
inline long step_count(double end_time, double dt)
{
    if (!(end_time > 0.0)) {
        return 0;
    }
    return std::max(1L, static_cast<long>(std::ceil(end_time / dt * (1.0 - 1e-12))));
}

// ---------------------------------------------------------------------------
// relaxation

enum class ZoneKind { Generation, Absorption };
enum class RampShape { Cosine, Linear, None };

/// Relaxation weight at normalized distance s from the target-zone edge
/// (s = 0 at the edge, s = 1 at the outer boundary). Flat at the edge, so
/// waves enter the zone without seeing a jump in damping.
inline double relaxation_weight(double s, double exponent = 3.5)
{
    s = std::clamp(s, 0.0, 1.0);
    return (std::exp(std::pow(s, exponent)) - 1.0) / (std::numbers::e - 1.0);
}

inline double ramp_factor(double t, double duration, RampShape shape)
{
    if (shape == RampShape::None || !(duration > 0.0) || t >= duration) {
        return 1.0;
    }
    if (t <= 0.0) {
        return 0.0;
    }
    const double r = t / duration;
    return shape == RampShape::Linear ? r : 0.5 * (1.0 - std::cos(std::numbers::pi * r));
}

struct RelaxationZone {
    double x0 = 0.0;
    double x1 = 0.0;
    ZoneKind kind = ZoneKind::Absorption;
    bool outer_left = true; // C_r = 1 at x0 (else at x1)
    SurfaceWave target;     // generation only
    double ramp_time = 0.0; // generation ramp duration (5 T)
    RampShape ramp = RampShape::Cosine;
    double exponent = 3.5;

    bool contains(double x) const { return x >= x0 && x <= x1; }

    /// C_r(x); zero outside the zone.
    double weight(double x) const
    {
        if (!contains(x)) {
            return 0.0;
        }
        const double len = x1 - x0;
        const double s = outer_left ? (x1 - x) / len : (x - x0) / len;
        return relaxation_weight(s, exponent);
    }
};

inline RelaxationZone absorption_zone(double x0, double x1, bool outer_left)
{
    RelaxationZone z;
    z.x0 = x0;
    z.x1 = x1;
    z.kind = ZoneKind::Absorption;
    z.outer_left = outer_left;
    return z;
}

inline RelaxationZone generation_zone(double x0, double x1, bool outer_left, SurfaceWave target, double ramp_time,
                                      RampShape ramp = RampShape::Cosine)
{
    RelaxationZone z;
    z.x0 = x0;
    z.x1 = x1;
    z.kind = ZoneKind::Generation;
    z.outer_left = outer_left;
    z.target = std::move(target);
    z.ramp_time = ramp_time;
    z.ramp = ramp;
    return z;
}

inline void validate_zones(const std::vector<RelaxationZone>& zones, double x_min, double x_max)
{
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const auto& z = zones[i];
        if (!(z.x1 > z.x0)) {
            throw ValidationError("zones", "zone " + std::to_string(i) + " has x1 <= x0");
        }
        if (z.x0 < x_min - 1e-12 || z.x1 > x_max + 1e-12) {
            throw ValidationError("zones", "zone " + std::to_string(i) + " extends outside the domain");
        }
        if (z.kind == ZoneKind::Generation && !z.target) {
            throw ValidationError("zones", "generation zone " + std::to_string(i) + " has no target wave");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (z.x0 < zones[j].x1 && zones[j].x0 < z.x1) {
                throw ValidationError("zones", "zones " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
            }
        }
    }
}

/// f <- (1 - C_r) f + C_r r(t) f_true for f in {eta, phi_eta}; f_true = 0 in
/// absorption zones.
inline void apply_relaxation(const SurfaceMesh& mesh, ScalarField& eta, ScalarField& phi_eta,
                             const std::vector<RelaxationZone>& zones, double t)
{
    const auto& xs = mesh.node_x();
    for (const auto& z : zones) {
        const double r = z.kind == ZoneKind::Generation ? ramp_factor(t, z.ramp_time, z.ramp) : 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double c = z.weight(xs[i]);
            if (c == 0.0) {
                continue;
            }
            SurfaceValues truth;
            if (z.kind == ZoneKind::Generation) {
                truth = z.target(xs[i], t);
            }
            eta[i] = (1.0 - c) * eta[i] + c * r * truth.eta;
            phi_eta[i] = (1.0 - c) * phi_eta[i] + c * r * truth.phi_eta;
        }
    }
}

// ---------------------------------------------------------------------------
// ERK4

/// One classical Runge-Kutta step for y' = f(t, y). `f(t, y, dydt, stage)`
/// writes the derivative; stage runs 0..3.
template <class F>
void erk4_step(std::vector<double>& y, double t, double dt, F&& f)
{
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto check = [&](const std::vector<double>& k, int stage) {
        for (double v : k) {
            if (!std::isfinite(v)) {
                throw BlowUpError("non-finite derivative in ERK4 stage " + std::to_string(stage + 1) + " at t = " +
                                  std::to_string(t));
            }
        }
    };
    f(t, std::span<const double>(y), std::span<double>(k1), 0);
    check(k1, 0);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    f(t + 0.5 * dt, std::span<const double>(tmp), std::span<double>(k2), 1);
    check(k2, 1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    f(t + 0.5 * dt, std::span<const double>(tmp), std::span<double>(k3), 2);
    check(k3, 2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    f(t + dt, std::span<const double>(tmp), std::span<double>(k4), 3);
    check(k4, 3);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// ---------------------------------------------------------------------------
// free-surface operator

struct SolverSettings {
    PreconditionerKind laplace_preconditioner = PreconditionerKind::Cholesky;
    double laplace_rtol = 1e-6;
    double laplace_atol = 1e-15;
    int laplace_max_iterations = 20000;
    double mass_rtol = 1e-5;
    double mass_atol = 1e-15;
    GradientRecoveryOptions recovery;
    int quad_order = -1;   // volume Gauss rule, default p
    int fs_exactness = -1; // free-surface rule, default 3p
};

/// Running summary of one kind of linear solve.
struct SolveStats {
    long count = 0;
    long failures = 0;
    long total_iterations = 0;
    int max_iterations = 0;
    double max_relative_residual = 0.0;
    double seconds = 0.0;

    void record(const SolveReport& r)
    {
        ++count;
        if (!r.converged) {
            ++failures;
        }
        total_iterations += r.iterations;
        max_iterations = std::max(max_iterations, r.iterations);
        max_relative_residual = std::max(max_relative_residual, r.relative_residual);
        seconds += r.wall_seconds;
    }
    bool all_converged() const { return failures == 0; }
};

/// Geometry-dependent operators and the stage pipeline
/// LaplaceUpdate -> LaplaceSolve -> EvaluateRHS. In LPF mode the mesh stays
/// at the flat reference domain and every operator is built once.
class FreeSurfaceOperator {
public:
    FreeSurfaceOperator(VolumeMesh mesh, FlowModel model, SolverSettings settings = {}, double g = kGravity)
        : mesh_(std::move(mesh)),
          model_(model),
          settings_(settings),
          g_(g),
          volume_(mesh_, settings.quad_order),
          surface_(mesh_.surface(), settings.fs_exactness),
          elimination_(volume_.pattern(), mesh_.surface_map())
    {
        surface_mass_ = surface_.mass();
        surface_pc_ = std::make_unique<FactorizedPreconditioner>(surface_mass_);
        zero_b_.assign(static_cast<std::size_t>(mesh_.num_dofs()), 0.0);
        phi_.assign(zero_b_.size(), 0.0);
        w_.assign(zero_b_.size(), 0.0);
        const auto ns = static_cast<std::size_t>(mesh_.num_columns());
        w_eta_.assign(ns, 0.0);
        deta_.assign(ns, 0.0);
        dphi_.assign(ns, 0.0);
        std::vector<double> flat(ns, 0.0);
        rebuild(flat);
    }

    FreeSurfaceOperator(const FreeSurfaceOperator&) = delete;
    FreeSurfaceOperator& operator=(const FreeSurfaceOperator&) = delete;

    FlowModel model() const { return model_; }
    double gravity() const { return g_; }
    const VolumeMesh& mesh() const { return mesh_; }
    const SurfaceMesh& surface_mesh() const { return mesh_.surface(); }
    const SolverSettings& settings() const { return settings_; }
    const CsrMatrix& stiffness() const { return K_; }
    const CsrMatrix& volume_mass() const { return M_; }
    const CsrMatrix& surface_mass() const { return surface_mass_; }
    const std::vector<double>& phi() const { return phi_; }
    const std::vector<double>& w() const { return w_; }
    const std::vector<double>& w_eta() const { return w_eta_; }
    const SolveStats& laplace_stats() const { return laplace_stats_; }
    const SolveStats& recovery_stats() const { return recovery_stats_; }
    const SolveStats& mass_stats() const { return mass_stats_; }
    const RoutineTimers& timers() const { return timers_; }
    RoutineTimers& timers() { return timers_; }
    long geometry_updates() const { return geometry_updates_; }

    /// Move the mesh to eta and reassemble (FNPF only).
    void update_geometry(std::span<const double> eta)
    {
        if (model_ == FlowModel::LPF) {
            return;
        }
        tagged(Routine::LaplaceUpdate, [&] { rebuild(eta); });
    }

    /// Dirichlet solve for phi with phi = phi_eta on the free surface, then w
    /// and w_eta by gradient recovery.
    void solve_laplace(std::span<const double> phi_eta)
    {
        tagged(Routine::LaplaceSolve, [&] {
            if (static_cast<int>(phi_eta.size()) != mesh_.num_columns()) {
                throw DimensionMismatch("solve_laplace: phi_eta does not match the surface mesh");
            }
            prepare_system();
            const auto rhs = elimination_.reduced_rhs(zero_b_, phi_eta);
            // A factorized preconditioner solves in one iteration from zero; a warm
            // start could stop at the loose tolerance without improving the old solution.
            auto x = settings_.laplace_preconditioner == PreconditionerKind::Cholesky
                         ? std::vector<double>(elimination_.free_dofs().size(), 0.0)
                         : elimination_.restrict_free(phi_);
            SolveOptions o;
            o.rtol = settings_.laplace_rtol;
            o.atol = settings_.laplace_atol;
            o.max_iterations = settings_.laplace_max_iterations;
            o.throw_on_failure = false;
            const SolveReport rep = cg_solve(elimination_.reduced(), rhs, x, *laplace_pc_, o);
            laplace_stats_.record(rep);
            if (!rep.converged) {
                throw NonConvergence("Laplace solve did not converge (relative residual " +
                                         std::to_string(rep.relative_residual) + ")",
                                     rep);
            }
            phi_ = elimination_.expand(x, phi_eta);
            const SolveReport wr = gradient_recovery(volume_, mesh_, M_, phi_, w_, settings_.recovery, mass_pc_.get());
            recovery_stats_.record(wr);
            if (!wr.converged) {
                throw NonConvergence("gradient recovery did not converge", wr);
            }
            const auto& m = mesh_.surface_map();
            for (std::size_t i = 0; i < m.size(); ++i) {
                w_eta_[i] = w_[static_cast<std::size_t>(m[i])];
            }
        });
    }

    /// Time derivatives of (eta, phi_eta) from the free-surface conditions.
    void rates(std::span<const double> eta, std::span<const double> phi_eta, std::span<double> deta,
               std::span<double> dphi)
    {
        tagged(Routine::EvaluateRHS, [&] {
            const auto [rk, rd] = surface_.fs_rhs(eta, phi_eta, w_eta_, model_, g_);
            SolveOptions o;
            o.rtol = settings_.mass_rtol;
            o.atol = settings_.mass_atol;
            o.throw_on_failure = false;
            std::fill(deta_.begin(), deta_.end(), 0.0);
            std::fill(dphi_.begin(), dphi_.end(), 0.0);
            const SolveReport r1 = cg_solve(surface_mass_, rk, deta_, *surface_pc_, o);
            const SolveReport r2 = cg_solve(surface_mass_, rd, dphi_, *surface_pc_, o);
            mass_stats_.record(r1);
            mass_stats_.record(r2);
            if (!r1.converged || !r2.converged) {
                throw NonConvergence("free-surface mass solve did not converge", r1.converged ? r2 : r1);
            }
            std::copy(deta_.begin(), deta_.end(), deta.begin());
            std::copy(dphi_.begin(), dphi_.end(), dphi.begin());
        });
    }

    /// Full pipeline for one stage.
    void evaluate(std::span<const double> eta, std::span<const double> phi_eta, std::span<double> deta,
                  std::span<double> dphi, bool move_mesh = true)
    {
        if (move_mesh) {
            update_geometry(eta);
        }
        solve_laplace(phi_eta);
        rates(eta, phi_eta, deta, dphi);
    }

private:
    template <class Fn>
    void tagged(Routine r, Fn&& fn)
    {
        ScopedTimer timer(timers_, r);
        try {
            fn();
        } catch (const StageError&) {
            throw;
        } catch (const ValidationError& e) {
            throw StageError(r, e.what(), false);
        } catch (const DimensionMismatch& e) {
            throw StageError(r, e.what(), false);
        } catch (const std::exception& e) {
            throw StageError(r, e.what());
        }
    }

    // LaplaceUpdate: move the mesh and reassemble.
    void rebuild(std::span<const double> eta)
    {
        mesh_.update(eta);
        std::tie(K_, M_) = volume_.stiffness_and_mass(mesh_);
        mass_pc_ = std::make_unique<JacobiPreconditioner>(M_);
        system_dirty_ = true;
        ++geometry_updates_;
    }

    // LaplaceSolve setup: Dirichlet elimination and preconditioner for the current K.
    void prepare_system()
    {
        if (!system_dirty_) {
            return;
        }
        elimination_.update(K_);
        const CsrMatrix& A = elimination_.reduced();
        if (settings_.laplace_preconditioner == PreconditionerKind::Cholesky && laplace_pc_) {
            static_cast<FactorizedPreconditioner&>(*laplace_pc_).factor(A);
        } else {
            laplace_pc_ = make_preconditioner(settings_.laplace_preconditioner, A);
        }
        system_dirty_ = false;
    }

    VolumeMesh mesh_;
    FlowModel model_;
    SolverSettings settings_;
    double g_;
    VolumeAssembler volume_;
    SurfaceAssembler surface_;
    DirichletElimination elimination_;
    CsrMatrix K_, M_, surface_mass_;
    std::unique_ptr<Preconditioner> laplace_pc_;
    std::unique_ptr<Preconditioner> mass_pc_;
    std::unique_ptr<Preconditioner> surface_pc_;
    std::vector<double> zero_b_, phi_, w_, w_eta_, deta_, dphi_;
    SolveStats laplace_stats_, recovery_stats_, mass_stats_;
    RoutineTimers timers_;
    long geometry_updates_ = 0;
    bool system_dirty_ = true;
};

// ---------------------------------------------------------------------------
// simulation

struct SimulationState {
    double t = 0.0;
    long step = 0;
    ScalarField eta{FieldLocation::Surface, 0};
    ScalarField phi_eta{FieldLocation::Surface, 0};
    ScalarField w_eta{FieldLocation::Surface, 0};
    ScalarField phi{FieldLocation::Volume, 0};
    ScalarField w{FieldLocation::Volume, 0};
    bool operators_valid = false; // phi, w and w_eta belong to the current eta, phi_eta
};

struct ProbeSample {
    double t;
    double eta;
    double phi_eta;
    double w_eta;
};

struct SimulationSetup {
    FlowModel model = FlowModel::FNPF;
    double g = kGravity;
    FilterParams filter;
    SolverSettings solver;
    TimeControls time;
    std::vector<RelaxationZone> zones;
    SurfaceWave initial; // empty: still water
    std::vector<double> probes;
};

class Simulation {
public:
    Simulation(VolumeMesh mesh, SimulationSetup setup)
        : setup_(std::move(setup)),
          ref_(mesh.order(), setup_.filter),
          op_(std::move(mesh), setup_.model, setup_.solver, setup_.g)
    {
        const SurfaceMesh& sm = op_.surface_mesh();
        validate_zones(setup_.zones, sm.x_min(), sm.x_max());
        if (setup_.time.filter_every < 0) {
            throw ValidationError("filter.every", "filter cadence must be >= 0");
        }
        if (setup_.time.end_time < 0.0) {
            throw ValidationError("time.end", "end time must be non-negative");
        }
        for (double x : setup_.probes) {
            if (x < sm.x_min() || x > sm.x_max()) {
                throw ValidationError("probes.x", "probe outside the domain");
            }
        }
        double dt = setup_.time.dt;
        if (!(dt > 0.0)) {
            dt = compute_dt(setup_.time.cfl, sm.min_spacing(), setup_.time.u_max);
        }
        steps_ = step_count(setup_.time.end_time, dt);
        dt_ = steps_ > 0 ? setup_.time.end_time / static_cast<double>(steps_) : dt;

        const auto ns = static_cast<std::size_t>(sm.num_dofs());
        state_.eta = ScalarField(FieldLocation::Surface, ns);
        state_.phi_eta = ScalarField(FieldLocation::Surface, ns);
        if (setup_.initial) {
            for (std::size_t i = 0; i < ns; ++i) {
                const SurfaceValues v = setup_.initial(sm.node_x()[i], 0.0);
                state_.eta[i] = v.eta;
                state_.phi_eta[i] = v.phi_eta;
            }
        }
        probe_series_.resize(setup_.probes.size());
        refresh();
        sample_probes();
        last_good_ = state_;
    }

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const SimulationSetup& setup() const { return setup_; }
    const SimulationState& state() const { return state_; }
    const SimulationState& last_good() const { return last_good_; }
    const FreeSurfaceOperator& op() const { return op_; }
    FreeSurfaceOperator& op() { return op_; }
    const ReferenceElement& reference() const { return ref_; }
    double dt() const { return dt_; }
    long total_steps() const { return steps_; }
    bool finished() const { return state_.step >= steps_; }
    const std::vector<std::vector<ProbeSample>>& probe_series() const { return probe_series_; }

    /// Recompute phi, w and w_eta for the current surface state.
    void refresh()
    {
        if (state_.operators_valid) {
            return;
        }
        op_.update_geometry(state_.eta.values);
        op_.solve_laplace(state_.phi_eta.values);
        copy_diagnostics();
        state_.operators_valid = true;
    }

    /// One ERK4 step followed by relaxation and filtering.
    void step()
    {
        const std::size_t n = state_.eta.size();
        std::vector<double> y(2 * n);
        std::copy(state_.eta.values.begin(), state_.eta.values.end(), y.begin());
        std::copy(state_.phi_eta.values.begin(), state_.phi_eta.values.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
        const bool per_stage = setup_.time.mesh_update == MeshUpdateCadence::Stage;
        bool fresh = state_.operators_valid;
        auto f = [&](double, std::span<const double> yy, std::span<double> dy, int stage) {
            const auto eta = yy.subspan(0, n);
            const auto phi = yy.subspan(n, n);
            if (stage == 0 && fresh) {
                // phi, w_eta already belong to this state
            } else {
                if (stage == 0 || per_stage) {
                    op_.update_geometry(eta);
                }
                op_.solve_laplace(phi);
            }
            fresh = false;
            op_.rates(eta, phi, dy.subspan(0, n), dy.subspan(n, n));
        };
        erk4_step(y, state_.t, dt_, f);
        for (std::size_t i = 0; i < 2 * n; ++i) {
            if (!std::isfinite(y[i])) {
                throw BlowUpError("non-finite surface field after step " + std::to_string(state_.step + 1));
            }
        }
        std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), state_.eta.values.begin());
        std::copy(y.begin() + static_cast<std::ptrdiff_t>(n), y.end(), state_.phi_eta.values.begin());
        ++state_.step;
        state_.t = static_cast<double>(state_.step) * dt_;
        state_.operators_valid = false;
        apply_relaxation(op_.surface_mesh(), state_.eta, state_.phi_eta, setup_.zones, state_.t);
        const int every = setup_.time.filter_every;
        if (every > 0 && ref_.order() >= 2 && state_.step % every == 0) {
            if (setup_.time.filter_eta) apply_modal_filter_inplace(op_.surface_mesh(), ref_, state_.eta);
            if (setup_.time.filter_phi) apply_modal_filter_inplace(op_.surface_mesh(), ref_, state_.phi_eta);
        }
        refresh();
        sample_probes();
        last_good_ = state_;
    }

    /// Step to the end time. `observer` runs after every step.
    void run(const std::function<void(const Simulation&)>& observer = {})
    {
        while (!finished()) {
            step();
            if (observer) {
                observer(*this);
            }
        }
    }

    /// 1/2 g <eta, eta> + 1/2 <phi_eta, w_eta> with the surface mass matrix.
    double energy() const
    {
        const CsrMatrix& M = op_.surface_mass();
        const auto Me = M * std::span<const double>(state_.eta.values);
        const auto Mw = M * std::span<const double>(state_.w_eta.values);
        return 0.5 * setup_.g * dot(state_.eta.values, Me) + 0.5 * dot(state_.phi_eta.values, Mw);
    }

    double probe_value(std::span<const double> field, double x) const
    {
        return evaluate_surface(op_.surface_mesh(), ref_, field, x);
    }

private:
    void copy_diagnostics()
    {
        state_.w_eta.values = op_.w_eta();
        state_.phi = ScalarField(FieldLocation::Volume, op_.phi());
        state_.w = ScalarField(FieldLocation::Volume, op_.w());
    }

    void sample_probes()
    {
        for (std::size_t i = 0; i < setup_.probes.size(); ++i) {
            const double x = setup_.probes[i];
            probe_series_[i].push_back({state_.t, probe_value(state_.eta.values, x),
                                        probe_value(state_.phi_eta.values, x), probe_value(state_.w_eta.values, x)});
        }
    }

    SimulationSetup setup_;
    ReferenceElement ref_;
    FreeSurfaceOperator op_;
    SimulationState state_;
    SimulationState last_good_;
    double dt_ = 0.0;
    long steps_ = 0;
    std::vector<std::vector<ProbeSample>> probe_series_;
};

} // namespace wavesem
