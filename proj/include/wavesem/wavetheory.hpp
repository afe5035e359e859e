#pragma once

// Regular wave solutions: linear (Airy) theory, steady stream-function waves
// of arbitrary steepness and the maximum-steepness fit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "physics.hpp"

namespace wavesem {

/// Completed description of a regular wave. All quantities SI.
struct WaveSpec {
    double depth = 0.0;
    double wavelength = 0.0;
    double period = 0.0;
    double height = 0.0;
    double k = 0.0;
    double omega = 0.0;
    double g = kGravity;

    double kh() const { return k * depth; }
    double steepness() const { return height / wavelength; }
    double celerity() const { return wavelength / period; }
};

/// What the caller knows about a wave: depth plus one of period, wavelength
/// or kh, and one of height or relative steepness (H/L over its maximum).
struct WaveInput {
    double depth = 0.0;
    std::optional<double> period;
    std::optional<double> wavelength;
    std::optional<double> kh;
    std::optional<double> height;
    std::optional<double> relative_steepness;
    double g = kGravity;
};

/// Wave number k solving omega^2 = g k tanh(k h), safeguarded Newton.
inline double wave_number(double omega, double depth, double g = kGravity)
{
    if (!(omega > 0.0) || !(depth > 0.0)) {
        throw ValidationError("wave", "frequency and depth must be positive");
    }
    const double w2 = omega * omega;
    double lo = 0.0;
    double hi = std::max(w2 / g * 2.0, 2.0 * omega / std::sqrt(g * depth)) + 1.0;
    // Eckart's approximation as the starting point
    double k = w2 / (g * std::sqrt(std::tanh(w2 * depth / g)));
    for (int it = 0; it < 100; ++it) {
        const double t = std::tanh(k * depth);
        const double f = g * k * t - w2;
        if (std::abs(f) <= 1e-15 * w2) {
            return k;
        }
        if (f > 0.0) {
            hi = k;
        } else {
            lo = k;
        }
        const double df = g * t + g * k * depth * (1.0 - t * t);
        double kn = k - f / df;
        if (!(kn > lo && kn < hi)) {
            kn = 0.5 * (lo + hi);
        }
        if (std::abs(kn - k) <= 1e-16 * k) {
            return kn;
        }
        k = kn;
    }
    throw WaveSolverError("dispersion relation did not converge in 100 iterations");
}

/// Maximum steepness H_max/L from the rational fit in q = L/h.
inline double max_steepness(double wavelength, double depth)
{
    const double q = wavelength / depth;
    const double num = 0.141063 * q + 0.0095721 * q * q + 0.0077829 * q * q * q;
    const double den = 1.0 + 0.0788340 * q + 0.0317567 * q * q + 0.0093407 * q * q * q;
    return (num / den) * depth / wavelength;
}

inline double max_steepness(const WaveSpec& spec)
{
    return max_steepness(spec.wavelength, spec.depth);
}

/// Complete a WaveInput using linear dispersion.
inline WaveSpec dispersion_solve(const WaveInput& in)
{
    if (!(in.depth > 0.0)) {
        throw ValidationError("wave.depth", "depth must be positive");
    }
    const int given = (in.period ? 1 : 0) + (in.wavelength ? 1 : 0) + (in.kh ? 1 : 0);
    if (given != 1) {
        throw ValidationError("wave", "exactly one of period, wavelength or kh is required");
    }
    WaveSpec s;
    s.depth = in.depth;
    s.g = in.g;
    if (in.period) {
        if (!(*in.period > 0.0)) {
            throw ValidationError("wave.period", "period must be positive");
        }
        s.period = *in.period;
        s.omega = 2.0 * std::numbers::pi / s.period;
        s.k = wave_number(s.omega, s.depth, s.g);
        s.wavelength = 2.0 * std::numbers::pi / s.k;
    } else {
        const double k = in.wavelength ? 2.0 * std::numbers::pi / *in.wavelength : *in.kh / in.depth;
        if (!(k > 0.0)) {
            throw ValidationError(in.wavelength ? "wave.wavelength" : "wave.kh", "must be positive");
        }
        s.k = k;
        s.wavelength = 2.0 * std::numbers::pi / k;
        s.omega = std::sqrt(s.g * k * std::tanh(k * s.depth));
        s.period = 2.0 * std::numbers::pi / s.omega;
    }
    if (in.height && in.relative_steepness) {
        throw ValidationError("wave", "give either height or relative steepness, not both");
    }
    if (in.height) {
        s.height = *in.height;
    } else if (in.relative_steepness) {
        s.height = *in.relative_steepness * max_steepness(s.wavelength, s.depth) * s.wavelength;
    }
    if (s.height < 0.0) {
        throw ValidationError("wave.height", "height must be non-negative");
    }
    return s;
}

struct WaveKinematics {
    double eta = 0.0;
    double phi = 0.0;
    double phi_eta = 0.0; // potential on the free surface
    double u = 0.0;
    double w = 0.0;
    bool extrapolated = false; // evaluation point above the free surface
};

namespace detail {
/// cosh(a)/cosh(b) and sinh(a)/cosh(b) without overflow, a, b >= 0-ish.
inline std::pair<double, double> hyperbolic_ratios(double a, double b)
{
    const double e1 = std::exp(a - b);
    const double e2 = std::exp(-a - b);
    const double den = 1.0 + std::exp(-2.0 * b);
    return {(e1 + e2) / den, (e1 - e2) / den};
}
} // namespace detail

/// Linear wave eta = H/2 cos(kx - wt) over depth h.
class AiryWave {
public:
    explicit AiryWave(WaveSpec spec) : spec_(spec) {}
    const WaveSpec& spec() const { return spec_; }
    double celerity() const { return spec_.omega / spec_.k; }

    WaveKinematics eval(double x, double z, double t) const
    {
        const double a = 0.5 * spec_.height;
        const double th = spec_.k * x - spec_.omega * t;
        const auto [ch, sh] = detail::hyperbolic_ratios(spec_.k * (z + spec_.depth), spec_.k * spec_.depth);
        const double amp = a * spec_.g / spec_.omega;
        WaveKinematics out;
        out.eta = a * std::cos(th);
        out.phi = amp * ch * std::sin(th);
        out.u = amp * spec_.k * ch * std::cos(th);
        out.w = amp * spec_.k * sh * std::sin(th);
        out.phi_eta = amp * std::sin(th); // linear: surface at z = 0
        out.extrapolated = z > out.eta;
        return out;
    }

    /// Surface quantities at z = 0 (the linearized free surface).
    WaveKinematics surface(double x, double t) const { return eval(x, 0.0, t); }

private:
    WaveSpec spec_;
};

inline WaveKinematics airy_wave(const WaveSpec& spec, double x, double z, double t)
{
    return AiryWave(spec).eval(x, z, t);
}

/// Default Fourier mode count for a given relative steepness and kh.
// Past about 28 modes the unresolved high harmonics push the residual floor above 1e-10.
inline int default_stream_function_modes(double relative_steepness, double /*kh*/)
{
    return 16 + static_cast<int>(std::ceil(8.0 * std::clamp(relative_steepness, 0.0, 1.0)));
}

/// Steady periodic wave from a truncated Fourier stream function, solved by
/// collocation at N+1 points over half a wavelength. Zero Eulerian mean
/// current. The potential returned by eval() omits the uniform drift
/// -bernoulli_constant()*t, which keeps it periodic in time.
class StreamFunctionWave {
public:
    struct Options {
        int modes = 0;              // 0: default_stream_function_modes
        int continuation_steps = 0; // 0: automatic
        double tolerance = 1e-12;
        int max_newton = 60;
    };

    /// Solve for `spec` (depth, height and either wavelength or period).
    /// When `period_given` is true the period is held fixed and the
    /// wavelength is part of the solution.
    static StreamFunctionWave solve(const WaveSpec& spec, bool period_given, Options opts)
    {
        StreamFunctionWave w;
        w.solve_impl(spec, period_given, opts);
        return w;
    }

    static StreamFunctionWave solve(const WaveSpec& spec, bool period_given = false)
    {
        return solve(spec, period_given, Options{});
    }

    const WaveSpec& spec() const { return spec_; }
    int modes() const { return N_; }
    double celerity() const { return c_ * vel_; }
    double wavelength() const { return spec_.wavelength; }
    double period() const { return spec_.period; }
    double wave_number() const { return spec_.k; }
    double max_residual() const { return residual_; }
    /// eta - z where the Bernoulli constant in the fixed frame is absorbed.
    double bernoulli_constant() const { return bernoulli_; }
    /// Surface elevations at the collocation points x_m = m L / (2N).
    std::vector<double> collocation_eta() const
    {
        std::vector<double> out(eta_.size());
        for (std::size_t m = 0; m < eta_.size(); ++m) {
            out[m] = (eta_[m] - 1.0) * d_;
        }
        return out;
    }
    std::vector<double> collocation_x() const
    {
        std::vector<double> out(eta_.size());
        for (std::size_t m = 0; m < eta_.size(); ++m) {
            out[m] = static_cast<double>(m) * spec_.wavelength / (2.0 * N_);
        }
        return out;
    }
    double crest_elevation() const { return (eta_.front() - 1.0) * d_; }
    double trough_elevation() const { return (eta_.back() - 1.0) * d_; }

    double surface_elevation(double x, double t) const
    {
        const double kX = spec_.k * (x - celerity() * t);
        double s = 0.0;
        for (int j = 0; j <= N_; ++j) {
            s += E_[static_cast<std::size_t>(j)] * std::cos(j * kX);
        }
        return (s - 1.0) * d_;
    }

    WaveKinematics eval(double x, double z, double t) const
    {
        WaveKinematics out;
        out.eta = surface_elevation(x, t);
        out.extrapolated = z > out.eta + 1e-12 * d_;
        const auto at = [&](double zz, double& phi, double& u, double& w) {
            const double kX = spec_.k * (x - celerity() * t);
            const double Z = (zz + d_) / d_;
            const double kn = k_nd_;
            phi = (c_ - ubar_) * (x / d_);
            u = c_ - ubar_;
            w = 0.0;
            for (int j = 1; j <= N_; ++j) {
                const auto [ch, sh] = detail::hyperbolic_ratios(j * kn * Z, j * kn);
                const double b = B_[static_cast<std::size_t>(j - 1)];
                phi += b * ch * std::sin(j * kX);
                u += j * kn * b * ch * std::cos(j * kX);
                w += j * kn * b * sh * std::sin(j * kX);
            }
            phi *= vel_ * d_;
            u *= vel_;
            w *= vel_;
        };
        at(z, out.phi, out.u, out.w);
        double pu, pw;
        at(out.eta, out.phi_eta, pu, pw);
        return out;
    }

    void write_profile_csv(std::ostream& os, int samples) const
    {
        os << "x,eta,phi_eta,w_eta\n";
        for (int i = 0; i < samples; ++i) {
            const double x = spec_.wavelength * i / samples;
            const WaveKinematics s = eval(x, surface_elevation(x, 0.0), 0.0);
            os << x << ',' << s.eta << ',' << s.phi_eta << ',' << s.w << '\n';
        }
    }

private:
    // nondimensional unknowns (depth = 1, g = 1)
    int N_ = 0;
    double k_nd_ = 0.0;
    std::vector<double> eta_;
    std::vector<double> B_;
    double ubar_ = 0.0, c_ = 0.0, Q_ = 0.0, R_ = 0.0;
    std::vector<double> E_;
    double d_ = 1.0, vel_ = 1.0;
    double residual_ = 0.0;
    double bernoulli_ = 0.0;
    WaveSpec spec_;

    int size() const { return 2 * N_ + 6; }
    int i_eta(int m) const { return 1 + m; }
    int i_B(int j) const { return N_ + 1 + j; } // j = 1..N
    int i_ubar() const { return 2 * N_ + 2; }
    int i_c() const { return 2 * N_ + 3; }
    int i_Q() const { return 2 * N_ + 4; }
    int i_R() const { return 2 * N_ + 5; }

    void evaluate(const Eigen::VectorXd& x, double H, bool period_given, double target, Eigen::VectorXd& F,
                  Eigen::MatrixXd& Jm) const
    {
        const int n = size();
        F.setZero(n);
        Jm.setZero(n, n);
        const double k = x(0);
        const double ubar = x(i_ubar());
        const double c = x(i_c());
        const double Q = x(i_Q());
        const double R = x(i_R());
        const double pi = std::numbers::pi;
        for (int m = 0; m <= N_; ++m) {
            const double eta = x(i_eta(m));
            double psi = -ubar * eta + Q;
            double U = -ubar, W = 0.0;
            double dpsi_dk = 0.0, dU_dk = 0.0, dW_dk = 0.0;
            double dU_deta = 0.0, dW_deta = 0.0;
            std::vector<double> Sj(static_cast<std::size_t>(N_ + 1)), Cj(Sj.size()), cs(Sj.size()), sn(Sj.size());
            for (int j = 1; j <= N_; ++j) {
                const auto [C, S] = detail::hyperbolic_ratios(j * k * eta, j * k);
                const double th = std::tanh(j * k);
                const double cj = std::cos(j * m * pi / N_);
                const double sj = std::sin(j * m * pi / N_);
                const double b = x(i_B(j));
                const double jk = j * k;
                Sj[static_cast<std::size_t>(j)] = S;
                Cj[static_cast<std::size_t>(j)] = C;
                cs[static_cast<std::size_t>(j)] = cj;
                sn[static_cast<std::size_t>(j)] = sj;
                psi += b * S * cj;
                U += jk * b * C * cj;
                W += jk * b * S * sj;
                const double dS_dk = j * (eta * C - S * th);
                const double dC_dk = j * (eta * S - C * th);
                dpsi_dk += b * dS_dk * cj;
                dU_dk += j * b * (C + k * dC_dk) * cj;
                dW_dk += j * b * (S + k * dS_dk) * sj;
                dU_deta += jk * jk * b * S * cj;
                dW_deta += jk * jk * b * C * sj;
            }
            const int rk = m;
            const int rd = N_ + 1 + m;
            F(rk) = psi;
            F(rd) = 0.5 * (U * U + W * W) + eta - R;
            Jm(rk, 0) = dpsi_dk;
            Jm(rk, i_eta(m)) = U;
            Jm(rk, i_ubar()) = -eta;
            Jm(rk, i_Q()) = 1.0;
            Jm(rd, 0) = U * dU_dk + W * dW_dk;
            Jm(rd, i_eta(m)) = U * dU_deta + W * dW_deta + 1.0;
            Jm(rd, i_ubar()) = -U;
            Jm(rd, i_R()) = -1.0;
            for (int j = 1; j <= N_; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                Jm(rk, i_B(j)) = Sj[sj] * cs[sj];
                Jm(rd, i_B(j)) = U * j * k * Cj[sj] * cs[sj] + W * j * k * Sj[sj] * sn[sj];
            }
        }
        const int r_mean = 2 * N_ + 2;
        double mean = 0.5 * (x(i_eta(0)) + x(i_eta(N_)));
        for (int m = 1; m < N_; ++m) {
            mean += x(i_eta(m));
        }
        F(r_mean) = mean / N_ - 1.0;
        for (int m = 0; m <= N_; ++m) {
            Jm(r_mean, i_eta(m)) = (m == 0 || m == N_) ? 0.5 / N_ : 1.0 / N_;
        }
        const int r_h = 2 * N_ + 3;
        F(r_h) = x(i_eta(0)) - x(i_eta(N_)) - H;
        Jm(r_h, i_eta(0)) = 1.0;
        Jm(r_h, i_eta(N_)) = -1.0;
        const int r_cur = 2 * N_ + 4;
        F(r_cur) = c - ubar;
        Jm(r_cur, i_c()) = 1.0;
        Jm(r_cur, i_ubar()) = -1.0;
        const int r_last = 2 * N_ + 5;
        if (period_given) {
            F(r_last) = k * c * target - 2.0 * pi;
            Jm(r_last, 0) = c * target;
            Jm(r_last, i_c()) = k * target;
        } else {
            F(r_last) = k - target;
            Jm(r_last, 0) = 1.0;
        }
    }

    Eigen::VectorXd linear_guess(double H, double k) const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
        const double c = std::sqrt(std::tanh(k) / k);
        x(0) = k;
        for (int m = 0; m <= N_; ++m) {
            x(i_eta(m)) = 1.0 + 0.5 * H * std::cos(m * std::numbers::pi / N_);
        }
        x(i_B(1)) = c * 0.5 * H / std::tanh(k);
        x(i_ubar()) = c;
        x(i_c()) = c;
        x(i_Q()) = c;
        x(i_R()) = 0.5 * c * c + 1.0;
        return x;
    }

    // Returns the final residual. Steps that stall at the roundoff floor count as converged.
    double newton(Eigen::VectorXd& x, double H, bool period_given, double target, const Options& opts,
                  bool& converged) const
    {
        Eigen::VectorXd F;
        Eigen::MatrixXd J;
        evaluate(x, H, period_given, target, F, J);
        double res = F.cwiseAbs().maxCoeff();
        converged = res <= opts.tolerance;
        for (int it = 0; it < opts.max_newton && !converged; ++it) {
            const Eigen::VectorXd dx = J.fullPivLu().solve(-F);
            if (!dx.allFinite()) {
                break;
            }
            double lambda = 1.0;
            Eigen::VectorXd trial;
            double tres = 0.0;
            for (int ls = 0; ls < 12; ++ls) {
                trial = x + lambda * dx;
                evaluate(trial, H, period_given, target, F, J);
                tres = F.cwiseAbs().maxCoeff();
                if (std::isfinite(tres) && (tres < res || tres <= opts.tolerance)) {
                    break;
                }
                lambda *= 0.5;
            }
            if (!std::isfinite(tres)) {
                break;
            }
            if (!(tres < res) && res <= 1e-8) {
                converged = true; // no descent left at the roundoff floor
                break;
            }
            x = trial;
            res = tres;
            converged = res <= opts.tolerance;
        }
        return res;
    }

    void solve_impl(const WaveSpec& spec, bool period_given, const Options& opts)
    {
        if (!(spec.depth > 0.0) || !(spec.height > 0.0)) {
            throw ValidationError("wave", "stream-function wave needs positive depth and height");
        }
        const double g = spec.g;
        d_ = spec.depth;
        vel_ = std::sqrt(g * d_);
        const double time_scale = std::sqrt(d_ / g);
        const double ratio = spec.height / (max_steepness(spec) * spec.wavelength);
        if (ratio >= 1.0) {
            throw WaveSolverError("relative steepness >= 100%: wave exceeds the breaking limit");
        }
        N_ = opts.modes > 0 ? opts.modes : default_stream_function_modes(ratio, spec.kh());
        const double H = spec.height / d_;
        const double target = period_given ? spec.period / time_scale : spec.k * d_;
        const double k0 = spec.k * d_;
        int steps = opts.continuation_steps;
        if (steps <= 0) {
            steps = ratio > 0.5 ? 10 : 1;
        }
        Eigen::VectorXd x = linear_guess(H / steps, k0);
        Eigen::VectorXd prev;
        double res = 0.0;
        for (int s = 1; s <= steps; ++s) {
            const double Hs = H * s / steps;
            if (s > 1 && prev.size() == x.size()) {
                const Eigen::VectorXd cur = x;
                x = 2.0 * cur - prev; // linear extrapolation in H
                prev = cur;
            } else if (s > 1) {
                prev = x;
            }
            Eigen::VectorXd attempt = x;
            bool ok = false;
            res = newton(attempt, Hs, period_given, target, opts, ok);
            if (!ok && s > 1) {
                // fall back to the last converged state without extrapolation
                attempt = prev;
                res = newton(attempt, Hs, period_given, target, opts, ok);
            }
            if (!ok) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3e", res);
                throw WaveSolverError("stream-function Newton iteration diverged at step " + std::to_string(s) +
                                      " of " + std::to_string(steps) + " (residual " + buf + ")" +
                                      "; the wave may be too steep, try more continuation steps or modes");
            }
            if (s == 1) {
                prev = attempt;
            }
            x = attempt;
        }
        residual_ = res;
        k_nd_ = x(0);
        eta_.resize(static_cast<std::size_t>(N_ + 1));
        for (int m = 0; m <= N_; ++m) {
            eta_[static_cast<std::size_t>(m)] = x(i_eta(m));
        }
        B_.resize(static_cast<std::size_t>(N_));
        for (int j = 1; j <= N_; ++j) {
            B_[static_cast<std::size_t>(j - 1)] = x(i_B(j));
        }
        ubar_ = x(i_ubar());
        c_ = x(i_c());
        Q_ = x(i_Q());
        R_ = x(i_R());
        // cosine coefficients of eta (DCT-I through the collocation points)
        E_.assign(static_cast<std::size_t>(N_ + 1), 0.0);
        for (int j = 0; j <= N_; ++j) {
            double s = 0.0;
            for (int m = 0; m <= N_; ++m) {
                const double wgt = (m == 0 || m == N_) ? 0.5 : 1.0;
                s += wgt * eta_[static_cast<std::size_t>(m)] * std::cos(j * m * std::numbers::pi / N_);
            }
            s *= 2.0 / N_;
            if (j == 0 || j == N_) {
                s *= 0.5;
            }
            E_[static_cast<std::size_t>(j)] = s;
        }
        spec_ = spec;
        spec_.k = k_nd_ / d_;
        spec_.wavelength = 2.0 * std::numbers::pi / spec_.k;
        spec_.period = spec_.wavelength / (c_ * vel_);
        spec_.omega = 2.0 * std::numbers::pi / spec_.period;
        // phi_t + |grad phi|^2/2 + g eta = bernoulli on the surface
        bernoulli_ = (R_ + 0.5 * c_ * c_ - c_ * ubar_ - 1.0) * g * d_;
    }
};

inline StreamFunctionWave stream_function_solve(const WaveSpec& spec, int modes = 0, bool period_given = false)
{
    StreamFunctionWave::Options o;
    o.modes = modes;
    return StreamFunctionWave::solve(spec, period_given, o);
}

} // namespace wavesem
