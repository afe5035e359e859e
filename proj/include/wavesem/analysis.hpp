#pragma once

// Error norms, convergence rates, harmonic fits, probe statistics and
// scaling efficiencies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mesh.hpp"

namespace wavesem {

/// max_i |reference(x_i) - numeric_i| over the surface DoFs.
inline double inf_error(const SurfaceMesh& mesh, std::span<const double> numeric,
                        const std::function<double(double)>& reference)
{
    if (static_cast<int>(numeric.size()) != mesh.num_dofs()) {
        throw DimensionMismatch("inf_error: field does not match the surface mesh");
    }
    double e = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        e = std::max(e, std::abs(reference(mesh.node_x()[i]) - numeric[i]));
    }
    return e;
}

/// Error samples against a resolution parameter (h_max, or p for p-studies).
struct ConvergenceRecord {
    std::string norm = "inf";
    std::vector<double> resolution;
    std::vector<double> error;

    void add(double h, double e)
    {
        resolution.push_back(h);
        error.push_back(e);
    }
};

/// Pairwise observed orders log(e1/e2)/log(h1/h2). Pairs with a zero error
/// have no defined rate.
inline std::vector<std::optional<double>> convergence_rate(const ConvergenceRecord& rec)
{
    if (rec.resolution.size() != rec.error.size()) {
        throw DimensionMismatch("convergence_rate: resolution and error lengths differ");
    }
    if (rec.error.size() < 2) {
        throw ValidationError("convergence", "at least two samples are needed");
    }
    std::vector<std::optional<double>> out;
    for (std::size_t i = 1; i < rec.error.size(); ++i) {
        const double e1 = rec.error[i - 1], e2 = rec.error[i];
        const double h1 = rec.resolution[i - 1], h2 = rec.resolution[i];
        if (e1 < 0.0 || e2 < 0.0 || !(h1 > 0.0) || !(h2 > 0.0) || h1 == h2) {
            throw ValidationError("convergence", "errors must be non-negative and resolutions distinct and positive");
        }
        if (e1 == 0.0 || e2 == 0.0) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(std::log(e1 / e2) / std::log(h1 / h2));
        }
    }
    return out;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceRecord& rec, const std::string& label = "h")
{
    const auto rates = rec.error.size() >= 2 ? convergence_rate(rec) : std::vector<std::optional<double>>{};
    os << label << ",error,order\n";
    for (std::size_t i = 0; i < rec.error.size(); ++i) {
        os << rec.resolution[i] << ',' << rec.error[i] << ',';
        if (i > 0 && rates[i - 1]) {
            os << *rates[i - 1];
        }
        os << '\n';
    }
}

struct HarmonicFit {
    double mean = 0.0;
    std::vector<double> cos_coeff;  // a_n
    std::vector<double> sin_coeff;  // b_n
    std::vector<double> amplitude;  // A_n = sqrt(a_n^2 + b_n^2)

    /// Complex amplitude Z_n with eta_n(t) = Re(Z_n exp(-i 2 pi n t / T)).
    std::complex<double> phasor(int n) const
    {
        return {cos_coeff[static_cast<std::size_t>(n - 1)], sin_coeff[static_cast<std::size_t>(n - 1)]};
    }
};

/// Least-squares fit of mean + sum_n a_n cos(2 pi n t/T) + b_n sin(2 pi n t/T).
inline HarmonicFit harmonic_fit(std::span<const double> t, std::span<const double> eta, double period, int n_max)
{
    if (t.size() != eta.size()) {
        throw DimensionMismatch("harmonic_fit: time and value series differ in length");
    }
    if (!(period > 0.0) || n_max < 1) {
        throw ValidationError("harmonic_fit", "period must be positive and n_max >= 1");
    }
    const Eigen::Index m = static_cast<Eigen::Index>(t.size());
    const Eigen::Index cols = 2 * n_max + 1;
    if (m < cols) {
        throw RankDeficient("harmonic_fit: " + std::to_string(m) + " samples for " + std::to_string(cols) +
                            " unknowns");
    }
    Eigen::MatrixXd A(m, cols);
    Eigen::VectorXd b(m);
    const double w = 2.0 * std::numbers::pi / period;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double ti = t[static_cast<std::size_t>(i)];
        A(i, 0) = 1.0;
        for (int n = 1; n <= n_max; ++n) {
            A(i, 2 * n - 1) = std::cos(n * w * ti);
            A(i, 2 * n) = std::sin(n * w * ti);
        }
        b(i) = eta[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) {
        throw RankDeficient("harmonic_fit: regressors are linearly dependent (rank " + std::to_string(qr.rank()) +
                            " of " + std::to_string(cols) + ")");
    }
    const Eigen::VectorXd x = qr.solve(b);
    HarmonicFit fit;
    fit.mean = x(0);
    for (int n = 1; n <= n_max; ++n) {
        const double a = x(2 * n - 1), s = x(2 * n);
        fit.cos_coeff.push_back(a);
        fit.sin_coeff.push_back(s);
        fit.amplitude.push_back(std::hypot(a, s));
    }
    return fit;
}

/// Samples with t >= t_start.
inline std::pair<std::vector<double>, std::vector<double>> time_window(std::span<const double> t,
                                                                       std::span<const double> v, double t_start,
                                                                       double t_end = std::numeric_limits<double>::infinity())
{
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= t_start && t[i] <= t_end) {
            out.first.push_back(t[i]);
            out.second.push_back(v[i]);
        }
    }
    return out;
}

inline void write_harmonics_csv(std::ostream& os, const std::vector<std::pair<double, HarmonicFit>>& fits)
{
    os << "x,n,amplitude,cos,sin\n";
    for (const auto& [x, fit] : fits) {
        os << x << ",0," << fit.mean << ',' << fit.mean << ",0\n";
        for (std::size_t n = 0; n < fit.amplitude.size(); ++n) {
            os << x << ',' << n + 1 << ',' << fit.amplitude[n] << ',' << fit.cos_coeff[n] << ',' << fit.sin_coeff[n]
               << '\n';
        }
    }
}

struct ProbeStats {
    double eta_max = 0.0;       // maximum elevation (run-up)
    double eta_variation = 0.0; // max - min
};

inline ProbeStats probe_stats(std::span<const double> eta)
{
    if (eta.empty()) {
        throw ValidationError("probe_stats", "empty series");
    }
    const auto [lo, hi] = std::minmax_element(eta.begin(), eta.end());
    return {*hi, *hi - *lo};
}

/// Incident and reflected first-harmonic amplitudes from two probes a
/// distance apart along the wave direction (x2 > x1).
struct ReflectionEstimate {
    double incident = 0.0;
    double reflected = 0.0;
    double coefficient() const { return incident > 0.0 ? reflected / incident : 0.0; }
};

inline ReflectionEstimate two_probe_reflection(std::complex<double> z1, std::complex<double> z2, double x1, double x2,
                                               double k)
{
    // Z(x) = a_I exp(ikx) + a_R exp(-ikx)
    const double s = std::sin(k * (x2 - x1));
    if (std::abs(s) < 0.05) {
        throw ValidationError("reflection", "probe spacing is too close to a multiple of half a wavelength");
    }
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> e1 = std::exp(i * k * x1), e2 = std::exp(i * k * x2);
    const std::complex<double> det = e1 / e2 - e2 / e1;
    const std::complex<double> aI = (z1 / e2 - z2 / e1) / det;
    const std::complex<double> aR = (e1 * z2 - e2 * z1) / det;
    return {std::abs(aI), std::abs(aR)};
}

// ---------------------------------------------------------------------------
// scaling

/// gamma_s = T_b N_b / (T_N N)
inline double strong_efficiency(double t_base, int n_base, double t_n, int n)
{
    if (!(t_base > 0.0) || !(t_n > 0.0) || n_base < 1 || n < 1) {
        throw ValidationError("scaling", "times and worker counts must be positive");
    }
    return t_base * n_base / (t_n * n);
}

/// gamma_w = T_b / T_N
inline double weak_efficiency(double t_base, double t_n)
{
    if (!(t_base > 0.0) || !(t_n > 0.0)) {
        throw ValidationError("scaling", "times must be positive");
    }
    return t_base / t_n;
}

enum class ScalingKind { Strong, Weak };

struct ScalingRecord {
    ScalingKind kind = ScalingKind::Strong;
    std::vector<int> workers;
    std::vector<double> seconds;
    std::size_t baseline = 0;

    void add(int n, double t)
    {
        workers.push_back(n);
        seconds.push_back(t);
    }
};

struct ScalingRow {
    int workers;
    double seconds;
    double speedup;
    double ideal;
    double efficiency;
};

inline std::vector<ScalingRow> scaling_metrics(const ScalingRecord& rec)
{
    if (rec.workers.size() != rec.seconds.size() || rec.workers.empty() || rec.baseline >= rec.workers.size()) {
        throw ValidationError("scaling", "empty or inconsistent scaling record");
    }
    const double tb = rec.seconds[rec.baseline];
    const int nb = rec.workers[rec.baseline];
    std::vector<ScalingRow> rows;
    for (std::size_t i = 0; i < rec.workers.size(); ++i) {
        const double t = rec.seconds[i];
        const int n = rec.workers[i];
        const double eff = rec.kind == ScalingKind::Strong ? strong_efficiency(tb, nb, t, n) : weak_efficiency(tb, t);
        rows.push_back({n, t, tb / t, static_cast<double>(n) / nb, eff});
    }
    return rows;
}

inline void write_scaling_csv(std::ostream& os, const ScalingRecord& rec, const std::string& routine = "total",
                              bool header = true)
{
    if (header) {
        os << "routine,workers,seconds,speedup,ideal_speedup,"
           << (rec.kind == ScalingKind::Strong ? "gamma_s" : "gamma_w") << '\n';
    }
    for (const auto& r : scaling_metrics(rec)) {
        os << routine << ',' << r.workers << ',' << r.seconds << ',' << r.speedup << ',' << r.ideal << ','
           << r.efficiency << '\n';
    }
}

} // namespace wavesem
