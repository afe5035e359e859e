#pragma once

// One-dimensional reference-element machinery on [-1, 1]: Legendre
// polynomials, Gauss and Gauss-Lobatto-Legendre rules, the modal Vandermonde
// matrix, nodal differentiation and the modal filter.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wavesem {

/// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x)
{
    if (n == 0) {
        return {1.0, 0.0};
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // p1 = P_n, p0 = P_{n-1}
    double dp;
    if (std::abs(x) == 1.0) {
        // P_n'(1) = n(n+1)/2, P_n'(-1) = (-1)^(n+1) n(n+1)/2
        dp = 0.5 * n * (n + 1.0);
        if (x < 0 && n % 2 == 0) {
            dp = -dp;
        }
    } else {
        dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    return {p1, dp};
}

/// Orthonormal Legendre mode sqrt((2j+1)/2) P_j and its derivative.
inline std::pair<double, double> orthonormal_legendre(int j, double r)
{
    const auto [p, dp] = legendre(j, r);
    const double s = std::sqrt((2.0 * j + 1.0) / 2.0);
    return {s * p, s * dp};
}

enum class QuadratureKind { Gauss, GaussLobatto };

struct QuadratureRule {
    QuadratureKind kind = QuadratureKind::Gauss;
    int order = 0; // q: the rule has q+1 points
    std::vector<double> points;
    std::vector<double> weights;

    int size() const { return static_cast<int>(points.size()); }
    /// Highest polynomial degree integrated exactly.
    int exactness() const { return kind == QuadratureKind::Gauss ? 2 * order + 1 : 2 * order - 1; }
};

namespace detail {

inline std::vector<double> gauss_points(int n, std::vector<double>& weights)
{
    std::vector<double> x(static_cast<std::size_t>(n));
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double r = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, r);
            const double dr = p / dp;
            r -= dr;
            if (std::abs(dr) < 1e-16) {
                break;
            }
        }
        const auto [p, dp] = legendre(n, r);
        (void)p;
        x[static_cast<std::size_t>(i)] = r;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - r * r) * dp * dp);
    }
    return x;
}

} // namespace detail

/// Gauss-Lobatto-Legendre nodes and weights for order p (p+1 points):
/// the endpoints plus the roots of P_p'.
inline QuadratureRule gll_nodes(int p)
{
    if (p < 1) {
        throw ValidationError("p", "GLL rule needs order >= 1");
    }
    QuadratureRule rule;
    rule.kind = QuadratureKind::GaussLobatto;
    rule.order = p;
    rule.points.resize(static_cast<std::size_t>(p + 1));
    rule.weights.resize(static_cast<std::size_t>(p + 1));
    rule.points.front() = -1.0;
    rule.points.back() = 1.0;
    for (int i = 1; i < p; ++i) {
        // Chebyshev-Gauss-Lobatto initial guess, Newton on P_p'(r) = 0.
        double r = -std::cos(std::numbers::pi * i / p);
        for (int it = 0; it < 100; ++it) {
            const auto [lp, dlp] = legendre(p, r);
            const double d2 = (2.0 * r * dlp - p * (p + 1.0) * lp) / (1.0 - r * r);
            const double dr = dlp / d2;
            r -= dr;
            if (std::abs(dr) < 1e-16) {
                break;
            }
        }
        rule.points[static_cast<std::size_t>(i)] = r;
    }
    for (int i = 0; i <= p; ++i) {
        const double lp = legendre(p, rule.points[static_cast<std::size_t>(i)]).first;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / (p * (p + 1.0) * lp * lp);
    }
    return rule;
}

/// Quadrature of order q: q+1 Gauss points (exact to degree 2q+1) or q+1
/// Gauss-Lobatto points (exact to degree 2q-1).
inline QuadratureRule quadrature_rule(int q, QuadratureKind kind)
{
    if (q < 1) {
        throw ValidationError("q", "quadrature order must be >= 1");
    }
    if (kind == QuadratureKind::GaussLobatto) {
        return gll_nodes(q);
    }
    QuadratureRule rule;
    rule.kind = QuadratureKind::Gauss;
    rule.order = q;
    rule.points = detail::gauss_points(q + 1, rule.weights);
    return rule;
}

/// Smallest Gauss rule integrating polynomials of `degree` exactly.
inline QuadratureRule gauss_rule_for_degree(int degree)
{
    int q = 1;
    while (2 * q + 1 < degree) {
        ++q;
    }
    return quadrature_rule(q, QuadratureKind::Gauss);
}

struct Vandermonde {
    Eigen::MatrixXd V;
    Eigen::MatrixXd Vinv;
};

/// V_ij = psi_j(r_i) with psi_j the orthonormal Legendre modes.
inline Vandermonde vandermonde(int p, const std::vector<double>& nodes)
{
    if (static_cast<int>(nodes.size()) != p + 1) {
        throw DimensionMismatch("vandermonde: expected p+1 nodes");
    }
    Vandermonde out;
    out.V.resize(p + 1, p + 1);
    for (int i = 0; i <= p; ++i) {
        for (int j = 0; j <= p; ++j) {
            out.V(i, j) = orthonormal_legendre(j, nodes[static_cast<std::size_t>(i)]).first;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(out.V);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw SingularSystem("vandermonde: nodes are not distinct");
    }
    out.Vinv = lu.inverse();
    return out;
}

struct FilterParams {
    int cutoff = -1;      // j_c; negative means p-1
    double strength = -std::log(std::numeric_limits<double>::epsilon());
    int exponent = 2;     // s
};

/// Modal damping factors sigma(j), j = 0..p.
inline std::vector<double> filter_factors(int p, const FilterParams& params)
{
    const int jc = params.cutoff < 0 ? std::max(0, p - 1) : params.cutoff;
    if (jc > p) {
        throw ValidationError("filter.cutoff", "cutoff mode exceeds polynomial order");
    }
    if (!(params.strength > 0.0)) {
        throw ValidationError("filter.alpha", "strength must be positive");
    }
    if (params.exponent < 2 || params.exponent % 2 != 0) {
        throw ValidationError("filter.s", "exponent must be even and >= 2");
    }
    std::vector<double> sigma(static_cast<std::size_t>(p + 1), 1.0);
    for (int j = jc + 1; j <= p; ++j) {
        const double eta = static_cast<double>(j - jc) / static_cast<double>(p - jc);
        sigma[static_cast<std::size_t>(j)] = std::exp(-params.strength * std::pow(eta, params.exponent));
    }
    return sigma;
}

inline Eigen::MatrixXd filter_matrix(int p, const FilterParams& params)
{
    const auto s = filter_factors(p, params);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (int j = 0; j <= p; ++j) {
        F(j, j) = s[static_cast<std::size_t>(j)];
    }
    return F;
}

/// Nodal reference element of order p on GLL nodes.
class ReferenceElement {
public:
    explicit ReferenceElement(int p, FilterParams filter = {})
        : order_(p), gll_(gll_nodes(p)), filter_params_(filter)
    {
        vdm_ = vandermonde(p, gll_.points);
        Eigen::MatrixXd Vr(p + 1, p + 1);
        for (int i = 0; i <= p; ++i) {
            for (int j = 0; j <= p; ++j) {
                Vr(i, j) = orthonormal_legendre(j, gll_.points[static_cast<std::size_t>(i)]).second;
            }
        }
        D_ = Vr * vdm_.Vinv;
        F_ = filter_matrix(p, filter);
        nodal_filter_ = vdm_.V * F_ * vdm_.Vinv;
    }

    int order() const { return order_; }
    int num_nodes() const { return order_ + 1; }
    const std::vector<double>& nodes() const { return gll_.points; }
    const std::vector<double>& weights() const { return gll_.weights; }
    const QuadratureRule& gll() const { return gll_; }
    const Eigen::MatrixXd& V() const { return vdm_.V; }
    const Eigen::MatrixXd& Vinv() const { return vdm_.Vinv; }
    /// D_ij = l_j'(r_i).
    const Eigen::MatrixXd& D() const { return D_; }
    const Eigen::MatrixXd& F() const { return F_; }
    /// V F V^-1 acting on local nodal values.
    const Eigen::MatrixXd& nodal_filter() const { return nodal_filter_; }
    const FilterParams& filter_params() const { return filter_params_; }

    /// Lagrange basis values l_j(r), j = 0..p.
    Eigen::RowVectorXd basis_at(double r) const
    {
        Eigen::RowVectorXd psi(order_ + 1);
        for (int j = 0; j <= order_; ++j) {
            psi(j) = orthonormal_legendre(j, r).first;
        }
        return psi * vdm_.Vinv;
    }

    Eigen::RowVectorXd basis_derivative_at(double r) const
    {
        Eigen::RowVectorXd dpsi(order_ + 1);
        for (int j = 0; j <= order_; ++j) {
            dpsi(j) = orthonormal_legendre(j, r).second;
        }
        return dpsi * vdm_.Vinv;
    }

    /// Tables B(q, j) = l_j(x_q) and dB(q, j) = l_j'(x_q) at rule points.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> tabulate(const QuadratureRule& rule) const
    {
        Eigen::MatrixXd B(rule.size(), order_ + 1);
        Eigen::MatrixXd dB(rule.size(), order_ + 1);
        for (int q = 0; q < rule.size(); ++q) {
            B.row(q) = basis_at(rule.points[static_cast<std::size_t>(q)]);
            dB.row(q) = basis_derivative_at(rule.points[static_cast<std::size_t>(q)]);
        }
        return {B, dB};
    }

private:
    int order_;
    QuadratureRule gll_;
    FilterParams filter_params_;
    Vandermonde vdm_;
    Eigen::MatrixXd D_;
    Eigen::MatrixXd F_;
    Eigen::MatrixXd nodal_filter_;
};

} // namespace wavesem
