#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "wavesem/basis.hpp"
#include "wavesem/filter.hpp"

using namespace wavesem;

namespace {

// Plain recurrence, independent of the library's legendre().
double legendre_ref(int n, double x)
{
    double p0 = 1.0, p1 = x;
    if (n == 0) return 1.0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double psi_ref(int j, double r) { return std::sqrt((2.0 * j + 1.0) / 2.0) * legendre_ref(j, r); }

} // namespace

TEST(GllNodes, OrderOne)
{
    const auto q = gll_nodes(1);
    ASSERT_EQ(q.size(), 2);
    EXPECT_DOUBLE_EQ(q.points[0], -1.0);
    EXPECT_DOUBLE_EQ(q.points[1], 1.0);
    EXPECT_NEAR(q.weights[0], 1.0, 1e-15);
    EXPECT_NEAR(q.weights[1], 1.0, 1e-15);
}

TEST(GllNodes, OrderTwo)
{
    const auto q = gll_nodes(2);
    EXPECT_NEAR(q.points[1], 0.0, 1e-15);
    EXPECT_NEAR(q.weights[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(q.weights[1], 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(q.weights[2], 1.0 / 3.0, 1e-15);
}

TEST(GllNodes, OrderFourInteriorNodes)
{
    // roots of P4'(x) = (5/2)(7x^3 - 3x): 0 and +-sqrt(3/7)
    const auto q = gll_nodes(4);
    EXPECT_NEAR(q.points[1], -std::sqrt(3.0 / 7.0), 1e-14);
    EXPECT_NEAR(q.points[2], 0.0, 1e-14);
    EXPECT_NEAR(q.points[3], std::sqrt(3.0 / 7.0), 1e-14);
    EXPECT_NEAR(q.weights[0], 0.1, 1e-14);
    EXPECT_NEAR(q.weights[1], 49.0 / 90.0, 1e-14);
    EXPECT_NEAR(q.weights[2], 32.0 / 45.0, 1e-14);
}

TEST(GllNodes, WeightsPositiveSumToTwo)
{
    for (int p = 1; p <= 12; ++p) {
        const auto q = gll_nodes(p);
        double s = 0.0;
        for (double w : q.weights) {
            EXPECT_GT(w, 0.0);
            s += w;
        }
        EXPECT_NEAR(s, 2.0, 1e-13) << "p=" << p;
        for (int i = 1; i <= p; ++i) {
            EXPECT_GT(q.points[static_cast<std::size_t>(i)], q.points[static_cast<std::size_t>(i - 1)]);
        }
    }
}

TEST(GllNodes, RejectsOrderZero) { EXPECT_THROW(gll_nodes(0), ValidationError); }

TEST(Quadrature, TwoPointGauss)
{
    const auto q = quadrature_rule(1, QuadratureKind::Gauss);
    EXPECT_NEAR(q.points[0], -1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.points[1], 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.weights[0], 1.0, 1e-15);
    EXPECT_NEAR(q.weights[1], 1.0, 1e-15);
}

TEST(Quadrature, SquareWithGaussTwo)
{
    const auto q = quadrature_rule(2, QuadratureKind::Gauss);
    double s = 0.0;
    for (int i = 0; i < q.size(); ++i) {
        s += q.weights[static_cast<std::size_t>(i)] * q.points[static_cast<std::size_t>(i)] * q.points[static_cast<std::size_t>(i)];
    }
    EXPECT_NEAR(s, 2.0 / 3.0, 1e-15);
}

TEST(Quadrature, ExactnessBoundary)
{
    auto integrate = [](const QuadratureRule& q, int k) {
        double s = 0.0;
        for (int i = 0; i < q.size(); ++i) {
            s += q.weights[static_cast<std::size_t>(i)] * std::pow(q.points[static_cast<std::size_t>(i)], k);
        }
        return s;
    };
    auto exact = [](int k) { return k % 2 == 1 ? 0.0 : 2.0 / (k + 1.0); };
    for (int qo = 1; qo <= 8; ++qo) {
        for (auto kind : {QuadratureKind::Gauss, QuadratureKind::GaussLobatto}) {
            const auto q = quadrature_rule(qo, kind);
            const int deg = q.exactness();
            EXPECT_EQ(deg, kind == QuadratureKind::Gauss ? 2 * qo + 1 : 2 * qo - 1);
            for (int k = 0; k <= deg; ++k) {
                EXPECT_NEAR(integrate(q, k), exact(k), 1e-13) << "q=" << qo << " k=" << k;
            }
            // first even degree beyond exactness is no longer integrated exactly
            EXPECT_GT(std::abs(integrate(q, deg + 1) - exact(deg + 1)), 1e-6) << "q=" << qo;
        }
    }
}

TEST(Vandermonde, LinearExample)
{
    const auto v = vandermonde(1, {-1.0, 1.0});
    EXPECT_NEAR(v.V(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(v.V(0, 1), -std::sqrt(1.5), 1e-15);
    EXPECT_NEAR(v.V(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(v.V(1, 1), std::sqrt(1.5), 1e-15);
}

TEST(Vandermonde, InverseAndModalColumns)
{
    const double eps = std::numeric_limits<double>::epsilon();
    for (int p = 1; p <= 10; ++p) {
        const ReferenceElement ref(p);
        const Eigen::MatrixXd I = ref.V() * ref.Vinv();
        EXPECT_LE((I - Eigen::MatrixXd::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff(), 100 * eps) << "p=" << p;
        for (int j = 0; j <= p; ++j) {
            Eigen::VectorXd samples(p + 1);
            for (int i = 0; i <= p; ++i) {
                samples(i) = psi_ref(j, ref.nodes()[static_cast<std::size_t>(i)]);
            }
            const Eigen::VectorXd modal = ref.Vinv() * samples;
            for (int i = 0; i <= p; ++i) {
                EXPECT_NEAR(modal(i), i == j ? 1.0 : 0.0, 1e-12);
            }
        }
    }
}

TEST(Vandermonde, RepeatedNodesAreSingular)
{
    EXPECT_THROW(vandermonde(2, {-1.0, 0.5, 0.5}), SingularSystem);
}

TEST(Vandermonde, GllOrthonormalityFailsOnlyForTopMode)
{
    for (int p = 2; p <= 8; ++p) {
        const ReferenceElement ref(p);
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(p + 1, p + 1);
        for (int i = 0; i <= p; ++i) {
            W(i, i) = ref.weights()[static_cast<std::size_t>(i)];
        }
        const Eigen::MatrixXd G = ref.V().transpose() * W * ref.V();
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < p; ++j) {
                EXPECT_NEAR(G(i, j), i == j ? 1.0 : 0.0, 1e-12);
            }
        }
        // GLL with p+1 points under-integrates psi_p^2: (2 + 1/p) instead of 1
        EXPECT_NEAR(G(p, p), 2.0 + 1.0 / p, 1e-11);

        const auto gauss = gauss_rule_for_degree(2 * p);
        const auto [B, dB] = ref.tabulate(gauss);
        Eigen::MatrixXd Wg = Eigen::MatrixXd::Zero(gauss.size(), gauss.size());
        for (int q = 0; q < gauss.size(); ++q) {
            Wg(q, q) = gauss.weights[static_cast<std::size_t>(q)];
        }
        const Eigen::MatrixXd Bm = B * ref.V();
        const Eigen::MatrixXd Gg = Bm.transpose() * Wg * Bm;
        EXPECT_LE((Gg - Eigen::MatrixXd::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Differentiation, MonomialsExact)
{
    for (int p = 1; p <= 10; ++p) {
        const ReferenceElement ref(p);
        for (int k = 0; k <= p; ++k) {
            Eigen::VectorXd f(p + 1), df(p + 1);
            for (int i = 0; i <= p; ++i) {
                const double r = ref.nodes()[static_cast<std::size_t>(i)];
                f(i) = std::pow(r, k);
                df(i) = k == 0 ? 0.0 : k * std::pow(r, k - 1);
            }
            EXPECT_LE((ref.D() * f - df).cwiseAbs().maxCoeff(), 1e-11) << "p=" << p << " k=" << k;
        }
    }
}

TEST(Filter, FactorsDefaults)
{
    const int p = 5;
    const auto s = filter_factors(p, {});
    EXPECT_EQ(s[0], 1.0);
    for (int j = 0; j < p; ++j) {
        EXPECT_EQ(s[static_cast<std::size_t>(j)], 1.0);
    }
    EXPECT_NEAR(s[p], std::numeric_limits<double>::epsilon(), 1e-20);
}

TEST(Filter, FactorsMonotoneInUnitInterval)
{
    FilterParams fp;
    fp.cutoff = 1;
    fp.strength = 10.0;
    fp.exponent = 4;
    const auto s = filter_factors(6, fp);
    EXPECT_EQ(s[0], 1.0);
    for (std::size_t j = 1; j < s.size(); ++j) {
        EXPECT_GT(s[j], 0.0);
        EXPECT_LE(s[j], 1.0);
        EXPECT_LE(s[j], s[j - 1]);
    }
}

TEST(Filter, RejectsBadParameters)
{
    FilterParams a;
    a.cutoff = 5;
    EXPECT_THROW(filter_factors(4, a), ValidationError);
    FilterParams b;
    b.strength = 0.0;
    EXPECT_THROW(filter_factors(4, b), ValidationError);
    FilterParams c;
    c.exponent = 3;
    EXPECT_THROW(filter_factors(4, c), ValidationError);
}

TEST(Filter, ConstantUnchangedTopModeDamped)
{
    FilterParams fp;
    fp.strength = 3.0;
    for (int p = 1; p <= 8; ++p) {
        const ReferenceElement ref(p, fp);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(p + 1);
        EXPECT_LE((ref.nodal_filter() * one - one).cwiseAbs().maxCoeff(), 1e-13);
        Eigen::VectorXd top(p + 1);
        for (int i = 0; i <= p; ++i) {
            top(i) = psi_ref(p, ref.nodes()[static_cast<std::size_t>(i)]);
        }
        EXPECT_LE((ref.nodal_filter() * top - std::exp(-3.0) * top).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Filter, MixedModeDampingMatchesModalTransform)
{
    FilterParams fp;
    fp.cutoff = 4;
    fp.strength = 36.04;
    fp.exponent = 2;
    const int p = 5;
    const ReferenceElement ref(p, fp);
    const double coeff[] = {0.3, -1.1, 0.7, 0.25, -0.4, 0.9};
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p + 1);
    for (int i = 0; i <= p; ++i) {
        for (int j = 0; j <= p; ++j) {
            g(i) += coeff[j] * psi_ref(j, ref.nodes()[static_cast<std::size_t>(i)]);
        }
    }
    const Eigen::VectorXd filtered = ref.nodal_filter() * g;
    for (int i = 0; i <= p; ++i) {
        double expect = 0.0;
        for (int j = 0; j <= p; ++j) {
            const double sigma = j <= 4 ? 1.0 : std::exp(-36.04);
            expect += sigma * coeff[j] * psi_ref(j, ref.nodes()[static_cast<std::size_t>(i)]);
        }
        EXPECT_NEAR(filtered(i), expect, 1e-12);
    }
}

TEST(ModalFilter, LinearFieldUnchanged)
{
    const auto mesh = build_surface_mesh(2.0, 5, 4, false);
    const ReferenceElement ref(4);
    const auto f = interpolate_surface(mesh, [](double x) { return 0.3 + 2.0 * x; });
    const auto g = apply_modal_filter(mesh, ref, f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(g[i], f[i], 1e-13);
    }
}

TEST(ModalFilter, FixedPointBelowCutoff)
{
    const int p = 6;
    const auto mesh = build_surface_mesh(1.0, 3, p, false);
    const ReferenceElement ref(p);
    // degree p-1 = j_c polynomial
    const auto f = interpolate_surface(mesh, [](double x) { return std::pow(x - 0.4, 5) - x * x; });
    const auto g = apply_modal_filter(mesh, ref, f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(g[i], f[i], 1e-12);
    }
}

TEST(ModalFilter, SingleElementTopMode)
{
    const int p = 4;
    FilterParams fp;
    fp.strength = 2.0;
    const auto mesh = build_surface_mesh(2.0, 1, p, false);
    const ReferenceElement ref(p, fp);
    const auto f = interpolate_surface(mesh, [&](double x) { return psi_ref(p, x - 1.0); });
    const auto g = apply_modal_filter(mesh, ref, f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(g[i], std::exp(-2.0) * f[i], 1e-12);
    }
}

TEST(ModalFilter, TwoElementsMatchDenseBlockOracle)
{
    const int p = 3;
    FilterParams fp;
    fp.strength = 1.5;
    const auto mesh = build_surface_mesh(1.0, 2, p, false);
    const ReferenceElement ref(p, fp);
    const auto f = interpolate_surface(mesh, [](double x) { return std::sin(3.0 * x) + std::exp(x); });
    // dense: block-diagonal filter on the broken (duplicated) vector, then average
    const int nb = 2 * (p + 1);
    Eigen::MatrixXd Fb = Eigen::MatrixXd::Zero(nb, nb);
    Fb.block(0, 0, p + 1, p + 1) = ref.V() * ref.F() * ref.Vinv();
    Fb.block(p + 1, p + 1, p + 1, p + 1) = ref.V() * ref.F() * ref.Vinv();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nb, mesh.num_dofs()); // scatter global -> broken
    for (int e = 0; e < 2; ++e) {
        for (int a = 0; a <= p; ++a) {
            S(e * (p + 1) + a, mesh.element_dofs(e)[static_cast<std::size_t>(a)]) = 1.0;
        }
    }
    Eigen::VectorXd fg(mesh.num_dofs());
    for (int i = 0; i < mesh.num_dofs(); ++i) fg(i) = f[static_cast<std::size_t>(i)];
    const Eigen::VectorXd counts = S.transpose() * Eigen::VectorXd::Ones(nb);
    const Eigen::VectorXd expect = (S.transpose() * (Fb * (S * fg))).cwiseQuotient(counts);
    const auto g = apply_modal_filter(mesh, ref, f);
    for (int i = 0; i < mesh.num_dofs(); ++i) {
        EXPECT_NEAR(g[static_cast<std::size_t>(i)], expect(i), 1e-13);
    }
}

TEST(ModalFilter, ElementModalEnergyNeverIncreases)
{
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int p = 2; p <= 7; ++p) {
        const ReferenceElement ref(p);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd g(p + 1);
            for (int i = 0; i <= p; ++i) g(i) = nd(rng);
            const double before = (ref.Vinv() * g).squaredNorm();
            const double after = (ref.Vinv() * (ref.nodal_filter() * g)).squaredNorm();
            EXPECT_LE(after, before * (1.0 + 1e-14));
        }
    }
}
