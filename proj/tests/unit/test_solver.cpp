#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "wavesem/assembly.hpp"
#include "wavesem/solver.hpp"

using namespace wavesem;

namespace {

CsrMatrix diag_matrix(const std::vector<double>& d)
{
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.size(); ++i) {
        t.push_back({static_cast<int>(i), static_cast<int>(i), d[i]});
    }
    auto A = csr_from_triplets(static_cast<int>(d.size()), static_cast<int>(d.size()), t);
    A.symmetric = true;
    return A;
}

CsrMatrix poisson_1d(int n)
{
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    auto A = csr_from_triplets(n, n, t);
    A.symmetric = true;
    return A;
}

Eigen::MatrixXd dense(const CsrMatrix& A)
{
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = A.row_ptr[static_cast<std::size_t>(i)]; k < A.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            D(i, A.col_idx[static_cast<std::size_t>(k)]) = A.values[static_cast<std::size_t>(k)];
    return D;
}

CsrMatrix random_spd(int n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = u(rng);
    const Eigen::MatrixXd S = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t.push_back({i, j, S(i, j)});
    auto A = csr_from_triplets(n, n, t);
    A.symmetric = true;
    return A;
}

} // namespace

TEST(Csr, FromTripletsSumsDuplicates)
{
    const auto A = csr_from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}, {0, 1, 0.5}, {0, 0, 4.0}});
    EXPECT_EQ(A.nnz(), 3u);
    EXPECT_EQ(A.at(0, 1), 1.5);
    EXPECT_EQ(A.at(1, 1), 0.0);
    EXPECT_EQ(A.col_idx[0], 0);
    EXPECT_EQ(A.col_idx[1], 1);
    std::ostringstream os;
    write_coo(os, A);
    EXPECT_NE(os.str().find("0 1 1.5"), std::string::npos);
}

TEST(Cg, IdentityOneIteration)
{
    const auto A = diag_matrix(std::vector<double>(8, 1.0));
    std::vector<double> b{1, 2, 3, 4, 5, 6, 7, 8}, x(8, 0.0);
    IdentityPreconditioner I;
    const auto rep = cg_solve(A, b, x, I);
    EXPECT_EQ(rep.iterations, 1);
    EXPECT_TRUE(rep.converged);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)], 1e-15);
}

TEST(Cg, JacobiOnDiagonal)
{
    std::vector<double> d(10);
    for (int i = 0; i < 10; ++i) d[static_cast<std::size_t>(i)] = i + 1.0;
    const auto A = diag_matrix(d);
    std::vector<double> b(10, 1.0), x(10, 0.0);
    JacobiPreconditioner J(A);
    const auto rep = cg_solve(A, b, x, J);
    EXPECT_EQ(rep.iterations, 1);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], 1.0 / (i + 1), 1e-15);
}

TEST(Cg, PoissonMatchesDenseSolve)
{
    const int n = 50;
    const auto A = poisson_1d(n);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = std::sin(0.3 * i) + 0.1;
    const Eigen::VectorXd ref = dense(A).ldlt().solve(Eigen::Map<Eigen::VectorXd>(b.data(), n));
    for (auto kind : {PreconditionerKind::None, PreconditionerKind::Jacobi, PreconditionerKind::SymmetricGaussSeidel,
                      PreconditionerKind::Cholesky}) {
        std::vector<double> x(n, 0.0);
        auto M = make_preconditioner(kind, A);
        SolveOptions o;
        o.rtol = 1e-12;
        const auto rep = cg_solve(A, b, x, *M, o);
        EXPECT_TRUE(rep.converged);
        EXPECT_LE(rep.relative_residual, 1e-12);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], ref(i), 1e-9 * ref.cwiseAbs().maxCoeff());
        if (kind == PreconditionerKind::Cholesky) {
            EXPECT_LE(rep.iterations, 2);
        }
    }
}

TEST(Cg, ReportMatchesTrueResidual)
{
    const int n = 40;
    const auto A = poisson_1d(n);
    std::vector<double> b(n, 1.0), x(n, 0.0);
    JacobiPreconditioner J(A);
    const auto rep = cg_solve(A, b, x, J);
    const auto Ax = A * x;
    double r = 0.0;
    for (int i = 0; i < n; ++i) r += (b[static_cast<std::size_t>(i)] - Ax[static_cast<std::size_t>(i)]) * (b[static_cast<std::size_t>(i)] - Ax[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(rep.absolute_residual, std::sqrt(r), 1e-14);
    EXPECT_LE(rep.relative_residual, 1e-6);
    EXPECT_EQ(rep.converged, rep.relative_residual <= 1e-6 || rep.absolute_residual <= 1e-15);
}

TEST(Cg, NonConvergenceCarriesReport)
{
    const auto A = poisson_1d(200);
    std::vector<double> b(200, 1.0), x(200, 0.0);
    IdentityPreconditioner I;
    SolveOptions o;
    o.max_iterations = 5;
    try {
        cg_solve(A, b, x, I, o);
        FAIL();
    } catch (const NonConvergence& e) {
        EXPECT_EQ(e.report().iterations, 5);
        EXPECT_FALSE(e.report().converged);
    }
    o.throw_on_failure = false;
    std::fill(x.begin(), x.end(), 0.0);
    EXPECT_FALSE(cg_solve(A, b, x, I, o).converged);
}

TEST(Cg, IndefiniteDetected)
{
    const auto A = diag_matrix({1.0, -2.0, 3.0});
    std::vector<double> b{1.0, 1.0, 1.0}, x(3, 0.0);
    IdentityPreconditioner I;
    EXPECT_THROW(cg_solve(A, b, x, I), MatrixPropertyError);
}

TEST(Cg, ZeroRhsIsImmediate)
{
    const auto A = poisson_1d(10);
    std::vector<double> b(10, 0.0), x(10, 0.0);
    IdentityPreconditioner I;
    const auto rep = cg_solve(A, b, x, I);
    EXPECT_EQ(rep.iterations, 0);
    EXPECT_TRUE(rep.converged);
}

TEST(Cg, EnergyErrorMonotone)
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 30;
        const auto A = random_spd(n, rng);
        const Eigen::MatrixXd D = dense(A);
        std::vector<double> b(n);
        std::normal_distribution<double> nd;
        for (auto& v : b) v = nd(rng);
        const Eigen::VectorXd xs = D.ldlt().solve(Eigen::Map<Eigen::VectorXd>(b.data(), n));
        std::vector<double> x(n, 0.0);
        IdentityPreconditioner I;
        double prev = 1e300;
        for (int k = 1; k <= 15; ++k) {
            std::fill(x.begin(), x.end(), 0.0);
            SolveOptions o;
            o.max_iterations = k;
            o.throw_on_failure = false;
            o.rtol = 1e-14;
            cg_solve(A, b, x, I, o);
            const Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(x.data(), n) - xs;
            const double en = e.dot(D * e);
            EXPECT_LE(en, prev * (1 + 1e-12));
            prev = en;
        }
    }
}

TEST(Cg, ThreadCountIndependence)
{
    const auto A = poisson_1d(3000);
    std::vector<double> b(3000);
    for (int i = 0; i < 3000; ++i) b[static_cast<std::size_t>(i)] = std::cos(0.01 * i);
    JacobiPreconditioner J(A);
    std::vector<double> x1(3000, 0.0), x4(3000, 0.0);
    set_num_threads(1);
    const auto r1 = cg_solve(A, b, x1, J);
    set_num_threads(4);
    const auto r4 = cg_solve(A, b, x4, J);
    set_num_threads(1);
    EXPECT_EQ(r1.iterations, r4.iterations);
    EXPECT_EQ(x1, x4);
}

TEST(Cg, LaplaceIterationsGrowSlowly)
{
    // Jacobi-CG iteration count on the constrained Laplace system: doubling
    // the resolution should at most roughly double the count.
    std::vector<int> its;
    for (int nx : {4, 8, 16}) {
        const auto s = build_surface_mesh(1.0, nx, 2, true);
        const auto v = extrude(s, nx / 2, flat_bottom(0.5));
        const auto A = assemble_laplace(v);
        const auto sys = apply_dirichlet(A, {}, v, [](double x) { return std::cos(2 * std::numbers::pi * x); });
        std::vector<double> x(sys.rhs.size(), 0.0);
        JacobiPreconditioner J(sys.matrix());
        its.push_back(cg_solve(sys.matrix(), sys.rhs, x, J).iterations);
    }
    EXPECT_LE(its[1], 2.5 * its[0]);
    EXPECT_LE(its[2], 2.5 * its[1]);
}

TEST(MassSolve, DiagonalOneIteration)
{
    const auto M = diag_matrix({2.0, 3.0, 4.0});
    const std::vector<double> r{2.0, 3.0, 8.0};
    const auto x = mass_solve(M, r);
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[2], 2.0, 1e-15);
}

TEST(MassSolve, FourElementSurfaceMatchesDense)
{
    const auto s = build_surface_mesh(1.0, 4, 3, false);
    const auto M = assemble_surface_mass(s);
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> r(static_cast<std::size_t>(M.rows));
    for (auto& v : r) v = nd(rng);
    const Eigen::VectorXd ref = dense(M).ldlt().solve(Eigen::Map<Eigen::VectorXd>(r.data(), M.rows));
    std::vector<double> x(r.size(), 0.0);
    mass_solve(M, r, x, 1e-13);
    for (int i = 0; i < M.rows; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], ref(i), 1e-10 * ref.cwiseAbs().maxCoeff());
}

TEST(MassSolve, ConsistentProjectionReproducesLinearField)
{
    // M^-1 (M f) = f for a piecewise-linear f
    const auto s = build_surface_mesh(2.0, 5, 1, false);
    const auto M = assemble_surface_mass(s);
    const auto f = interpolate_surface(s, [](double x) { return 1.0 + 3.0 * x; });
    const auto rhs = M * f.values;
    const auto xc = mass_solve(M, rhs, 1e-14);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(xc[i], f[i], 1e-12);
}

TEST(SolveReport, CsvRow)
{
    std::ostringstream os;
    write_solve_report_header(os);
    SolveReport r;
    r.iterations = 3;
    r.converged = true;
    write_solve_report_row(os, "laplace", r);
    EXPECT_NE(os.str().find("laplace,3,"), std::string::npos);
}
