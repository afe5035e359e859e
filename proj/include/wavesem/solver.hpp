#pragma once

// Preconditioned conjugate gradients with pluggable preconditioners.

#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "sparse.hpp"

namespace wavesem {

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    double absolute_residual = 0.0;
    bool converged = false;
    double wall_seconds = 0.0;
};

inline void write_solve_report_header(std::ostream& os)
{
    os << "label,iterations,relative_residual,absolute_residual,converged,wall_seconds\n";
}

inline void write_solve_report_row(std::ostream& os, const std::string& label, const SolveReport& r)
{
    os << label << ',' << r.iterations << ',' << r.relative_residual << ',' << r.absolute_residual << ','
       << (r.converged ? 1 : 0) << ',' << r.wall_seconds << '\n';
}

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, SolveReport report) : Error(what), report_(report) {}
    const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

struct SolveOptions {
    double rtol = 1e-6;
    double atol = 1e-15;
    int max_iterations = 20000;
    bool throw_on_failure = true;
};

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    /// z = M^{-1} r
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
    virtual std::string name() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
public:
    void apply(std::span<const double> r, std::span<double> z) const override
    {
        std::copy(r.begin(), r.end(), z.begin());
    }
    std::string name() const override { return "none"; }
};

class JacobiPreconditioner final : public Preconditioner {
public:
    explicit JacobiPreconditioner(const CsrMatrix& A) { update(A); }

    void update(const CsrMatrix& A)
    {
        inv_diag_ = A.diagonal();
        for (auto& d : inv_diag_) {
            if (!(d > 0.0)) {
                throw MatrixPropertyError("Jacobi: non-positive diagonal entry");
            }
            d = 1.0 / d;
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const override
    {
        parallel_for(static_cast<std::ptrdiff_t>(r.size()), [&](std::ptrdiff_t i) { z[i] = inv_diag_[i] * r[i]; });
    }
    std::string name() const override { return "jacobi"; }

private:
    std::vector<double> inv_diag_;
};

/// Symmetric Gauss-Seidel: forward then backward sweep.
class SymmetricGaussSeidel final : public Preconditioner {
public:
    explicit SymmetricGaussSeidel(const CsrMatrix& A) : A_(&A), diag_(A.diagonal()) {}

    void apply(std::span<const double> r, std::span<double> z) const override
    {
        const CsrMatrix& A = *A_;
        const auto n = static_cast<std::size_t>(A.rows);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i];
            for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                const auto j = static_cast<std::size_t>(A.col_idx[static_cast<std::size_t>(k)]);
                if (j < i) {
                    s -= A.values[static_cast<std::size_t>(k)] * y[j];
                }
            }
            y[i] = s / diag_[i];
        }
        // (D + U) z = D y
        for (std::size_t ii = n; ii-- > 0;) {
            double s = diag_[ii] * y[ii];
            for (int k = A.row_ptr[ii]; k < A.row_ptr[ii + 1]; ++k) {
                const auto j = static_cast<std::size_t>(A.col_idx[static_cast<std::size_t>(k)]);
                if (j > ii) {
                    s -= A.values[static_cast<std::size_t>(k)] * z[j];
                }
            }
            z[ii] = s / diag_[ii];
        }
    }
    std::string name() const override { return "sgs"; }

private:
    const CsrMatrix* A_;
    std::vector<double> diag_;
};

/// Sparse Cholesky factorization (AMD ordering) of an SPD reference matrix,
/// applied as a preconditioner. `factor` refreshes the numeric factor; the
/// symbolic analysis is reused while the sparsity pattern is unchanged.
class FactorizedPreconditioner final : public Preconditioner {
public:
    explicit FactorizedPreconditioner(const CsrMatrix& A) { factor(A); }

    void factor(const CsrMatrix& A)
    {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(A.nnz());
        for (int i = 0; i < A.rows; ++i) {
            for (int k = A.row_ptr[static_cast<std::size_t>(i)]; k < A.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                t.emplace_back(i, A.col_idx[static_cast<std::size_t>(k)], A.values[static_cast<std::size_t>(k)]);
            }
        }
        Eigen::SparseMatrix<double> S(A.rows, A.cols);
        S.setFromTriplets(t.begin(), t.end());
        if (pattern_nnz_ != A.nnz() || rows_ != A.rows) {
            llt_.analyzePattern(S);
            pattern_nnz_ = A.nnz();
            rows_ = A.rows;
        }
        llt_.factorize(S);
        if (llt_.info() != Eigen::Success) {
            throw MatrixPropertyError("Cholesky: matrix is not positive definite");
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const override
    {
        const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
        Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
        zv = llt_.solve(rv);
    }
    std::string name() const override { return "cholesky"; }

private:
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
    std::size_t pattern_nnz_ = 0;
    int rows_ = -1;
};

enum class PreconditionerKind { None, Jacobi, SymmetricGaussSeidel, Cholesky };

inline PreconditionerKind parse_preconditioner(const std::string& s)
{
    if (s == "none") return PreconditionerKind::None;
    if (s == "jacobi") return PreconditionerKind::Jacobi;
    if (s == "sgs") return PreconditionerKind::SymmetricGaussSeidel;
    if (s == "cholesky") return PreconditionerKind::Cholesky;
    throw ValidationError("preconditioner", "unknown preconditioner '" + s + "'");
}

/// The returned object may keep a pointer to A (symmetric Gauss-Seidel).
inline std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const CsrMatrix& A)
{
    switch (kind) {
    case PreconditionerKind::None:
        return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::Jacobi:
        return std::make_unique<JacobiPreconditioner>(A);
    case PreconditionerKind::SymmetricGaussSeidel:
        return std::make_unique<SymmetricGaussSeidel>(A);
    case PreconditionerKind::Cholesky:
        return std::make_unique<FactorizedPreconditioner>(A);
    }
    return std::make_unique<IdentityPreconditioner>();
}

/// Preconditioned CG for SPD A. `x` holds the initial guess on entry.
/// Converged means ||b - A x||_2 <= max(rtol ||b||_2, atol), checked on the
/// true residual before returning.
inline SolveReport cg_solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                            const Preconditioner& M, const SolveOptions& opts = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto n = static_cast<std::ptrdiff_t>(b.size());
    if (A.rows != n || A.cols != n || static_cast<std::ptrdiff_t>(x.size()) != n) {
        throw DimensionMismatch("cg_solve: dimension mismatch");
    }
    std::vector<double> r(static_cast<std::size_t>(n)), z(r.size()), p(r.size()), Ap(r.size());
    const double bnorm = norm2(b);
    const double target = std::max(opts.rtol * bnorm, opts.atol);

    auto true_residual = [&]() {
        A.multiply(x, Ap);
        parallel_for(n, [&](std::ptrdiff_t i) { r[i] = b[i] - Ap[i]; });
        return norm2(r);
    };

    SolveReport rep;
    double rnorm = true_residual();
    int it = 0;
    bool restart = true;
    double rz = 0.0;
    while (rnorm > target && it < opts.max_iterations) {
        if (restart) {
            M.apply(r, z);
            std::copy(z.begin(), z.end(), p.begin());
            rz = dot(r, z);
            restart = false;
        }
        A.multiply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) {
            throw MatrixPropertyError("cg_solve: p^T A p <= 0, matrix is not positive definite");
        }
        const double alpha = rz / pAp;
        parallel_for(n, [&](std::ptrdiff_t i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        });
        ++it;
        rnorm = norm2(r);
        if (rnorm <= target) {
            // recursive residual can drift; confirm against b - A x
            rnorm = true_residual();
            restart = true;
            continue;
        }
        M.apply(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        parallel_for(n, [&](std::ptrdiff_t i) { p[i] = z[i] + beta * p[i]; });
    }
    rep.iterations = it;
    rep.absolute_residual = rnorm;
    rep.relative_residual = bnorm > 0.0 ? rnorm / bnorm : 0.0;
    rep.converged = (bnorm > 0.0 && rep.relative_residual <= opts.rtol) || rnorm <= opts.atol;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.converged && opts.throw_on_failure) {
        throw NonConvergence("cg_solve: no convergence after " + std::to_string(it) + " iterations", rep);
    }
    return rep;
}

/// Mass-matrix solve with the free-surface tolerances and Jacobi preconditioning.
inline SolveReport mass_solve(const CsrMatrix& M, std::span<const double> rhs, std::span<double> x,
                              double rtol = 1e-5, double atol = 1e-15)
{
    JacobiPreconditioner jac(M);
    SolveOptions o;
    o.rtol = rtol;
    o.atol = atol;
    return cg_solve(M, rhs, x, jac, o);
}

inline std::vector<double> mass_solve(const CsrMatrix& M, std::span<const double> rhs, double rtol = 1e-5,
                                      double atol = 1e-15)
{
    std::vector<double> x(rhs.size(), 0.0);
    mass_solve(M, rhs, x, rtol, atol);
    return x;
}

} // namespace wavesem
