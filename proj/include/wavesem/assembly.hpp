#pragma once

// Discrete weak forms: volume stiffness and mass on the deformed
// quadrilateral mesh, gradient recovery of w = d(phi)/dz, Dirichlet
// elimination of the free-surface DoFs, the surface mass matrix and the
// free-surface right-hand sides.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "errors.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "physics.hpp"
#include "solver.hpp"
#include "sparse.hpp"

namespace wavesem {

/// Element loops over a VolumeMesh. The sparsity pattern and the
/// element-to-CSR scatter lists are built once; every assembled value is the
/// sum of its element contributions in ascending element order, so results
/// are bitwise identical for any thread count.
class VolumeAssembler {
public:
    /// `quad_order` q selects a Gauss rule with q+1 points per direction
    /// (default: p, exact for the stiffness on affine elements).
    explicit VolumeAssembler(const VolumeMesh& mesh, int quad_order = -1)
        : ref_(mesh.order()),
          rule_(quadrature_rule(quad_order < 0 ? mesh.order() : quad_order, QuadratureKind::Gauss))
    {
        std::tie(B_, dB_) = ref_.tabulate(rule_);
        nloc_ = mesh.local_dofs();
        ne_ = mesh.num_elements();
        const int n = mesh.num_dofs();

        std::vector<std::vector<int>> rows(static_cast<std::size_t>(n));
        for (int e = 0; e < ne_; ++e) {
            const auto dofs = mesh.element_dofs(e);
            for (int i : dofs) {
                for (int j : dofs) {
                    rows[static_cast<std::size_t>(i)].push_back(j);
                }
            }
        }
        pattern_ = csr_from_rows(n, n, std::move(rows));
        pattern_.symmetric = true;

        // slot -> list of element-local entries (ascending element order)
        std::vector<int> count(pattern_.nnz(), 0);
        std::vector<int> slot_of(static_cast<std::size_t>(ne_ * nloc_ * nloc_));
        for (int e = 0; e < ne_; ++e) {
            const auto dofs = mesh.element_dofs(e);
            for (int i = 0; i < nloc_; ++i) {
                for (int j = 0; j < nloc_; ++j) {
                    const int k = pattern_.find(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)]);
                    slot_of[static_cast<std::size_t>((e * nloc_ + i) * nloc_ + j)] = k;
                    ++count[static_cast<std::size_t>(k)];
                }
            }
        }
        slot_ptr_.assign(pattern_.nnz() + 1, 0);
        for (std::size_t k = 0; k < pattern_.nnz(); ++k) {
            slot_ptr_[k + 1] = slot_ptr_[k] + count[k];
        }
        slot_src_.resize(static_cast<std::size_t>(slot_ptr_.back()));
        std::vector<int> fill(slot_ptr_.begin(), slot_ptr_.end() - 1);
        for (std::size_t s = 0; s < slot_of.size(); ++s) {
            const auto k = static_cast<std::size_t>(slot_of[s]);
            slot_src_[static_cast<std::size_t>(fill[k]++)] = static_cast<int>(s);
        }

        // dof -> list of element-local vector entries
        std::vector<int> dcount(static_cast<std::size_t>(n), 0);
        for (int e = 0; e < ne_; ++e) {
            for (int d : mesh.element_dofs(e)) {
                ++dcount[static_cast<std::size_t>(d)];
            }
        }
        dof_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
        for (int d = 0; d < n; ++d) {
            dof_ptr_[static_cast<std::size_t>(d) + 1] = dof_ptr_[static_cast<std::size_t>(d)] + dcount[static_cast<std::size_t>(d)];
        }
        dof_src_.resize(static_cast<std::size_t>(dof_ptr_.back()));
        std::vector<int> dfill(dof_ptr_.begin(), dof_ptr_.end() - 1);
        for (int e = 0; e < ne_; ++e) {
            const auto dofs = mesh.element_dofs(e);
            for (int i = 0; i < nloc_; ++i) {
                const auto d = static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)]);
                dof_src_[static_cast<std::size_t>(dfill[d]++)] = e * nloc_ + i;
            }
        }
    }

    const CsrMatrix& pattern() const { return pattern_; }
    const QuadratureRule& rule() const { return rule_; }

    /// Stiffness <grad phi, grad v> on the current coordinates.
    CsrMatrix stiffness(const VolumeMesh& mesh) const
    {
        CsrMatrix K = pattern_;
        std::vector<double> ek(static_cast<std::size_t>(ne_ * nloc_ * nloc_));
        parallel_for(ne_, [&](std::ptrdiff_t e) { element_matrices(mesh, static_cast<int>(e), &ek, nullptr); });
        scatter(ek, K.values);
        return K;
    }

    /// Consistent mass <u, v> on the current coordinates.
    CsrMatrix mass(const VolumeMesh& mesh) const
    {
        CsrMatrix M = pattern_;
        std::vector<double> em(static_cast<std::size_t>(ne_ * nloc_ * nloc_));
        parallel_for(ne_, [&](std::ptrdiff_t e) { element_matrices(mesh, static_cast<int>(e), nullptr, &em); });
        scatter(em, M.values);
        return M;
    }

    /// Stiffness and mass in one pass.
    std::pair<CsrMatrix, CsrMatrix> stiffness_and_mass(const VolumeMesh& mesh) const
    {
        CsrMatrix K = pattern_;
        CsrMatrix M = pattern_;
        std::vector<double> ek(static_cast<std::size_t>(ne_ * nloc_ * nloc_));
        std::vector<double> em(ek.size());
        parallel_for(ne_, [&](std::ptrdiff_t e) { element_matrices(mesh, static_cast<int>(e), &ek, &em); });
        scatter(ek, K.values);
        scatter(em, M.values);
        return {std::move(K), std::move(M)};
    }

    /// Load vector <d(phi)/dz, v>.
    std::vector<double> dz_load(const VolumeMesh& mesh, std::span<const double> phi) const
    {
        std::vector<double> ev(static_cast<std::size_t>(ne_ * nloc_));
        parallel_for(ne_, [&](std::ptrdiff_t e) { element_dz_load(mesh, static_cast<int>(e), phi, ev); });
        std::vector<double> out(static_cast<std::size_t>(mesh.num_dofs()));
        parallel_for(mesh.num_dofs(), [&](std::ptrdiff_t d) {
            double s = 0.0;
            for (int k = dof_ptr_[static_cast<std::size_t>(d)]; k < dof_ptr_[static_cast<std::size_t>(d) + 1]; ++k) {
                s += ev[static_cast<std::size_t>(dof_src_[static_cast<std::size_t>(k)])];
            }
            out[static_cast<std::size_t>(d)] = s;
        });
        return out;
    }

private:
    struct Geometry {
        double det;
        double rx, rz, sx, sz; // d(r,s)/d(x,z)
    };

    Geometry geometry(const VolumeMesh& mesh, int e, int qx, int qz, std::span<const int> dofs,
                      std::span<const double> xs) const
    {
        const int n1 = mesh.order() + 1;
        double xr = 0.0, xs_ = 0.0, zr = 0.0, zs = 0.0;
        for (int b = 0; b < n1; ++b) {
            for (int a = 0; a < n1; ++a) {
                const double x = xs[static_cast<std::size_t>(a)];
                const double z = mesh.z(dofs[static_cast<std::size_t>(b * n1 + a)]);
                const double pr = dB_(qx, a) * B_(qz, b);
                const double ps = B_(qx, a) * dB_(qz, b);
                xr += x * pr;
                xs_ += x * ps;
                zr += z * pr;
                zs += z * ps;
            }
        }
        const double det = xr * zs - xs_ * zr;
        if (!(det > 0.0)) {
            throw TangledMesh("non-positive Jacobian in volume element " + std::to_string(e));
        }
        return {det, zs / det, -xs_ / det, -zr / det, xr / det};
    }

    void element_matrices(const VolumeMesh& mesh, int e, std::vector<double>* ek, std::vector<double>* em) const
    {
        const int n1 = mesh.order() + 1;
        const auto dofs = mesh.element_dofs(e);
        const auto xs = mesh.surface().element_node_x(mesh.element_column(e));
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nloc_, nloc_);
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nloc_, nloc_);
        Eigen::MatrixXd G(nloc_, 2);
        Eigen::VectorXd psi(nloc_);
        const int nq = rule_.size();
        for (int qz = 0; qz < nq; ++qz) {
            for (int qx = 0; qx < nq; ++qx) {
                const Geometry g = geometry(mesh, e, qx, qz, dofs, xs);
                const double w = rule_.weights[static_cast<std::size_t>(qx)] * rule_.weights[static_cast<std::size_t>(qz)] * g.det;
                for (int b = 0; b < n1; ++b) {
                    for (int a = 0; a < n1; ++a) {
                        const int i = b * n1 + a;
                        const double pr = dB_(qx, a) * B_(qz, b);
                        const double ps = B_(qx, a) * dB_(qz, b);
                        G(i, 0) = g.rx * pr + g.sx * ps;
                        G(i, 1) = g.rz * pr + g.sz * ps;
                        psi(i) = B_(qx, a) * B_(qz, b);
                    }
                }
                if (ek != nullptr) {
                    K.noalias() += w * (G * G.transpose());
                }
                if (em != nullptr) {
                    M.noalias() += w * (psi * psi.transpose());
                }
            }
        }
        const auto off = static_cast<std::size_t>(e) * static_cast<std::size_t>(nloc_ * nloc_);
        for (int i = 0; i < nloc_; ++i) {
            for (int j = 0; j < nloc_; ++j) {
                if (ek != nullptr) {
                    (*ek)[off + static_cast<std::size_t>(i * nloc_ + j)] = K(i, j);
                }
                if (em != nullptr) {
                    (*em)[off + static_cast<std::size_t>(i * nloc_ + j)] = M(i, j);
                }
            }
        }
    }

    void element_dz_load(const VolumeMesh& mesh, int e, std::span<const double> phi, std::vector<double>& ev) const
    {
        const int n1 = mesh.order() + 1;
        const auto dofs = mesh.element_dofs(e);
        const auto xs = mesh.surface().element_node_x(mesh.element_column(e));
        const int nq = rule_.size();
        const auto off = static_cast<std::size_t>(e * nloc_);
        for (int i = 0; i < nloc_; ++i) {
            ev[off + static_cast<std::size_t>(i)] = 0.0;
        }
        for (int qz = 0; qz < nq; ++qz) {
            for (int qx = 0; qx < nq; ++qx) {
                const Geometry g = geometry(mesh, e, qx, qz, dofs, xs);
                double phi_r = 0.0, phi_s = 0.0;
                for (int b = 0; b < n1; ++b) {
                    for (int a = 0; a < n1; ++a) {
                        const double v = phi[static_cast<std::size_t>(dofs[static_cast<std::size_t>(b * n1 + a)])];
                        phi_r += v * dB_(qx, a) * B_(qz, b);
                        phi_s += v * B_(qx, a) * dB_(qz, b);
                    }
                }
                const double phi_z = g.rz * phi_r + g.sz * phi_s;
                const double w = rule_.weights[static_cast<std::size_t>(qx)] * rule_.weights[static_cast<std::size_t>(qz)] * g.det;
                for (int b = 0; b < n1; ++b) {
                    for (int a = 0; a < n1; ++a) {
                        ev[off + static_cast<std::size_t>(b * n1 + a)] += w * phi_z * B_(qx, a) * B_(qz, b);
                    }
                }
            }
        }
    }

    void scatter(const std::vector<double>& local, std::vector<double>& values) const
    {
        parallel_for(static_cast<std::ptrdiff_t>(values.size()), [&](std::ptrdiff_t k) {
            double s = 0.0;
            for (int c = slot_ptr_[static_cast<std::size_t>(k)]; c < slot_ptr_[static_cast<std::size_t>(k) + 1]; ++c) {
                s += local[static_cast<std::size_t>(slot_src_[static_cast<std::size_t>(c)])];
            }
            values[static_cast<std::size_t>(k)] = s;
        });
    }

    ReferenceElement ref_;
    QuadratureRule rule_;
    Eigen::MatrixXd B_, dB_;
    int nloc_ = 0;
    int ne_ = 0;
    CsrMatrix pattern_;
    std::vector<int> slot_ptr_, slot_src_;
    std::vector<int> dof_ptr_, dof_src_;
};

inline CsrMatrix assemble_laplace(const VolumeMesh& mesh, int quad_order = -1)
{
    return VolumeAssembler(mesh, quad_order).stiffness(mesh);
}

/// Symmetric elimination of Dirichlet DoFs: A_FF x_F = b_F - A_FD g.
/// The index maps are built once per pattern; `update` refreshes values.
class DirichletElimination {
public:
    DirichletElimination(const CsrMatrix& pattern, std::vector<int> dirichlet_dofs)
        : dirichlet_(std::move(dirichlet_dofs)), n_(pattern.rows)
    {
        if (dirichlet_.empty()) {
            throw SingularSystem("Dirichlet set is empty: pure-Neumann Laplace system is singular");
        }
        reduced_index_.assign(static_cast<std::size_t>(n_), -1);
        std::vector<int> dir_index(static_cast<std::size_t>(n_), -1);
        for (std::size_t k = 0; k < dirichlet_.size(); ++k) {
            dir_index[static_cast<std::size_t>(dirichlet_[k])] = static_cast<int>(k);
        }
        for (int i = 0; i < n_; ++i) {
            if (dir_index[static_cast<std::size_t>(i)] < 0) {
                reduced_index_[static_cast<std::size_t>(i)] = static_cast<int>(free_.size());
                free_.push_back(i);
            }
        }
        const int nf = static_cast<int>(free_.size());
        const int nd = static_cast<int>(dirichlet_.size());
        std::vector<std::vector<int>> rf(static_cast<std::size_t>(nf)), rd(static_cast<std::size_t>(nf));
        for (int r = 0; r < nf; ++r) {
            const int i = free_[static_cast<std::size_t>(r)];
            for (int k = pattern.row_ptr[static_cast<std::size_t>(i)]; k < pattern.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const int j = pattern.col_idx[static_cast<std::size_t>(k)];
                if (reduced_index_[static_cast<std::size_t>(j)] >= 0) {
                    rf[static_cast<std::size_t>(r)].push_back(reduced_index_[static_cast<std::size_t>(j)]);
                } else {
                    rd[static_cast<std::size_t>(r)].push_back(dir_index[static_cast<std::size_t>(j)]);
                }
            }
        }
        reduced_ = csr_from_rows(nf, nf, std::move(rf));
        reduced_.symmetric = pattern.symmetric;
        coupling_ = csr_from_rows(nf, nd, std::move(rd));
        // source slots in column order match because reduced/dirichlet indices
        // are monotone in the original column index
        for (int r = 0; r < nf; ++r) {
            const int i = free_[static_cast<std::size_t>(r)];
            for (int k = pattern.row_ptr[static_cast<std::size_t>(i)]; k < pattern.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const int j = pattern.col_idx[static_cast<std::size_t>(k)];
                if (reduced_index_[static_cast<std::size_t>(j)] >= 0) {
                    reduced_src_.push_back(k);
                }
            }
        }
        // coupling columns are positions in the Dirichlet list, which need
        // not be monotone in the original column index
        coupling_src_.resize(coupling_.nnz());
        for (int r = 0; r < nf; ++r) {
            const int lo = coupling_.row_ptr[static_cast<std::size_t>(r)];
            const int hi = coupling_.row_ptr[static_cast<std::size_t>(r) + 1];
            std::vector<std::pair<int, int>> tmp;
            const int i = free_[static_cast<std::size_t>(r)];
            for (int k = pattern.row_ptr[static_cast<std::size_t>(i)]; k < pattern.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const int j = pattern.col_idx[static_cast<std::size_t>(k)];
                if (reduced_index_[static_cast<std::size_t>(j)] < 0) {
                    tmp.emplace_back(dir_index[static_cast<std::size_t>(j)], k);
                }
            }
            std::sort(tmp.begin(), tmp.end());
            for (int c = lo; c < hi; ++c) {
                coupling_src_[static_cast<std::size_t>(c)] = tmp[static_cast<std::size_t>(c - lo)].second;
            }
        }
    }

    const std::vector<int>& free_dofs() const { return free_; }
    const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
    const CsrMatrix& reduced() const { return reduced_; }
    const CsrMatrix& coupling() const { return coupling_; }

    void update(const CsrMatrix& A)
    {
        parallel_for(static_cast<std::ptrdiff_t>(reduced_src_.size()), [&](std::ptrdiff_t k) {
            reduced_.values[static_cast<std::size_t>(k)] = A.values[static_cast<std::size_t>(reduced_src_[static_cast<std::size_t>(k)])];
        });
        parallel_for(static_cast<std::ptrdiff_t>(coupling_src_.size()), [&](std::ptrdiff_t k) {
            coupling_.values[static_cast<std::size_t>(k)] = A.values[static_cast<std::size_t>(coupling_src_[static_cast<std::size_t>(k)])];
        });
    }

    /// b_F - A_FD g
    std::vector<double> reduced_rhs(std::span<const double> b, std::span<const double> g) const
    {
        std::vector<double> out = coupling_ * g;
        for (std::size_t r = 0; r < free_.size(); ++r) {
            out[r] = (b.empty() ? 0.0 : b[static_cast<std::size_t>(free_[r])]) - out[r];
        }
        return out;
    }

    /// Full vector from free values and Dirichlet data.
    std::vector<double> expand(std::span<const double> x_free, std::span<const double> g) const
    {
        std::vector<double> full(static_cast<std::size_t>(n_));
        for (std::size_t r = 0; r < free_.size(); ++r) {
            full[static_cast<std::size_t>(free_[r])] = x_free[r];
        }
        for (std::size_t k = 0; k < dirichlet_.size(); ++k) {
            full[static_cast<std::size_t>(dirichlet_[k])] = g[k];
        }
        return full;
    }

    std::vector<double> restrict_free(std::span<const double> full) const
    {
        std::vector<double> out(free_.size());
        for (std::size_t r = 0; r < free_.size(); ++r) {
            out[r] = full[static_cast<std::size_t>(free_[r])];
        }
        return out;
    }

private:
    std::vector<int> dirichlet_;
    int n_;
    std::vector<int> free_;
    std::vector<int> reduced_index_;
    CsrMatrix reduced_;
    CsrMatrix coupling_;
    std::vector<int> reduced_src_;
    std::vector<int> coupling_src_;
};

struct ConstrainedSystem {
    DirichletElimination elimination;
    std::vector<double> rhs;
    std::vector<double> dirichlet_values;

    const CsrMatrix& matrix() const { return elimination.reduced(); }
    std::vector<double> expand(std::span<const double> x_free) const
    {
        return elimination.expand(x_free, dirichlet_values);
    }
};

inline ConstrainedSystem apply_dirichlet(const CsrMatrix& A, std::span<const double> b, std::vector<int> dofs,
                                         std::vector<double> values)
{
    if (dofs.size() != values.size()) {
        throw DimensionMismatch("apply_dirichlet: dofs and values differ in length");
    }
    DirichletElimination elim(A, std::move(dofs));
    elim.update(A);
    auto rhs = elim.reduced_rhs(b, values);
    return ConstrainedSystem{std::move(elim), std::move(rhs), std::move(values)};
}

/// Dirichlet data phi_eta imposed at the column tops of `volume`.
inline ConstrainedSystem apply_dirichlet(const CsrMatrix& A, std::span<const double> b, const VolumeMesh& volume,
                                         const ScalarField& phi_eta)
{
    if (static_cast<int>(phi_eta.size()) != volume.num_columns()) {
        throw DimensionMismatch("apply_dirichlet: phi_eta does not match the surface mesh");
    }
    return apply_dirichlet(A, b, volume.surface_map(), phi_eta.values);
}

inline ConstrainedSystem apply_dirichlet(const CsrMatrix& A, std::span<const double> b, const VolumeMesh& volume,
                                         const std::function<double(double)>& phi_eta)
{
    return apply_dirichlet(A, b, volume, interpolate_surface(volume.surface(), phi_eta));
}

struct GradientRecoveryOptions {
    bool lumped = false;
    double rtol = 1e-10;
    double atol = 1e-15;
};

/// L2 projection of d(phi)/dz onto the C0 space: M w = <d(phi)/dz, v>.
/// `w` carries the initial guess on entry when sized correctly.
inline SolveReport gradient_recovery(const VolumeAssembler& assembler, const VolumeMesh& mesh, const CsrMatrix& mass,
                                     std::span<const double> phi, std::vector<double>& w,
                                     const GradientRecoveryOptions& opts = {},
                                     const Preconditioner* precond = nullptr)
{
    const auto rhs = assembler.dz_load(mesh, phi);
    if (w.size() != rhs.size()) {
        w.assign(rhs.size(), 0.0);
    }
    if (opts.lumped) {
        for (int i = 0; i < mass.rows; ++i) {
            double s = 0.0;
            for (int k = mass.row_ptr[static_cast<std::size_t>(i)]; k < mass.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                s += mass.values[static_cast<std::size_t>(k)];
            }
            w[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(i)] / s;
        }
        SolveReport rep;
        rep.converged = true;
        return rep;
    }
    SolveOptions o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    if (precond != nullptr) {
        return cg_solve(mass, rhs, w, *precond, o);
    }
    JacobiPreconditioner jac(mass);
    return cg_solve(mass, rhs, w, jac, o);
}

inline ScalarField gradient_recovery(const ScalarField& phi, const VolumeMesh& mesh, const GradientRecoveryOptions& opts = {})
{
    VolumeAssembler asmb(mesh);
    const CsrMatrix M = asmb.mass(mesh);
    std::vector<double> w;
    gradient_recovery(asmb, mesh, M, phi.values, w, opts);
    return ScalarField(FieldLocation::Volume, std::move(w));
}

/// Free-surface mass matrix and right-hand sides on a SurfaceMesh.
class SurfaceAssembler {
public:
    /// `fs_exactness`: polynomial degree integrated exactly by the nonlinear
    /// free-surface rule (default 3p).
    SurfaceAssembler(const SurfaceMesh& mesh, int fs_exactness = -1)
        : mesh_(&mesh),
          ref_(mesh.order()),
          mass_rule_(quadrature_rule(mesh.order(), QuadratureKind::Gauss)),
          fs_rule_(gauss_rule_for_degree(fs_exactness < 0 ? 3 * mesh.order() : fs_exactness))
    {
        std::tie(Bm_, dBm_) = ref_.tabulate(mass_rule_);
        std::tie(Bf_, dBf_) = ref_.tabulate(fs_rule_);
    }

    const QuadratureRule& fs_rule() const { return fs_rule_; }

    CsrMatrix mass() const
    {
        const SurfaceMesh& m = *mesh_;
        const int n1 = m.order() + 1;
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(m.num_elements() * n1 * n1));
        for (int e = 0; e < m.num_elements(); ++e) {
            const double J = 0.5 * m.element_length(e);
            const auto dofs = m.element_dofs(e);
            for (int i = 0; i < n1; ++i) {
                for (int j = 0; j < n1; ++j) {
                    double s = 0.0;
                    for (int q = 0; q < mass_rule_.size(); ++q) {
                        s += mass_rule_.weights[static_cast<std::size_t>(q)] * Bm_(q, i) * Bm_(q, j);
                    }
                    t.push_back({dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], s * J});
                }
            }
        }
        CsrMatrix M = csr_from_triplets(m.num_dofs(), m.num_dofs(), t);
        M.symmetric = true;
        return M;
    }

    /// Kinematic (r_k) and dynamic (r_d) load vectors.
    std::pair<std::vector<double>, std::vector<double>> fs_rhs(std::span<const double> eta,
                                                               std::span<const double> phi_eta,
                                                               std::span<const double> w_eta, FlowModel model,
                                                               double g = kGravity) const
    {
        const SurfaceMesh& m = *mesh_;
        const auto n = static_cast<std::size_t>(m.num_dofs());
        if (eta.size() != n || phi_eta.size() != n || w_eta.size() != n) {
            throw DimensionMismatch("fs_rhs: fields do not match the surface mesh");
        }
        std::vector<double> rk(n, 0.0), rd(n, 0.0);
        const int n1 = m.order() + 1;
        const QuadratureRule& rule = model == FlowModel::FNPF ? fs_rule_ : mass_rule_;
        const Eigen::MatrixXd& B = model == FlowModel::FNPF ? Bf_ : Bm_;
        const Eigen::MatrixXd& dB = model == FlowModel::FNPF ? dBf_ : dBm_;
        std::vector<double> lk(static_cast<std::size_t>(n1)), ld(static_cast<std::size_t>(n1));
        for (int e = 0; e < m.num_elements(); ++e) {
            const double J = 0.5 * m.element_length(e);
            const auto dofs = m.element_dofs(e);
            std::fill(lk.begin(), lk.end(), 0.0);
            std::fill(ld.begin(), ld.end(), 0.0);
            for (int q = 0; q < rule.size(); ++q) {
                double et = 0.0, ex = 0.0, px = 0.0, w = 0.0;
                for (int a = 0; a < n1; ++a) {
                    const auto d = static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)]);
                    et += B(q, a) * eta[d];
                    ex += dB(q, a) * eta[d];
                    px += dB(q, a) * phi_eta[d];
                    w += B(q, a) * w_eta[d];
                }
                ex /= J;
                px /= J;
                double fk, fd;
                if (model == FlowModel::FNPF) {
                    const double s = 1.0 + ex * ex;
                    fk = -ex * px + w * s;
                    fd = -g * et - 0.5 * px * px + 0.5 * w * w * s;
                } else {
                    fk = w;
                    fd = -g * et;
                }
                const double wq = rule.weights[static_cast<std::size_t>(q)] * J;
                for (int i = 0; i < n1; ++i) {
                    lk[static_cast<std::size_t>(i)] += wq * fk * B(q, i);
                    ld[static_cast<std::size_t>(i)] += wq * fd * B(q, i);
                }
            }
            for (int i = 0; i < n1; ++i) {
                const auto d = static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)]);
                rk[d] += lk[static_cast<std::size_t>(i)];
                rd[d] += ld[static_cast<std::size_t>(i)];
            }
        }
        return {std::move(rk), std::move(rd)};
    }

private:
    const SurfaceMesh* mesh_;
    ReferenceElement ref_;
    QuadratureRule mass_rule_;
    QuadratureRule fs_rule_;
    Eigen::MatrixXd Bm_, dBm_, Bf_, dBf_;
};

inline CsrMatrix assemble_surface_mass(const SurfaceMesh& mesh)
{
    return SurfaceAssembler(mesh).mass();
}

inline std::pair<std::vector<double>, std::vector<double>> assemble_fs_rhs(const SurfaceMesh& mesh,
                                                                           const ScalarField& eta,
                                                                           const ScalarField& phi_eta,
                                                                           const ScalarField& w_eta, FlowModel model,
                                                                           int fs_exactness = -1)
{
    return SurfaceAssembler(mesh, fs_exactness).fs_rhs(eta.values, phi_eta.values, w_eta.values, model);
}

} // namespace wavesem
