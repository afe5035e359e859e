#pragma once

// Element-wise modal filtering of surface fields.

#include <Eigen/Dense>

#include <vector>

#include "basis.hpp"
#include "mesh.hpp"

namespace wavesem {

/// Filter every element with V F V^-1; DoFs shared by neighbouring elements
/// get the average of the element results.
inline ScalarField apply_modal_filter(const SurfaceMesh& mesh, const ReferenceElement& ref, const ScalarField& field)
{
    if (field.size() != static_cast<std::size_t>(mesh.num_dofs())) {
        throw DimensionMismatch("filter: field size does not match the surface mesh");
    }
    const int n1 = ref.num_nodes();
    std::vector<double> sum(field.size(), 0.0);
    std::vector<int> count(field.size(), 0);
    Eigen::VectorXd local(n1);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        for (int a = 0; a < n1; ++a) {
            local(a) = field[static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)])];
        }
        const Eigen::VectorXd out = ref.nodal_filter() * local;
        for (int a = 0; a < n1; ++a) {
            const auto d = static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)]);
            sum[d] += out(a);
            ++count[d];
        }
    }
    ScalarField result(field.location, field.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        result[i] = sum[i] / count[i];
    }
    return result;
}

inline void apply_modal_filter_inplace(const SurfaceMesh& mesh, const ReferenceElement& ref, ScalarField& field)
{
    field = apply_modal_filter(mesh, ref, field);
}

/// Squared modal coefficients of element `e`, summed over all elements when
/// e < 0. Index j is the Legendre degree.
inline std::vector<double> modal_energy(const SurfaceMesh& mesh, const ReferenceElement& ref, const ScalarField& field,
                                        int e = -1)
{
    const int n1 = ref.num_nodes();
    std::vector<double> energy(static_cast<std::size_t>(n1), 0.0);
    Eigen::VectorXd local(n1);
    const int first = e < 0 ? 0 : e;
    const int last = e < 0 ? mesh.num_elements() : e + 1;
    for (int el = first; el < last; ++el) {
        const auto dofs = mesh.element_dofs(el);
        for (int a = 0; a < n1; ++a) {
            local(a) = field[static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)])];
        }
        const Eigen::VectorXd modal = ref.Vinv() * local;
        for (int j = 0; j < n1; ++j) {
            energy[static_cast<std::size_t>(j)] += modal(j) * modal(j);
        }
    }
    return energy;
}

} // namespace wavesem
