#pragma once

// Surface mesh (1-D segments with GLL nodes), its vertically extruded
// quadrilateral volume mesh, sigma-coordinate column updates and the
// surface-to-volume index map.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "errors.hpp"

namespace wavesem {

enum class FieldLocation { Surface, Volume };

/// Coefficients of a C0 piecewise polynomial over a mesh's global DoFs.
struct ScalarField {
    FieldLocation location = FieldLocation::Surface;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(FieldLocation where, std::size_t n, double fill = 0.0) : location(where), values(n, fill) {}
    ScalarField(FieldLocation where, std::vector<double> v) : location(where), values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<const double> span() const { return values; }
    std::span<double> span() { return values; }
};

class SurfaceMesh {
public:
    /// Elements between consecutive `vertices`. For periodic meshes the last
    /// vertex is identified with the first.
    SurfaceMesh(std::vector<double> vertices, int p, bool periodic)
        : vertices_(std::move(vertices)), order_(p), periodic_(periodic)
    {
        if (p < 1) {
            throw ValidationError("p", "polynomial order must be >= 1");
        }
        if (vertices_.size() < 2) {
            throw ValidationError("N_x", "need at least one element");
        }
        for (std::size_t i = 1; i < vertices_.size(); ++i) {
            if (!(vertices_[i] > vertices_[i - 1])) {
                throw ValidationError("vertices", "vertex coordinates must be strictly increasing");
            }
        }
        ref_nodes_ = gll_nodes(p).points;
        const int ne = num_elements();
        num_dofs_ = periodic_ ? ne * p : ne * p + 1;
        elem_dofs_.resize(static_cast<std::size_t>(ne * (p + 1)));
        elem_x_.resize(elem_dofs_.size());
        node_x_.assign(static_cast<std::size_t>(num_dofs_), 0.0);
        for (int e = 0; e < ne; ++e) {
            const double a = vertices_[static_cast<std::size_t>(e)];
            const double b = vertices_[static_cast<std::size_t>(e + 1)];
            for (int i = 0; i <= p; ++i) {
                int dof = e * p + i;
                if (periodic_ && dof == num_dofs_) {
                    dof = 0;
                }
                const double x = a + 0.5 * (ref_nodes_[static_cast<std::size_t>(i)] + 1.0) * (b - a);
                elem_dofs_[static_cast<std::size_t>(e * (p + 1) + i)] = dof;
                elem_x_[static_cast<std::size_t>(e * (p + 1) + i)] = x;
                if (!(periodic_ && e == ne - 1 && i == p)) {
                    node_x_[static_cast<std::size_t>(dof)] = x;
                }
            }
            // exact vertex positions for shared nodes
            elem_x_[static_cast<std::size_t>(e * (p + 1))] = a;
            elem_x_[static_cast<std::size_t>(e * (p + 1) + p)] = b;
        }
    }

    int order() const { return order_; }
    int nodes_per_element() const { return order_ + 1; }
    int num_elements() const { return static_cast<int>(vertices_.size()) - 1; }
    int num_dofs() const { return num_dofs_; }
    bool periodic() const { return periodic_; }
    double x_min() const { return vertices_.front(); }
    double x_max() const { return vertices_.back(); }
    double length() const { return x_max() - x_min(); }
    const std::vector<double>& vertices() const { return vertices_; }
    const std::vector<double>& node_x() const { return node_x_; }
    const std::vector<double>& reference_nodes() const { return ref_nodes_; }

    std::span<const int> element_dofs(int e) const
    {
        return {elem_dofs_.data() + static_cast<std::size_t>(e * (order_ + 1)), static_cast<std::size_t>(order_ + 1)};
    }
    /// Physical node coordinates of element e (unwrapped for periodic meshes).
    std::span<const double> element_node_x(int e) const
    {
        return {elem_x_.data() + static_cast<std::size_t>(e * (order_ + 1)), static_cast<std::size_t>(order_ + 1)};
    }
    double element_length(int e) const
    {
        return vertices_[static_cast<std::size_t>(e + 1)] - vertices_[static_cast<std::size_t>(e)];
    }
    double max_element_length() const
    {
        double h = 0.0;
        for (int e = 0; e < num_elements(); ++e) {
            h = std::max(h, element_length(e));
        }
        return h;
    }

    /// Smallest gap between neighbouring nodes.
    double min_spacing() const
    {
        double dx = std::numeric_limits<double>::infinity();
        for (int e = 0; e < num_elements(); ++e) {
            const auto xs = element_node_x(e);
            for (std::size_t i = 1; i < xs.size(); ++i) {
                dx = std::min(dx, xs[i] - xs[i - 1]);
            }
        }
        return dx;
    }

    /// Element containing x and the reference coordinate of x in it.
    std::pair<int, double> locate(double x) const
    {
        if (periodic_) {
            const double L = length();
            x = x_min() + std::fmod(std::fmod(x - x_min(), L) + L, L);
        }
        x = std::clamp(x, x_min(), x_max());
        auto it = std::upper_bound(vertices_.begin(), vertices_.end(), x);
        int e = static_cast<int>(it - vertices_.begin()) - 1;
        e = std::clamp(e, 0, num_elements() - 1);
        const double a = vertices_[static_cast<std::size_t>(e)];
        const double r = 2.0 * (x - a) / element_length(e) - 1.0;
        return {e, std::clamp(r, -1.0, 1.0)};
    }

private:
    std::vector<double> vertices_;
    int order_;
    bool periodic_;
    int num_dofs_ = 0;
    std::vector<double> ref_nodes_;
    std::vector<int> elem_dofs_;
    std::vector<double> elem_x_;
    std::vector<double> node_x_;
};

/// Uniform surface mesh of `nx` elements on [0, length].
inline SurfaceMesh build_surface_mesh(double length, int nx, int p, bool periodic)
{
    if (!(length > 0.0)) {
        throw ValidationError("domain.length", "domain length must be positive");
    }
    if (nx < 1) {
        throw ValidationError("discretization.nx", "element count must be positive");
    }
    std::vector<double> v(static_cast<std::size_t>(nx + 1));
    for (int i = 0; i <= nx; ++i) {
        v[static_cast<std::size_t>(i)] = length * static_cast<double>(i) / nx;
    }
    v.back() = length;
    return SurfaceMesh(std::move(v), p, periodic);
}

/// Sample f at the surface DoFs. Periodic meshes require f(x_min) == f(x_max).
inline ScalarField interpolate_surface(const SurfaceMesh& mesh, const std::function<double(double)>& f)
{
    ScalarField out(FieldLocation::Surface, static_cast<std::size_t>(mesh.num_dofs()));
    for (int i = 0; i < mesh.num_dofs(); ++i) {
        out[static_cast<std::size_t>(i)] = f(mesh.node_x()[static_cast<std::size_t>(i)]);
    }
    if (mesh.periodic()) {
        const double a = f(mesh.x_min());
        const double b = f(mesh.x_max());
        if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
            throw IncompatiblePeriodicData("sampled function differs at the periodic ends");
        }
    }
    return out;
}

/// Lagrange expansion of a surface field at x.
inline double evaluate_surface(const SurfaceMesh& mesh, const ReferenceElement& ref, std::span<const double> field,
                               double x)
{
    const auto [e, r] = mesh.locate(x);
    const Eigen::RowVectorXd l = ref.basis_at(r);
    const auto dofs = mesh.element_dofs(e);
    double v = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        v += l(static_cast<Eigen::Index>(i)) * field[static_cast<std::size_t>(dofs[i])];
    }
    return v;
}

using Bathymetry = std::function<double(double)>;

inline Bathymetry flat_bottom(double depth)
{
    return [depth](double) { return depth; };
}

/// Trapezoidal submerged bar: deep water, a 1:incline ramp up to the
/// shallow crest, a flat top, a 1:decline ramp back down.
struct BarProfile {
    double deep = 0.4;
    double shallow = 0.1;
    double incline_start = 14.0;
    double incline = 20.0;   // horizontal run per unit rise
    double crest_length = 2.0;
    double decline = 10.0;

    double incline_end() const { return incline_start + incline * (deep - shallow); }
    double crest_end() const { return incline_end() + crest_length; }
    double decline_end() const { return crest_end() + decline * (deep - shallow); }

    double operator()(double x) const
    {
        if (x <= incline_start || x >= decline_end()) {
            return deep;
        }
        if (x < incline_end()) {
            return deep - (x - incline_start) / incline;
        }
        if (x <= crest_end()) {
            return shallow;
        }
        return shallow + (x - crest_end()) / decline;
    }
};

enum class LayerSpacing { Uniform, Cosine };

/// Quadrilateral mesh obtained by extruding a SurfaceMesh downwards into
/// `layers` element layers. Each surface DoF owns a column of volume DoFs;
/// level 0 is the bottom, the last level is the free surface.
class VolumeMesh {
public:
    VolumeMesh(SurfaceMesh surface, int layers, const Bathymetry& bathymetry,
               LayerSpacing spacing = LayerSpacing::Uniform)
        : surface_(std::move(surface)), layers_(layers)
    {
        if (layers < 1) {
            throw ValidationError("discretization.nz", "layer count must be positive");
        }
        const int p = surface_.order();
        levels_ = layers * p + 1;
        layer_sigma_.resize(static_cast<std::size_t>(layers + 1));
        for (int j = 0; j <= layers; ++j) {
            const double s = static_cast<double>(j) / layers;
            layer_sigma_[static_cast<std::size_t>(j)] =
                spacing == LayerSpacing::Uniform ? s : std::sin(0.5 * std::numbers::pi * s);
        }
        layer_sigma_.front() = 0.0;
        layer_sigma_.back() = 1.0;
        const auto& r = surface_.reference_nodes();
        level_sigma_.resize(static_cast<std::size_t>(levels_));
        for (int j = 0; j < layers; ++j) {
            const double s0 = layer_sigma_[static_cast<std::size_t>(j)];
            const double s1 = layer_sigma_[static_cast<std::size_t>(j + 1)];
            for (int b = 0; b <= p; ++b) {
                level_sigma_[static_cast<std::size_t>(j * p + b)] =
                    s0 + 0.5 * (r[static_cast<std::size_t>(b)] + 1.0) * (s1 - s0);
            }
        }
        const int ncol = surface_.num_dofs();
        depth_.resize(static_cast<std::size_t>(ncol));
        for (int c = 0; c < ncol; ++c) {
            const double h = bathymetry(surface_.node_x()[static_cast<std::size_t>(c)]);
            if (!(h > 0.0)) {
                throw ValidationError("domain.h", "water depth must be positive at every column");
            }
            depth_[static_cast<std::size_t>(c)] = h;
        }
        surface_map_.resize(static_cast<std::size_t>(ncol));
        for (int c = 0; c < ncol; ++c) {
            surface_map_[static_cast<std::size_t>(c)] = dof(c, levels_ - 1);
        }
        const int n1 = p + 1;
        elem_dofs_.resize(static_cast<std::size_t>(num_elements() * n1 * n1));
        for (int ex = 0; ex < surface_.num_elements(); ++ex) {
            const auto cols = surface_.element_dofs(ex);
            for (int ez = 0; ez < layers_; ++ez) {
                const int e = element_index(ex, ez);
                for (int b = 0; b <= p; ++b) {
                    for (int a = 0; a <= p; ++a) {
                        elem_dofs_[static_cast<std::size_t>(e * n1 * n1 + b * n1 + a)] =
                            dof(cols[static_cast<std::size_t>(a)], ez * p + b);
                    }
                }
            }
        }
        z_.resize(static_cast<std::size_t>(num_dofs()));
        std::vector<double> flat(static_cast<std::size_t>(ncol), 0.0);
        update(flat);
    }

    const SurfaceMesh& surface() const { return surface_; }
    int order() const { return surface_.order(); }
    int layers() const { return layers_; }
    int levels() const { return levels_; }
    int num_columns() const { return surface_.num_dofs(); }
    int num_dofs() const { return num_columns() * levels_; }
    int num_elements() const { return surface_.num_elements() * layers_; }
    int local_dofs() const { return (order() + 1) * (order() + 1); }
    int dof(int column, int level) const { return column * levels_ + level; }
    int column_of(int d) const { return d / levels_; }
    int level_of(int d) const { return d % levels_; }
    /// Element index for horizontal element ex and layer ez.
    int element_index(int ex, int ez) const { return ex * layers_ + ez; }

    const std::vector<double>& layer_sigma() const { return layer_sigma_; }
    const std::vector<double>& level_sigma() const { return level_sigma_; }
    const std::vector<double>& depth() const { return depth_; }
    const std::vector<int>& surface_map() const { return surface_map_; }
    const std::vector<double>& z() const { return z_; }
    double x(int d) const { return surface_.node_x()[static_cast<std::size_t>(column_of(d))]; }
    double z(int d) const { return z_[static_cast<std::size_t>(d)]; }

    /// Local DoFs of element e, ordered a + (p+1) b with a along x, b along z.
    std::span<const int> element_dofs(int e) const
    {
        const auto n = static_cast<std::size_t>(local_dofs());
        return {elem_dofs_.data() + static_cast<std::size_t>(e) * n, n};
    }
    int element_column(int e) const { return e / layers_; }
    int element_layer(int e) const { return e % layers_; }

    /// Column-wise sigma update: z = sigma (eta + h) - h.
    void update(std::span<const double> eta)
    {
        if (static_cast<int>(eta.size()) != num_columns()) {
            throw DimensionMismatch("update_mesh: eta does not match the surface mesh");
        }
        for (int c = 0; c < num_columns(); ++c) {
            const double h = depth_[static_cast<std::size_t>(c)];
            const double total = eta[static_cast<std::size_t>(c)] + h;
            if (!(total > 0.0)) {
                throw DegenerateDomain("water column " + std::to_string(c) + " collapsed (eta + h <= 0)");
            }
            for (int l = 0; l < levels_; ++l) {
                z_[static_cast<std::size_t>(dof(c, l))] = level_sigma_[static_cast<std::size_t>(l)] * total - h;
            }
        }
    }

private:
    SurfaceMesh surface_;
    int layers_;
    int levels_ = 0;
    std::vector<double> layer_sigma_;
    std::vector<double> level_sigma_;
    std::vector<double> depth_;
    std::vector<int> surface_map_;
    std::vector<int> elem_dofs_;
    std::vector<double> z_;
};

inline VolumeMesh extrude(const SurfaceMesh& surface, int layers, const Bathymetry& bathymetry,
                          LayerSpacing spacing = LayerSpacing::Uniform)
{
    return VolumeMesh(surface, layers, bathymetry, spacing);
}

inline void update_mesh(VolumeMesh& volume, const ScalarField& eta)
{
    volume.update(eta.values);
}

/// Gather the column-top values of a volume field.
inline ScalarField extract_surface(const ScalarField& volume_field, std::span<const int> surface_map,
                                   std::size_t volume_dofs)
{
    if (volume_field.size() != volume_dofs) {
        throw DimensionMismatch("extract_surface: field does not match the volume mesh");
    }
    ScalarField out(FieldLocation::Surface, surface_map.size());
    for (std::size_t i = 0; i < surface_map.size(); ++i) {
        out[i] = volume_field[static_cast<std::size_t>(surface_map[i])];
    }
    return out;
}

inline ScalarField extract_surface(const ScalarField& volume_field, const VolumeMesh& volume)
{
    return extract_surface(volume_field, volume.surface_map(), static_cast<std::size_t>(volume.num_dofs()));
}

/// Extend a surface field down each column (constant along the column).
inline ScalarField lift_to_volume(const ScalarField& surface_field, const VolumeMesh& volume)
{
    if (static_cast<int>(surface_field.size()) != volume.num_columns()) {
        throw DimensionMismatch("lift_to_volume: field does not match the surface mesh");
    }
    ScalarField out(FieldLocation::Volume, static_cast<std::size_t>(volume.num_dofs()));
    for (int d = 0; d < volume.num_dofs(); ++d) {
        out[static_cast<std::size_t>(d)] = surface_field[static_cast<std::size_t>(volume.column_of(d))];
    }
    return out;
}

struct PointValue {
    double x;
    double z;
    double value;
};

/// Physical position and Lagrange expansion of a volume field at reference
/// coordinates (r, s) of element e.
inline PointValue evaluate_volume(const VolumeMesh& volume, const ReferenceElement& ref, std::span<const double> field,
                                  int e, double r, double s)
{
    const Eigen::RowVectorXd lr = ref.basis_at(r);
    const Eigen::RowVectorXd ls = ref.basis_at(s);
    const auto dofs = volume.element_dofs(e);
    const int n1 = ref.num_nodes();
    PointValue out{0.0, 0.0, 0.0};
    const auto xs = volume.surface().element_node_x(volume.element_column(e));
    for (int b = 0; b < n1; ++b) {
        for (int a = 0; a < n1; ++a) {
            const double l = lr(a) * ls(b);
            const auto d = static_cast<std::size_t>(dofs[static_cast<std::size_t>(a + n1 * b)]);
            out.x += l * xs[static_cast<std::size_t>(a)];
            out.z += l * volume.z()[d];
            out.value += l * field[d];
        }
    }
    return out;
}

inline void write_mesh_summary(std::ostream& os, const VolumeMesh& volume)
{
    const auto& s = volume.surface();
    os << "surface_elements = " << s.num_elements() << '\n'
       << "order = " << s.order() << '\n'
       << "periodic = " << (s.periodic() ? "true" : "false") << '\n'
       << "length = " << s.length() << '\n'
       << "surface_dofs = " << s.num_dofs() << '\n'
       << "dx_min = " << std::setprecision(12) << s.min_spacing() << '\n'
       << "layers = " << volume.layers() << '\n'
       << "levels_per_column = " << volume.levels() << '\n'
       << "volume_elements = " << volume.num_elements() << '\n'
       << "volume_dofs = " << volume.num_dofs() << '\n'
       << "layer_sigma =";
    for (double sg : volume.layer_sigma()) {
        os << ' ' << sg;
    }
    os << '\n';
}

inline void write_coordinates_csv(std::ostream& os, const VolumeMesh& volume)
{
    os << "dof_id,x,z\n" << std::setprecision(17);
    for (int d = 0; d < volume.num_dofs(); ++d) {
        os << d << ',' << volume.x(d) << ',' << volume.z(d) << '\n';
    }
}

} // namespace wavesem
