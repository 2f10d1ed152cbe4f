#ifndef PKGRID_TESTS_SUPPORT_HPP
#define PKGRID_TESTS_SUPPORT_HPP

#include "pkgrid/levelset.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <vector>

namespace pkgrid::testing
{
/// Unit box split into cells^D background cells.
template <int D>
GridGeometry<D> unitGeometry(int cells, int pkg_size = 4)
{
    GridGeometry<D> geometry;
    geometry.pkg_size = pkg_size;
    geometry.coarse_cell_size = 1.0 / cells;
    geometry.cells_per_axis = Arrayi<D>::Constant(cells);
    return geometry;
}

template <int D>
LevelSetLayer<D> sphereLayer(int cells, Real radius = 0.3, int pkg_size = 4)
{
    const SphereShape<D> sphere(Vecd<D>::Constant(0.5), radius);
    return initializeSingleLayer<D>(sphere, unitGeometry<D>(cells, pkg_size));
}

/// Global data index of every data point, in row-major order over the whole mesh.
template <int D>
Arrayi<D> globalIndex(const GridGeometry<D> &geometry, std::size_t linear)
{
    return delinearizeRowMajor<D>(linear, geometry.dataPointsPerAxis());
}

/// Dense copy of a mesh variable: data points of activated cells carry the
/// package value, all others the far-field value of their cell's stamp.
template <int D>
struct DenseField
{
    GridGeometry<D> geometry;
    std::vector<Real> values;

    DenseField(const Mesh<D> &mesh, const std::function<Real(const Vecd<D> &)> &active_value, Real far)
        : geometry(mesh.geometry())
    {
        const Arrayi<D> n = geometry.dataPointsPerAxis();
        values.resize(static_cast<std::size_t>(n.prod()));
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            const Arrayi<D> g = delinearizeRowMajor<D>(i, n);
            const Arrayi<D> cell = g / geometry.pkg_size;
            const PackageIndex p = mesh.packageAt(cell);
            if (p >= kNumSingularPackages)
                values[i] = active_value(geometry.dataPointPosition(cell, g - cell * geometry.pkg_size));
            else
                values[i] = p == kNegativeFarField ? -far : far;
        }
    }

    bool contains(const Arrayi<D> &g) const { return inRange<D>(g, geometry.dataPointsPerAxis()); }
    Real operator()(const Arrayi<D> &g) const
    {
        return values[linearizeRowMajor<D>(g, geometry.dataPointsPerAxis())];
    }
};

/// Multilinear interpolation on the dense copy, written independently of probe().
template <int D>
Real denseProbe(const DenseField<D> &dense, const Vecd<D> &p)
{
    const Real ds = dense.geometry.dataSpacing();
    const Arrayi<D> n = dense.geometry.dataPointsPerAxis();
    Arrayi<D> anchor;
    Vecd<D> t;
    for (int k = 0; k < D; ++k)
    {
        const Real u = (p[k] - dense.geometry.lower_corner[k]) / ds - 0.5;
        anchor[k] = std::min(static_cast<int>(std::floor(u)), n[k] - 2);
        t[k] = u - anchor[k];
    }
    Real sum = 0.0;
    for (int corner = 0; corner < (1 << D); ++corner)
    {
        Arrayi<D> offset;
        Real w = 1.0;
        for (int k = 0; k < D; ++k)
        {
            offset[k] = (corner >> (D - 1 - k)) & 1;
            w *= offset[k] ? t[k] : 1.0 - t[k];
        }
        sum += w * dense(anchor + offset);
    }
    return sum;
}
/// Writes f(position) into every data point of every activated package.
template <int D>
void fillActive(Mesh<D> &mesh, MeshVariable<Real> &variable, const std::function<Real(const Vecd<D> &)> &f)
{
    const std::size_t ppp = mesh.pointsPerPackage();
    for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
        for (std::size_t i = 0; i < ppp; ++i)
            variable.data()[p * ppp + i] =
                f(mesh.geometry().dataPointPosition(mesh.cellOfPackage(p), mesh.geometry().dataFromLinear(i)));
}

/// Leaky icosphere: the first `removed` triangles around vertex 0 of triangle 0 are dropped.
inline std::shared_ptr<const TriangleMesh> leakySphere(int subdivisions, int removed)
{
    const TriangleMesh sphere = makeIcosphere(Vec3::Constant(0.5), 0.3, subdivisions);
    const std::uint32_t apex = sphere.triangles()[0][0];
    std::vector<TriangleMesh::Triangle> kept;
    for (const auto &t : sphere.triangles())
    {
        const bool touches = t[0] == apex || t[1] == apex || t[2] == apex;
        if (touches && removed > 0)
        {
            --removed;
            continue;
        }
        kept.push_back(t);
    }
    return std::make_shared<TriangleMesh>(TriangleMesh::fromIndexed(sphere.vertices(), kept));
}

/// Shape scaled by a constant: a level set that is not a distance.
template <int D>
struct ScaledShape : Shape<D>
{
    const Shape<D> &base;
    Real factor;
    ScaledShape(const Shape<D> &b, Real f) : base(b), factor(f) {}
    Real signedDistance(const Vecd<D> &p) const override { return factor * base.signedDistance(p); }
    Real distance(const Vecd<D> &p) const override { return base.distance(p); }
};

inline Real segmentDistance(const Vec3 &p, const Vec3 &a, const Vec3 &b)
{
    const Vec3 ab = b - a;
    const Real t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (a + t * ab - p).norm();
}

/// Plane projection when it falls inside the triangle, otherwise the nearest edge.
inline Real triangleDistance(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c)
{
    const Vec3 n = (b - a).cross(c - a).normalized();
    const Vec3 q = p - n.dot(p - a) * n;
    const bool inside = (b - a).cross(q - a).dot(n) >= 0 && (c - b).cross(q - b).dot(n) >= 0 &&
                        (a - c).cross(q - c).dot(n) >= 0;
    if (inside)
        return std::abs(n.dot(p - a));
    return std::min({segmentDistance(p, a, b), segmentDistance(p, b, c), segmentDistance(p, c, a)});
}

inline Real bruteForceDistance(const TriangleMesh &mesh, const Vec3 &p)
{
    Real best = std::numeric_limits<Real>::infinity();
    for (const auto &t : mesh.triangles())
        best = std::min(best, triangleDistance(p, mesh.vertices()[t[0]], mesh.vertices()[t[1]], mesh.vertices()[t[2]]));
    return best;
}

/// Unnormalized Wendland C2 profile, support [0, 2h).
inline Real wendlandProfile(Real r, Real h)
{
    const Real q = r / h;
    if (q >= 2.0)
        return 0.0;
    const Real a = 1.0 - 0.5 * q;
    return a * a * a * a * (2.0 * q + 1.0);
}

template <typename F>
Real simpson(F f, Real a, Real b, int n)
{
    if (b <= a)
        return 0.0;
    const Real step = (b - a) / n;
    Real sum = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        sum += f(a + i * step) * (i % 2 ? 4.0 : 2.0);
    return sum * step / 3.0;
}

/// Kernel mass on the inside of a flat interface at signed distance d, by
/// nested quadrature over slabs and disks.
struct HalfSpaceKernelOracle
{
    explicit HalfSpaceKernelOracle(Real smoothing_length)
        : h(smoothing_length), total(simpson([&](Real t) { return slab(t); }, -2.0 * h, 2.0 * h, 800)) {}

    Real slab(Real t) const
    {
        const Real rho_max = std::sqrt(std::max(0.0, 4.0 * h * h - t * t));
        return simpson([&](Real rho) { return wendlandProfile(std::hypot(t, rho), h) * 2.0 * std::numbers::pi * rho; },
                       0.0, rho_max, 400);
    }
    Real operator()(Real d) const
    {
        auto [it, fresh] = cache.try_emplace(d, 0.0);
        if (fresh)
            it->second = simpson([&](Real t) { return slab(t); }, -2.0 * h, std::min(-d, 2.0 * h), 800) / total;
        return it->second;
    }

    Real h;
    Real total;
    mutable std::map<Real, Real> cache;
};

} // namespace pkgrid::testing
#endif // PKGRID_TESTS_SUPPORT_HPP
