#ifndef PKGRID_ACCESS_HPP
#define PKGRID_ACCESS_HPP

#include "pkgrid/mesh.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pkgrid
{
template <int D>
struct DataPackagePair
{
    PackageIndex package = 0;
    Arrayi<D> data = Arrayi<D>::Zero();

    friend bool operator==(const DataPackagePair &a, const DataPackagePair &b)
    {
        return a.package == b.package && (a.data == b.data).all();
    }
};

/// Resolves a data index shifted relative to a package into the nearest-neighbor
/// package holding it. Every shift component must lie in [-pkg_size, 2*pkg_size).
/// Touches nothing but the 3^D neighborhood record.
template <int D>
inline DataPackagePair<D> neighbourIndexShift(const Arrayi<D> &shift_index,
                                              const CellNeighborhood<D> &neighborhood, int pkg_size)
{
    assert((shift_index >= -pkg_size).all() && (shift_index < 2 * pkg_size).all());
    const Arrayi<D> shifted = shift_index + pkg_size;
    // shifted lies in [0, 3 * pkg_size): two comparisons give the quotient
    // without an integer division.
    const Arrayi<D> neighbour_index =
        (shifted >= pkg_size).template cast<int>() + (shifted >= 2 * pkg_size).template cast<int>();
    return {neighborhood(neighbour_index), shifted - neighbour_index * pkg_size};
}

/// Two-step access for arbitrary shifts: find the target cell on the background
/// mesh first, then the data point inside it. Unactivated targets resolve to
/// the far-field package recorded for that cell.
template <int D>
DataPackagePair<D> generalShift(const Mesh<D> &mesh, const Arrayi<D> &cell, const Arrayi<D> &data,
                                const Arrayi<D> &shift_index)
{
    const int pkg = mesh.pkgSize();
    const Arrayi<D> global = cell * pkg + data + shift_index;
    Arrayi<D> target_cell;
    for (int k = 0; k < D; ++k)
        target_cell[k] = floorDiv(global[k], pkg);
    if (!mesh.geometry().cellInRange(target_cell))
        throw std::out_of_range("shifted data point outside mesh bounds");
    return {mesh.packageAt(target_cell), global - target_cell * pkg};
}

/// Multilinear interpolation of a mesh variable at position p.
///
/// The anchor is the data point whose coordinates are the floor of p in data
/// units; it is clamped so the 2^D stencil stays inside the mesh. p must lie
/// within the mesh bounds shrunk by half a data spacing.
template <int D, typename T>
T probe(const Mesh<D> &mesh, const MeshData<T, D> &variable, const Vecd<D> &p)
{
    const GridGeometry<D> &geometry = mesh.geometry();
    const Real ds = geometry.dataSpacing();
    const Arrayi<D> n_data = geometry.dataPointsPerAxis();
    const int pkg = geometry.pkg_size;

    Arrayi<D> anchor;
    Vecd<D> fraction;
    for (int k = 0; k < D; ++k)
    {
        const Real u = (p[k] - geometry.lower_corner[k]) / ds - 0.5;
        if (!(u >= 0.0 && u <= static_cast<Real>(n_data[k] - 1)))
            throw std::out_of_range("probe position outside interpolation domain");
        anchor[k] = std::min(static_cast<int>(std::floor(u)), n_data[k] - 2);
        fraction[k] = u - anchor[k];
    }
    const Arrayi<D> anchor_cell = anchor / pkg;
    const Arrayi<D> anchor_data = anchor - anchor_cell * pkg;
    const PackageIndex anchor_package = mesh.packageAt(anchor_cell);
    const bool use_neighborhood = anchor_package >= kNumSingularPackages;
    const CellNeighborhood<D> *neighborhood =
        use_neighborhood ? &mesh.cellNeighborhood().data()[anchor_package] : nullptr;

    constexpr int corners = 1 << D;
    T result{};
    bool first = true;
    for (int corner = 0; corner < corners; ++corner)
    {
        Arrayi<D> offset;
        Real weight = 1.0;
        for (int k = 0; k < D; ++k)
        {
            offset[k] = (corner >> (D - 1 - k)) & 1;
            weight *= offset[k] ? fraction[k] : 1.0 - fraction[k];
        }
        const DataPackagePair<D> pair =
            use_neighborhood ? neighbourIndexShift<D>(anchor_data + offset, *neighborhood, pkg)
                             : generalShift<D>(mesh, anchor_cell, anchor_data, offset);
        const T value = variable(pair.package, pair.data);
        if (first)
        {
            result = weight * value;
            first = false;
        }
        else
        {
            result = result + weight * value;
        }
    }
    return result;
}

/// Values of the two axis-k neighbors of an in-package data point. Crossing a
/// package face goes through the neighborhood slot on that side; reads the
/// same entries neighbourIndexShift would resolve.
template <int D>
std::pair<Real, Real> axisNeighbors(const MeshData<Real, D> &input, const CellNeighborhood<D> &neighborhood,
                                    const Arrayi<D> &data_index, std::size_t center_offset, int axis)
{
    const int pkg = input.pkg_size;
    std::size_t stride = 1, slot_stride = 1;
    for (int k = D - 1; k > axis; --k)
    {
        stride *= static_cast<std::size_t>(pkg);
        slot_stride *= 3;
    }
    constexpr std::size_t self_slot = CellNeighborhood<D>::kSize / 2;
    const Real *own = input.package(neighborhood.slots[self_slot]);
    const std::size_t wrap = static_cast<std::size_t>(pkg - 1) * stride;
    const Real minus = data_index[axis] > 0
                           ? own[center_offset - stride]
                           : input.package(neighborhood.slots[self_slot - slot_stride])[center_offset + wrap];
    const Real plus = data_index[axis] + 1 < pkg
                          ? own[center_offset + stride]
                          : input.package(neighborhood.slots[self_slot + slot_stride])[center_offset - wrap];
    return {minus, plus};
}

/// Per-axis one-sided differences combined by a regularizer. Differences are
/// undivided; callers divide by the data spacing. data_index must lie inside
/// the package.
template <int D, typename RegularizeFunction>
Vecd<D> regularizedCentralDifference(const MeshData<Real, D> &input, const CellNeighborhood<D> &neighborhood,
                                     const Arrayi<D> &data_index, const RegularizeFunction &regularize_function)
{
    assert(inRange<D>(data_index, Arrayi<D>::Constant(input.pkg_size)));
    const std::size_t center_offset = input.offset(data_index);
    const Real center_value = input.package(neighborhood.self())[center_offset];
    Vecd<D> result;
    for (int k = 0; k < D; ++k)
    {
        const auto [minus, plus] = axisNeighbors<D>(input, neighborhood, data_index, center_offset, k);
        result[k] = regularize_function(plus - center_value, center_value - minus);
    }
    return result;
}

/// Second-order Laplacian: (sum of the 2D axis neighbors - 2D * center) / spacing^2.
/// Summation order is x-, x+, y-, y+, z-, z+ so that vectorized variants can
/// reproduce it bit for bit.
template <int D>
Real laplacian7pt(const MeshData<Real, D> &input, const CellNeighborhood<D> &neighborhood,
                  const Arrayi<D> &data_index, Real data_spacing)
{
    assert(inRange<D>(data_index, Arrayi<D>::Constant(input.pkg_size)));
    const std::size_t center_offset = input.offset(data_index);
    const Real center_value = input.package(neighborhood.self())[center_offset];
    Real sum = 0.0;
    for (int k = 0; k < D; ++k)
    {
        const auto [minus, plus] = axisNeighbors<D>(input, neighborhood, data_index, center_offset, k);
        sum = (k == 0) ? minus : sum + minus;
        sum = sum + plus;
    }
    return (sum - (2.0 * D) * center_value) / (data_spacing * data_spacing);
}

/// Plain average of the one-sided differences (no upwinding).
struct CentralAverage
{
    Real operator()(Real d_plus, Real d_minus) const { return 0.5 * (d_plus + d_minus); }
};

/// Godunov upwind selection for |grad phi| in reinitialization. Returns the
/// magnitude of the upwind difference for the given sign of phi.
struct GodunovUpwind
{
    Real sign = 1.0;
    Real operator()(Real d_plus, Real d_minus) const
    {
        if (sign > 0.0)
            return std::max(std::max(d_minus, 0.0), -std::min(d_plus, 0.0));
        return std::max(-std::min(d_minus, 0.0), std::max(d_plus, 0.0));
    }
};

} // namespace pkgrid
#endif // PKGRID_ACCESS_HPP
