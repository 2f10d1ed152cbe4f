#ifndef PKGRID_GRID_GEOMETRY_HPP
#define PKGRID_GRID_GEOMETRY_HPP

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace pkgrid
{
using Real = double;
using UnsignedInt = std::uint32_t;

template <int D>
using Vecd = Eigen::Matrix<Real, D, 1>;
template <int D>
using Arrayi = Eigen::Array<int, D, 1>;

using PackageIndex = UnsignedInt;
using LinearCellIndex = UnsignedInt;

inline constexpr PackageIndex kNegativeFarField = 0;
inline constexpr PackageIndex kPositiveFarField = 1;
inline constexpr PackageIndex kNumSingularPackages = 2;

constexpr std::size_t ipow(std::size_t base, int exponent)
{
    std::size_t result = 1;
    for (int i = 0; i < exponent; ++i)
        result *= base;
    return result;
}

/// Integer division rounding toward negative infinity.
inline int floorDiv(int a, int b)
{
    int q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

/// Row-major linearization: the last axis varies fastest.
template <int D>
std::size_t linearizeRowMajor(const Arrayi<D> &index, const Arrayi<D> &extent)
{
    std::size_t linear = 0;
    for (int k = 0; k < D; ++k)
        linear = linear * static_cast<std::size_t>(extent[k]) + static_cast<std::size_t>(index[k]);
    return linear;
}

template <int D>
Arrayi<D> delinearizeRowMajor(std::size_t linear, const Arrayi<D> &extent)
{
    Arrayi<D> index;
    for (int k = D - 1; k >= 0; --k)
    {
        index[k] = static_cast<int>(linear % static_cast<std::size_t>(extent[k]));
        linear /= static_cast<std::size_t>(extent[k]);
    }
    return index;
}

template <int D>
Arrayi<D> unitIndex(int axis)
{
    Arrayi<D> unit = Arrayi<D>::Zero();
    unit[axis] = 1;
    return unit;
}

template <int D>
bool inRange(const Arrayi<D> &index, const Arrayi<D> &extent)
{
    return (index >= 0).all() && (index < extent).all();
}

/// Background-mesh geometry of one resolution layer.
///
/// The coarse cells each own (if activated) a block of pkg_size^D data points
/// placed at sub-cell centers. data_spacing is derived, never stored
/// independently, so data_spacing * pkg_size reproduces coarse_cell_size.
template <int D>
struct GridGeometry
{
    Vecd<D> lower_corner = Vecd<D>::Zero();
    Real coarse_cell_size = 1.0;
    Arrayi<D> cells_per_axis = Arrayi<D>::Ones();
    int pkg_size = 4;

    Real dataSpacing() const { return coarse_cell_size / pkg_size; }
    std::size_t totalCells() const
    {
        std::size_t n = 1;
        for (int k = 0; k < D; ++k)
            n *= static_cast<std::size_t>(cells_per_axis[k]);
        return n;
    }
    std::size_t pointsPerPackage() const { return ipow(static_cast<std::size_t>(pkg_size), D); }
    Arrayi<D> dataPointsPerAxis() const { return cells_per_axis * pkg_size; }
    Vecd<D> upperCorner() const
    {
        return lower_corner + coarse_cell_size * cells_per_axis.template cast<Real>().matrix();
    }

    void validate() const
    {
        if (pkg_size < 2)
            throw std::invalid_argument("pkg_size must be at least 2");
        if ((cells_per_axis < 1).any())
            throw std::invalid_argument("cells_per_axis must be positive on every axis");
        if (!(coarse_cell_size > 0.0) || !std::isfinite(coarse_cell_size))
            throw std::invalid_argument("coarse_cell_size must be positive and finite");
    }

    LinearCellIndex linearCell(const Arrayi<D> &cell) const
    {
        return static_cast<LinearCellIndex>(linearizeRowMajor<D>(cell, cells_per_axis));
    }
    Arrayi<D> cellFromLinear(std::size_t linear) const
    {
        return delinearizeRowMajor<D>(linear, cells_per_axis);
    }
    std::size_t linearData(const Arrayi<D> &data) const
    {
        return linearizeRowMajor<D>(data, Arrayi<D>::Constant(pkg_size));
    }
    Arrayi<D> dataFromLinear(std::size_t linear) const
    {
        return delinearizeRowMajor<D>(linear, Arrayi<D>::Constant(pkg_size));
    }
    bool cellInRange(const Arrayi<D> &cell) const { return inRange<D>(cell, cells_per_axis); }

    Vecd<D> cellCenter(const Arrayi<D> &cell) const
    {
        return lower_corner + coarse_cell_size * (cell.template cast<Real>() + 0.5).matrix();
    }

    /// Position of a data point; cell-centered convention inside the package.
    Vecd<D> dataPointPosition(const Arrayi<D> &cell, const Arrayi<D> &data) const
    {
        if (!cellInRange(cell))
            throw std::out_of_range("cell index outside background mesh");
        if (!inRange<D>(data, Arrayi<D>::Constant(pkg_size)))
            throw std::out_of_range("data index outside package");
        return lower_corner + coarse_cell_size * cell.template cast<Real>().matrix() +
               dataSpacing() * (data.template cast<Real>() + 0.5).matrix();
    }

    /// Cell and data index of the sub-cell containing p. Points on a sub-cell
    /// boundary go to the higher index; the upper mesh face maps to the last sub-cell.
    std::pair<Arrayi<D>, Arrayi<D>> positionToIndices(const Vecd<D> &p) const
    {
        const Arrayi<D> n_data = dataPointsPerAxis();
        Arrayi<D> global;
        for (int k = 0; k < D; ++k)
        {
            const Real upper = lower_corner[k] + coarse_cell_size * cells_per_axis[k];
            if (!(p[k] >= lower_corner[k] && p[k] <= upper))
                throw std::out_of_range("position outside mesh bounds");
            int g = static_cast<int>(std::floor((p[k] - lower_corner[k]) / dataSpacing()));
            global[k] = std::min(g, n_data[k] - 1);
        }
        return {global / pkg_size, global - (global / pkg_size) * pkg_size};
    }
};

} // namespace pkgrid
#endif // PKGRID_GRID_GEOMETRY_HPP
