#include "pipeline_common.hpp"

#include <tbb/concurrent_vector.h>

#include <algorithm>

namespace pkgrid
{
template <int D>
LevelSetLayer<D>::LevelSetLayer(const GridGeometry<D> &geometry) : mesh_(std::make_unique<Mesh<D>>(geometry))
{
    phi_ = &mesh_->template registerMeshVariable<Real>("phi");
    phi_gradient_ = &mesh_->template registerMeshVariable<Vecd<D>>("phi_gradient");
    kernel_integral_ = &mesh_->template registerMeshVariable<Real>("kernel_integral");
    kernel_gradient_integral_ = &mesh_->template registerMeshVariable<Vecd<D>>("kernel_gradient_integral");
    near_interface_id_ = &mesh_->template registerMeshVariable<int>("near_interface_id");
    phi_buffer_ = &mesh_->template registerMeshVariable<Real>("phi_buffer");
    fillSingularPackages();
}
//=================================================================================================//
template <int D>
void LevelSetLayer<D>::fillSingularPackages()
{
    const std::size_t ppp = mesh_->pointsPerPackage();
    const Real large = mesh_->farFieldValue();
    auto fill = [ppp](auto &variable, PackageIndex p, const auto &value)
    { std::fill_n(variable.data() + static_cast<std::size_t>(p) * ppp, ppp, value); };
    for (MeshVariable<Real> *variable : {phi_, phi_buffer_})
    {
        fill(*variable, kNegativeFarField, -large);
        fill(*variable, kPositiveFarField, large);
    }
    fill(*kernel_integral_, kNegativeFarField, Real(1));
    fill(*kernel_integral_, kPositiveFarField, Real(0));
    for (PackageIndex p : {kNegativeFarField, kPositiveFarField})
    {
        fill(*phi_gradient_, p, Vecd<D>::Zero().eval());
        fill(*kernel_gradient_integral_, p, Vecd<D>::Zero().eval());
        fill(*near_interface_id_, p, 0);
    }
}
//=================================================================================================//
template <int D>
Real LevelSetLayer<D>::probePhiClamped(const Vecd<D> &p) const
{
    const GridGeometry<D> &g = mesh_->geometry();
    const Real half = 0.5 * g.dataSpacing();
    const Vecd<D> lower = g.lower_corner.array() + half;
    const Vecd<D> upper = g.upperCorner().array() - half;
    return probePhi(p.cwiseMax(lower).cwiseMin(upper));
}
//=================================================================================================//
std::size_t countLayers(Real coarsest_spacing, Real target_spacing)
{
    if (!(coarsest_spacing > 0.0) || !(target_spacing > 0.0))
        throw std::invalid_argument("spacings must be positive");
    if (target_spacing > coarsest_spacing)
        throw std::invalid_argument("target spacing must not exceed the coarsest spacing");
    std::size_t n = 1;
    for (Real spacing = coarsest_spacing; spacing > target_spacing; spacing *= 0.5)
        ++n;
    return n;
}
//=================================================================================================//
template <int D>
TaggedCells tagCoreCells(const GridGeometry<D> &geometry, const Shape<D> &shape, const LevelSetLayer<D> *parent,
                         const ExecutionPolicy &policy)
{
    tbb::concurrent_vector<std::pair<LinearCellIndex, PackageCategory>> tagged;
    auto test = [&](const Arrayi<D> &cell)
    {
        if (shape.distance(geometry.cellCenter(cell)) < geometry.coarse_cell_size)
            tagged.push_back({geometry.linearCell(cell), PackageCategory::Core});
    };

    if (parent == nullptr)
    {
        forEachCell<D>(policy, MeshRange<D>{Arrayi<D>::Zero(), geometry.cells_per_axis}, test);
    }
    else
    {
        const Mesh<D> &coarse = parent->mesh();
        if (!(coarse.geometry().cells_per_axis * 2 == geometry.cells_per_axis).all())
            throw std::invalid_argument("refined layer must double the parent cell count");
        std::vector<Arrayi<D>> parent_core;
        for (PackageIndex p = kNumSingularPackages; p < coarse.numPackages(); ++p)
            if (coarse.category(p) == PackageCategory::Core)
                parent_core.push_back(coarse.cellOfPackage(p));
        parallelChunks(policy, parent_core.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t i = begin; i != end; ++i)
                               for (std::size_t child = 0; child < ipow(2, D); ++child)
                                   test(Arrayi<D>(2 * parent_core[i] +
                                                  delinearizeRowMajor<D>(child, Arrayi<D>::Constant(2))));
                       });
    }
    return TaggedCells(tagged.begin(), tagged.end());
}
//=================================================================================================//
template <int D>
TaggedCells tagInnerCells(const GridGeometry<D> &geometry, const TaggedCells &core, const ExecutionPolicy &policy)
{
    std::vector<LinearCellIndex> core_sorted;
    core_sorted.reserve(core.size());
    for (const auto &entry : core)
        core_sorted.push_back(entry.first);
    std::sort(core_sorted.begin(), core_sorted.end());

    tbb::concurrent_vector<LinearCellIndex> candidates;
    parallelChunks(policy, core_sorted.size(),
                   [&](std::size_t begin, std::size_t end)
                   {
                       for (std::size_t i = begin; i != end; ++i)
                       {
                           const Arrayi<D> cell = geometry.cellFromLinear(core_sorted[i]);
                           detail::forEachNeighborOffset<D>(
                               [&](const Arrayi<D> &offset)
                               {
                                   const Arrayi<D> neighbor = cell + offset;
                                   if (!geometry.cellInRange(neighbor))
                                       return;
                                   const LinearCellIndex linear = geometry.linearCell(neighbor);
                                   if (!std::binary_search(core_sorted.begin(), core_sorted.end(), linear))
                                       candidates.push_back(linear);
                               });
                       }
                   });
    std::vector<LinearCellIndex> inner(candidates.begin(), candidates.end());
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());

    TaggedCells result;
    result.reserve(inner.size());
    for (LinearCellIndex linear : inner)
        result.emplace_back(linear, PackageCategory::Inner);
    return result;
}
//=================================================================================================//
template <int D>
void sortActivatedCells(LevelSetLayer<D> &layer, TaggedCells tagged)
{
    std::sort(tagged.begin(), tagged.end(),
              [](const auto &a, const auto &b)
              { return a.first < b.first; });
    layer.mesh().activateCells(tagged);
    layer.fillSingularPackages();
}
//=================================================================================================//
template <int D>
void evaluateLevelSetValues(LevelSetLayer<D> &layer, const Shape<D> &shape, const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    Mesh<D> &mesh = layer.mesh();
    const GridGeometry<D> &geometry = mesh.geometry();
    const std::size_t ppp = mesh.pointsPerPackage();
    Real *phi = layer.phi().data();
    forEachPackage<D>(policy, mesh,
                      [&](PackageIndex p)
                      {
                          const Arrayi<D> cell = mesh.cellOfPackage(p);
                          Real *values = phi + static_cast<std::size_t>(p) * ppp;
                          for (std::size_t i = 0; i < ppp; ++i)
                              values[i] = shape.signedDistance(geometry.dataPointPosition(cell, geometry.dataFromLinear(i)));
                      });
    const Real large = mesh.farFieldValue();
    std::fill_n(phi, ppp, -large);
    std::fill_n(phi + ppp, ppp, large);
}
//=================================================================================================//
template <int D>
void refreshNeighborhoods(LevelSetLayer<D> &layer, const InsideTest<D> &inside, const ExecutionPolicy &policy)
{
    Mesh<D> &mesh = layer.mesh();
    const GridGeometry<D> &geometry = mesh.geometry();
    const UnsignedInt *background = mesh.cellPackageIndex().data();
    CellNeighborhood<D> *neighborhoods = mesh.cellNeighborhood().data();
    forEachPackage<D>(policy, mesh,
                      [&](PackageIndex p)
                      {
                          const Arrayi<D> cell = mesh.cellOfPackage(p);
                          CellNeighborhood<D> neighborhood;
                          for (std::size_t s = 0; s < CellNeighborhood<D>::kSize; ++s)
                          {
                              const Arrayi<D> neighbor = cell + CellNeighborhood<D>::slotOffset(s) - 1;
                              if (geometry.cellInRange(neighbor))
                                  neighborhood.slots[s] = background[geometry.linearCell(neighbor)];
                              else
                                  neighborhood.slots[s] =
                                      inside(geometry.cellCenter(neighbor)) ? kNegativeFarField : kPositiveFarField;
                          }
                          neighborhoods[p] = neighborhood;
                      });
    neighborhoods[kNegativeFarField] = CellNeighborhood<D>::uniform(kNegativeFarField);
    neighborhoods[kPositiveFarField] = CellNeighborhood<D>::uniform(kPositiveFarField);
}
//=================================================================================================//
template <int D>
void buildNeighborhoods(LevelSetLayer<D> &layer, const InsideTest<D> &inside, const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    Mesh<D> &mesh = layer.mesh();
    const GridGeometry<D> &geometry = mesh.geometry();
    UnsignedInt *background = mesh.cellPackageIndex().data();
    forEachCell<D>(policy, MeshRange<D>{Arrayi<D>::Zero(), geometry.cells_per_axis},
                   [&](const Arrayi<D> &cell)
                   {
                       UnsignedInt &value = background[geometry.linearCell(cell)];
                       if (value < kNumSingularPackages)
                           value = inside(geometry.cellCenter(cell)) ? kNegativeFarField : kPositiveFarField;
                   });
    refreshNeighborhoods(layer, inside, policy);
}
//=================================================================================================//
namespace
{
template <int D>
void buildLayer(LevelSetLayer<D> &layer, const Shape<D> &shape, const LevelSetLayer<D> *parent,
                const ExecutionPolicy &policy)
{
    const GridGeometry<D> &geometry = layer.geometry();
    TaggedCells tagged = tagCoreCells(geometry, shape, parent, policy);
    TaggedCells inner = tagInnerCells(geometry, tagged, policy);
    tagged.insert(tagged.end(), inner.begin(), inner.end());
    sortActivatedCells(layer, std::move(tagged));
    evaluateLevelSetValues(layer, shape, policy);

    InsideTest<D> inside;
    if (parent == nullptr)
    {
        inside = [&shape](const Vecd<D> &p)
        { return shape.signedDistance(p) < 0.0; };
    }
    else
    {
        // Far from the parent's band its background stamp already holds the
        // answer; near it, interpolate the parent's level set.
        inside = [parent](const Vecd<D> &p)
        {
            const GridGeometry<D> &g = parent->geometry();
            Arrayi<D> cell;
            for (int k = 0; k < D; ++k)
                cell[k] = std::clamp(static_cast<int>(std::floor((p[k] - g.lower_corner[k]) / g.coarse_cell_size)), 0,
                                     g.cells_per_axis[k] - 1);
            const PackageIndex stamp = parent->mesh().packageAt(cell);
            if (stamp < kNumSingularPackages)
                return stamp == kNegativeFarField;
            return parent->probePhiClamped(p) < 0.0;
        };
    }
    buildNeighborhoods(layer, inside, policy);
}
} // namespace
//=================================================================================================//
template <int D>
MultiResolutionLevelSet<D> initializeMultiResolution(const Shape<D> &shape, const Vecd<D> &lower, const Vecd<D> &upper,
                                                     Real coarsest_spacing, Real target_spacing,
                                                     const PipelineOptions &options)
{
    detail::requireHostPolicy(options.policy);
    if (!((upper - lower).array() > 0.0).all())
        throw std::invalid_argument("empty bounds");
    const std::size_t n_layers = countLayers(coarsest_spacing, target_spacing);
    const Real coarse_cell = coarsest_spacing * options.pkg_size;
    Arrayi<D> cells;
    for (int k = 0; k < D; ++k)
        cells[k] = std::max(1, static_cast<int>(std::ceil((upper[k] - lower[k]) / coarse_cell - 1.0e-9)));

    MultiResolutionLevelSet<D> result;
    result.layers.reserve(n_layers);
    for (std::size_t level = 0; level < n_layers; ++level)
    {
        GridGeometry<D> geometry;
        geometry.lower_corner = lower;
        geometry.coarse_cell_size = coarse_cell / static_cast<Real>(1u << level);
        geometry.cells_per_axis = cells * (1 << level);
        geometry.pkg_size = options.pkg_size;

        const LevelSetLayer<D> *parent = level == 0 ? nullptr : &result.layers[level - 1];
        LevelSetLayer<D> layer(geometry);
        buildLayer(layer, shape, parent, options.policy);
        if (options.correct_signs)
        {
            SignCorrectionReport report = correctSignConsistency(
                layer, options.trust_band_ratio * layer.dataSpacing(), options.policy, parent);
            if (options.correction_reports)
                options.correction_reports->push_back(report);
        }
        result.layers.push_back(std::move(layer));
    }
    return result;
}
//=================================================================================================//
template <int D>
LevelSetLayer<D> initializeSingleLayer(const Shape<D> &shape, const GridGeometry<D> &geometry,
                                       const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    LevelSetLayer<D> layer(geometry);
    buildLayer<D>(layer, shape, nullptr, policy);
    return layer;
}
//=================================================================================================//
#define PKGRID_INSTANTIATE(D)                                                                                          \
    template class LevelSetLayer<D>;                                                                                   \
    template TaggedCells tagCoreCells<D>(const GridGeometry<D> &, const Shape<D> &, const LevelSetLayer<D> *,         \
                                         const ExecutionPolicy &);                                                     \
    template TaggedCells tagInnerCells<D>(const GridGeometry<D> &, const TaggedCells &, const ExecutionPolicy &);      \
    template void sortActivatedCells<D>(LevelSetLayer<D> &, TaggedCells);                                              \
    template void evaluateLevelSetValues<D>(LevelSetLayer<D> &, const Shape<D> &, const ExecutionPolicy &);            \
    template void buildNeighborhoods<D>(LevelSetLayer<D> &, const InsideTest<D> &, const ExecutionPolicy &);           \
    template void refreshNeighborhoods<D>(LevelSetLayer<D> &, const InsideTest<D> &, const ExecutionPolicy &);         \
    template MultiResolutionLevelSet<D> initializeMultiResolution<D>(const Shape<D> &, const Vecd<D> &,                \
                                                                     const Vecd<D> &, Real, Real,                      \
                                                                     const PipelineOptions &);                         \
    template LevelSetLayer<D> initializeSingleLayer<D>(const Shape<D> &, const GridGeometry<D> &,                      \
                                                       const ExecutionPolicy &);
PKGRID_INSTANTIATE(2)
PKGRID_INSTANTIATE(3)
#undef PKGRID_INSTANTIATE
} // namespace pkgrid
