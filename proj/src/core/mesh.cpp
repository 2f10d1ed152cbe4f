#include "pkgrid/mesh.hpp"

#include <sstream>

namespace pkgrid
{
const char *categoryName(PackageCategory category)
{
    switch (category)
    {
    case PackageCategory::SingularNegative:
        return "singular-negative";
    case PackageCategory::SingularPositive:
        return "singular-positive";
    case PackageCategory::Inner:
        return "inner";
    case PackageCategory::Core:
        return "core";
    }
    return "unknown";
}
//=================================================================================================//
template <int D>
Mesh<D>::Mesh(const GridGeometry<D> &geometry)
    : geometry_(geometry), registry_(std::make_unique<VariableRegistry>())
{
    geometry_.validate();
    cell_package_index_ =
        &registry_->add<UnsignedInt>(VariableRegistry::Kind::Background, "cell_package_index", 1, 0);
    cell_neighborhood_ =
        &registry_->add<Neighborhood>(VariableRegistry::Kind::Meta, "cell_neighborhood", 1, num_packages_);
    meta_cell_ = &registry_->add<MetaCell>(VariableRegistry::Kind::Meta, "meta_data_cell", 1, num_packages_);

    cell_neighborhood_->data()[kNegativeFarField] = Neighborhood::uniform(kNegativeFarField);
    cell_neighborhood_->data()[kPositiveFarField] = Neighborhood::uniform(kPositiveFarField);
    meta_cell_->data()[kNegativeFarField] = {0, PackageCategory::SingularNegative};
    meta_cell_->data()[kPositiveFarField] = {0, PackageCategory::SingularPositive};
}
//=================================================================================================//
template <int D>
void Mesh<D>::reallocatePackages(std::size_t new_total)
{
    if (new_total < kNumSingularPackages)
        throw std::invalid_argument("package count must include the two singular packages");
    auto resize = [new_total](VariableBase &variable)
    { variable.resizeEntries(new_total); };
    registry_->forEach(VariableRegistry::Kind::Mesh, resize);
    registry_->forEach(VariableRegistry::Kind::Meta, resize);
    num_packages_ = new_total;
}
//=================================================================================================//
template <int D>
BackgroundVariable<UnsignedInt> &Mesh<D>::cellPackageIndex()
{
    if (!backgroundAllocated())
        cell_package_index_->resizeEntries(geometry_.totalCells());
    return *cell_package_index_;
}
//=================================================================================================//
template <int D>
void Mesh<D>::activateCells(const std::vector<std::pair<LinearCellIndex, PackageCategory>> &sorted_cells)
{
    const std::size_t total_cells = geometry_.totalCells();
    for (std::size_t i = 0; i < sorted_cells.size(); ++i)
    {
        if (sorted_cells[i].first >= total_cells)
            throw std::out_of_range("activated cell outside background mesh");
        if (i > 0 && sorted_cells[i].first == sorted_cells[i - 1].first)
            throw std::invalid_argument("cell activated twice");
    }
    reallocatePackages(kNumSingularPackages + sorted_cells.size());
    UnsignedInt *background = cellPackageIndex().data();
    MetaCell *meta = meta_cell_->data();
    for (std::size_t i = 0; i < sorted_cells.size(); ++i)
    {
        const auto package = static_cast<PackageIndex>(i + kNumSingularPackages);
        if (background[sorted_cells[i].first] >= kNumSingularPackages)
            throw std::invalid_argument("cell activated twice");
        background[sorted_cells[i].first] = package;
        meta[package] = {sorted_cells[i].first, sorted_cells[i].second};
    }
}
//=================================================================================================//
template <int D>
void Mesh<D>::checkTopology() const
{
    auto fail = [](const std::string &what)
    { throw std::logic_error("topology check failed: " + what); };

    const Neighborhood *neighborhood = cell_neighborhood_->data();
    const MetaCell *meta = meta_cell_->data();
    for (PackageIndex s = 0; s < kNumSingularPackages; ++s)
        if (neighborhood[s] != Neighborhood::uniform(s))
            fail("singular package neighborhood is not self-referential");

    std::size_t activated = 0;
    if (backgroundAllocated())
    {
        const UnsignedInt *background = cell_package_index_->data();
        for (std::size_t c = 0; c < geometry_.totalCells(); ++c)
        {
            const UnsignedInt p = background[c];
            if (p < kNumSingularPackages)
                continue;
            ++activated;
            if (p >= num_packages_ || meta[p].linear_cell != c)
            {
                std::ostringstream os;
                os << "cell " << c << " maps to package " << p << " which does not map back";
                fail(os.str());
            }
        }
    }
    if (activated != numActivatedCells())
        fail("activated cell count differs from package count");
    for (PackageIndex p = kNumSingularPackages; p < num_packages_; ++p)
    {
        if (meta[p].category != PackageCategory::Inner && meta[p].category != PackageCategory::Core)
            fail("non-singular package with singular category");
        if (neighborhood[p].self() != p)
            fail("neighborhood center slot is not the owning package");
    }
}
//=================================================================================================//
template <int D>
TopologyAudit Mesh<D>::topologyAudit() const
{
    TopologyAudit audit;
    audit.activated_cells = numActivatedCells();
    audit.neighborhood_words_per_cell = Neighborhood::kSize;
    audit.neighborhood_bytes_per_cell = cell_neighborhood_->hostBytes() / num_packages_;
    audit.meta_bytes_per_cell = meta_cell_->hostBytes() / num_packages_;
    audit.topology_bytes_per_cell = audit.neighborhood_bytes_per_cell + audit.meta_bytes_per_cell;
    audit.background_bytes = cell_package_index_->hostBytes();
    registry_->forEach(VariableRegistry::Kind::Mesh,
                       [&](const VariableBase &variable)
                       {
                           ++audit.mesh_variable_count;
                           audit.mesh_variable_bytes += variable.hostBytes();
                           const std::size_t value_bytes = variable.hostBytes() / (variable.numEntries() * variable.entryWidth());
                           const std::size_t minimal = num_packages_ * pointsPerPackage() * value_bytes;
                           audit.mesh_variable_excess_bytes += variable.hostBytes() - minimal;
                       });
    return audit;
}
//=================================================================================================//
template class Mesh<2>;
template class Mesh<3>;
} // namespace pkgrid
