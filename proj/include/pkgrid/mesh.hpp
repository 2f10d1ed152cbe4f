#ifndef PKGRID_MESH_HPP
#define PKGRID_MESH_HPP

#include "pkgrid/grid_geometry.hpp"
#include "pkgrid/variables.hpp"

#include <array>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <typeindex>
#include <utility>
#include <vector>

namespace pkgrid
{
enum class PackageCategory : std::uint8_t
{
    SingularNegative = 0,
    SingularPositive = 1,
    Inner = 2,
    Core = 3
};

const char *categoryName(PackageCategory category);

struct MetaCell
{
    LinearCellIndex linear_cell = 0;
    PackageCategory category = PackageCategory::Inner;
};

/// Package indexes of the 3^D cells around (and including) one package's cell.
/// Offsets are in {0,1,2}^D with 1 meaning "same cell" along that axis.
template <int D>
struct CellNeighborhood
{
    static constexpr std::size_t kSize = ipow(3, D);
    std::array<PackageIndex, kSize> slots{};

    static std::size_t slotIndex(const Arrayi<D> &offset)
    {
        std::size_t s = 0;
        for (int k = 0; k < D; ++k)
            s = s * 3 + static_cast<std::size_t>(offset[k]);
        return s;
    }
    static Arrayi<D> slotOffset(std::size_t slot) { return delinearizeRowMajor<D>(slot, Arrayi<D>::Constant(3)); }

    PackageIndex &operator()(const Arrayi<D> &offset) { return slots[slotIndex(offset)]; }
    PackageIndex operator()(const Arrayi<D> &offset) const { return slots[slotIndex(offset)]; }
    PackageIndex self() const { return slots[kSize / 2]; }

    static CellNeighborhood uniform(PackageIndex p)
    {
        CellNeighborhood n;
        n.slots.fill(p);
        return n;
    }
    friend bool operator==(const CellNeighborhood &, const CellNeighborhood &) = default;
};

/// Copyable view over a mesh variable, addressed by (package, data index).
/// This is what computing kernels capture instead of the variable itself.
template <typename T, int D>
struct MeshData
{
    T *data = nullptr;
    int pkg_size = 4;
    std::size_t points_per_package = 64;

    T *package(PackageIndex p) const { return data + static_cast<std::size_t>(p) * points_per_package; }
    std::size_t offset(const Arrayi<D> &d) const
    {
        std::size_t s = 0;
        for (int k = 0; k < D; ++k)
            s = s * static_cast<std::size_t>(pkg_size) + static_cast<std::size_t>(d[k]);
        return s;
    }
    T &operator()(PackageIndex p, const Arrayi<D> &d) const { return package(p)[offset(d)]; }
};

/// Byte accounting of the index structures that make the storage sparse.
struct TopologyAudit
{
    std::size_t activated_cells = 0;
    std::size_t neighborhood_words_per_cell = 0;
    std::size_t neighborhood_bytes_per_cell = 0;
    std::size_t meta_bytes_per_cell = 0;
    std::size_t topology_bytes_per_cell = 0; ///< neighborhood + meta record
    std::size_t background_bytes = 0;
    std::size_t mesh_variable_count = 0;
    std::size_t mesh_variable_bytes = 0;
    /// Storage beyond pkg_size^D values per package summed over all mesh
    /// variables; a halo/skin layout would make this positive.
    std::size_t mesh_variable_excess_bytes = 0;
};

/// Registry of type-specific variable assemblies keyed by (value type, name).
class VariableRegistry
{
  public:
    enum class Kind
    {
        Mesh,
        Background,
        Meta
    };

    template <typename T>
    DiscreteVariable<T> &add(Kind kind, const std::string &name, std::size_t entry_width, std::size_t entries)
    {
        auto &assembly = assemblyFor(kind);
        Key key{std::type_index(typeid(T)), name};
        if (assembly.count(key))
            throw std::invalid_argument("variable '" + name + "' already registered for this type");
        auto variable = std::make_unique<DiscreteVariable<T>>(name, entry_width, entries);
        auto &ref = *variable;
        assembly.emplace(std::move(key), std::move(variable));
        return ref;
    }

    template <typename T>
    DiscreteVariable<T> &get(Kind kind, const std::string &name) const
    {
        auto &assembly = assemblyFor(kind);
        auto it = assembly.find(Key{std::type_index(typeid(T)), name});
        if (it == assembly.end())
            throw std::out_of_range("variable '" + name + "' not registered for this type");
        return static_cast<DiscreteVariable<T> &>(*it->second);
    }

    template <typename T>
    bool contains(Kind kind, const std::string &name) const
    {
        return assemblyFor(kind).count(Key{std::type_index(typeid(T)), name}) != 0;
    }

    template <typename Function>
    void forEach(Kind kind, Function &&function) const
    {
        for (auto &[key, variable] : assemblyFor(kind))
            function(*variable);
    }

    std::size_t size(Kind kind) const { return assemblyFor(kind).size(); }

  private:
    using Key = std::pair<std::type_index, std::string>;
    using Assembly = std::map<Key, std::unique_ptr<VariableBase>>;

    Assembly &assemblyFor(Kind kind) const
    {
        switch (kind)
        {
        case Kind::Mesh:
            return mesh_;
        case Kind::Background:
            return background_;
        default:
            return meta_;
        }
    }

    mutable Assembly mesh_;
    mutable Assembly background_;
    mutable Assembly meta_;
};

/// Coarse background mesh with contiguous per-package storage.
///
/// Package 0 and 1 are the far-field singular packages; activated cells own
/// packages 2, 3, ... . The background field stores, per cell, either the
/// owning package index (>= 2) or the far-field package (0 inside, 1 outside)
/// the cell belongs to. It is allocated on first write so that very large
/// background meshes cost nothing until used.
template <int D>
class Mesh
{
  public:
    using Neighborhood = CellNeighborhood<D>;

    explicit Mesh(const GridGeometry<D> &geometry);
    Mesh(const Mesh &) = delete;
    Mesh &operator=(const Mesh &) = delete;
    Mesh(Mesh &&) noexcept = default;
    Mesh &operator=(Mesh &&) noexcept = default;

    const GridGeometry<D> &geometry() const { return geometry_; }
    Real dataSpacing() const { return geometry_.dataSpacing(); }
    int pkgSize() const { return geometry_.pkg_size; }
    std::size_t pointsPerPackage() const { return geometry_.pointsPerPackage(); }
    std::size_t numPackages() const { return num_packages_; }
    std::size_t numActivatedCells() const { return num_packages_ - kNumSingularPackages; }
    /// Far-field magnitude stored in the singular packages.
    Real farFieldValue() const { return 1.0e4 * geometry_.coarse_cell_size; }

    /// Resizes every mesh and meta variable; entries below min(old, new) keep their contents.
    void reallocatePackages(std::size_t new_total);

    template <typename T>
    MeshVariable<T> &registerMeshVariable(const std::string &name)
    {
        return registry_->template add<T>(VariableRegistry::Kind::Mesh, name, pointsPerPackage(), num_packages_);
    }
    template <typename T>
    MeshVariable<T> &getMeshVariable(const std::string &name) const
    {
        return registry_->template get<T>(VariableRegistry::Kind::Mesh, name);
    }
    template <typename T>
    bool hasMeshVariable(const std::string &name) const
    {
        return registry_->template contains<T>(VariableRegistry::Kind::Mesh, name);
    }
    template <typename T>
    MetaVariable<T> &registerMetaVariable(const std::string &name)
    {
        return registry_->template add<T>(VariableRegistry::Kind::Meta, name, 1, num_packages_);
    }
    template <typename T>
    MetaVariable<T> &getMetaVariable(const std::string &name) const
    {
        return registry_->template get<T>(VariableRegistry::Kind::Meta, name);
    }
    template <typename T>
    BackgroundVariable<T> &registerBackgroundVariable(const std::string &name)
    {
        return registry_->template add<T>(VariableRegistry::Kind::Background, name, 1, geometry_.totalCells());
    }
    template <typename T>
    BackgroundVariable<T> &getBackgroundVariable(const std::string &name) const
    {
        return registry_->template get<T>(VariableRegistry::Kind::Background, name);
    }

    template <typename T>
    MeshData<T, D> meshData(MeshVariable<T> &variable, const ExecutionPolicy &policy) const
    {
        return {variable.delegatedData(policy), geometry_.pkg_size, pointsPerPackage()};
    }
    template <typename T>
    MeshData<T, D> meshData(MeshVariable<T> &variable) const
    {
        return meshData(variable, ExecutionPolicy::sequential());
    }

    const VariableRegistry &registry() const { return *registry_; }

    bool backgroundAllocated() const { return cell_package_index_->numEntries() != 0; }
    /// Allocates the background field (all zero) if it does not exist yet.
    BackgroundVariable<UnsignedInt> &cellPackageIndex();
    const BackgroundVariable<UnsignedInt> &cellPackageIndex() const { return *cell_package_index_; }
    MetaVariable<Neighborhood> &cellNeighborhood() { return *cell_neighborhood_; }
    const MetaVariable<Neighborhood> &cellNeighborhood() const { return *cell_neighborhood_; }
    MetaVariable<MetaCell> &metaCell() { return *meta_cell_; }
    const MetaVariable<MetaCell> &metaCell() const { return *meta_cell_; }

    bool isActivated(const Arrayi<D> &cell) const { return packageAt(cell) >= kNumSingularPackages; }
    /// Background value of a cell: its package, or 0/1 for unactivated cells.
    PackageIndex packageAt(const Arrayi<D> &cell) const
    {
        if (!backgroundAllocated())
            return kNegativeFarField;
        return cell_package_index_->data()[geometry_.linearCell(cell)];
    }
    Arrayi<D> cellOfPackage(PackageIndex p) const
    {
        return geometry_.cellFromLinear(meta_cell_->data()[p].linear_cell);
    }
    PackageCategory category(PackageIndex p) const { return meta_cell_->data()[p].category; }

    /// Assigns packages 2.. to the given cells in order. Cells must be unique.
    void activateCells(const std::vector<std::pair<LinearCellIndex, PackageCategory>> &sorted_cells);

    /// Checks the background/meta bijection and neighborhood self-reference.
    /// Throws std::logic_error describing the first violation.
    void checkTopology() const;

    TopologyAudit topologyAudit() const;

  private:
    GridGeometry<D> geometry_;
    std::size_t num_packages_ = kNumSingularPackages;
    std::unique_ptr<VariableRegistry> registry_;
    BackgroundVariable<UnsignedInt> *cell_package_index_ = nullptr;
    MetaVariable<Neighborhood> *cell_neighborhood_ = nullptr;
    MetaVariable<MetaCell> *meta_cell_ = nullptr;
};

extern template class Mesh<2>;
extern template class Mesh<3>;

} // namespace pkgrid
#endif // PKGRID_MESH_HPP
