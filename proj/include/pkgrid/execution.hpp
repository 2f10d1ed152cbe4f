#ifndef PKGRID_EXECUTION_HPP
#define PKGRID_EXECUTION_HPP

#include "pkgrid/execution_policy.hpp"
#include "pkgrid/mesh.hpp"

#include <concepts>
#include <functional>
#include <optional>
#include <type_traits>
#include <vector>

namespace pkgrid
{
/// Chunk length used for parallel host loops over n items.
std::size_t parallelChunkSize(std::size_t n, int workers);

/// Runs body(begin, end) over [0, n) split into contiguous chunks. Sequential
/// and device policies run a single chunk on the calling thread (the device
/// backend is an in-process stand-in).
void parallelChunks(const ExecutionPolicy &policy, std::size_t n,
                    const std::function<void(std::size_t, std::size_t)> &body);

template <int D>
struct MeshRange
{
    Arrayi<D> lower = Arrayi<D>::Zero();
    Arrayi<D> upper = Arrayi<D>::Zero(); // exclusive

    std::size_t size() const
    {
        std::size_t n = 1;
        for (int k = 0; k < D; ++k)
            n *= upper[k] > lower[k] ? static_cast<std::size_t>(upper[k] - lower[k]) : 0;
        return n;
    }
};

/// Invokes kernel(cell) once per cell of the range. Iterations must be independent.
template <int D, typename Kernel>
void forEachCell(const ExecutionPolicy &policy, const MeshRange<D> &range, const Kernel &kernel)
{
    const Arrayi<D> extent = range.upper - range.lower;
    const std::size_t n = range.size();
    if (n == 0)
        return;
    parallelChunks(policy, n,
                   [&](std::size_t begin, std::size_t end)
                   {
                       for (std::size_t i = begin; i != end; ++i)
                           kernel(Arrayi<D>(range.lower + delinearizeRowMajor<D>(i, extent)));
                   });
}

/// Invokes kernel(package) for every non-singular package whose category matches.
template <int D, typename Kernel>
void forEachPackage(const ExecutionPolicy &policy, Mesh<D> &mesh, PackageCategory category, const Kernel &kernel)
{
    const MetaCell *meta = mesh.metaCell().delegatedData(policy);
    const std::size_t total = mesh.numPackages();
    if (total <= kNumSingularPackages)
        return;
    parallelChunks(policy, total - kNumSingularPackages,
                   [&](std::size_t begin, std::size_t end)
                   {
                       for (std::size_t i = begin; i != end; ++i)
                       {
                           const auto package = static_cast<PackageIndex>(i + kNumSingularPackages);
                           if (meta[package].category == category)
                               kernel(package);
                       }
                   });
}

/// Same as above for every non-singular package regardless of category.
template <int D, typename Kernel>
void forEachPackage(const ExecutionPolicy &policy, Mesh<D> &mesh, const Kernel &kernel)
{
    const std::size_t total = mesh.numPackages();
    if (total <= kNumSingularPackages)
        return;
    parallelChunks(policy, total - kNumSingularPackages,
                   [&](std::size_t begin, std::size_t end)
                   {
                       for (std::size_t i = begin; i != end; ++i)
                           kernel(static_cast<PackageIndex>(i + kNumSingularPackages));
                   });
}

/// Storage of a variable resident for the policy (lazy device migration).
template <typename T>
T *delegatedData(const ExecutionPolicy &policy, DiscreteVariable<T> &variable)
{
    return variable.delegatedData(policy);
}

/// Copies device-resident state back for the listed variables only.
inline void synchronizeToHost(std::initializer_list<std::reference_wrapper<VariableBase>> variables)
{
    for (VariableBase &variable : variables)
        variable.synchronizeToHost();
}

/// Local dynamics contract: a class holding variable handles and small
/// parameters, with a nested UpdateKernel constructible from
/// (ExecutionPolicy, LocalDynamics&) that is copyable and exposes update(index).
template <class LocalDynamics, class Index>
concept LocalDynamicsWithKernel = requires(const ExecutionPolicy &policy, LocalDynamics &local,
                                           const typename LocalDynamics::UpdateKernel &kernel, Index index) {
    typename LocalDynamics::UpdateKernel;
    requires std::is_copy_constructible_v<typename LocalDynamics::UpdateKernel>;
    requires std::constructible_from<typename LocalDynamics::UpdateKernel, const ExecutionPolicy &, LocalDynamics &>;
    kernel.update(index);
};

/// Builds the computing kernel of a local dynamics object on first request for
/// a given policy kind. Kernel construction is what resolves data views, so no
/// data moves before the first execution.
template <class LocalDynamics>
class KernelImplementation
{
  public:
    using UpdateKernel = typename LocalDynamics::UpdateKernel;

    explicit KernelImplementation(LocalDynamics &local) : local_(local) {}

    const UpdateKernel &getComputingKernel(const ExecutionPolicy &policy)
    {
        auto &slot = kernels_[static_cast<int>(policy.kind)];
        if (!slot)
            slot.emplace(policy, local_);
        return *slot;
    }
    bool kernelBuilt(ExecutionKind kind) const { return kernels_[static_cast<int>(kind)].has_value(); }

  private:
    LocalDynamics &local_;
    std::optional<UpdateKernel> kernels_[3];
};

/// Applies a local dynamics kernel to every cell of the background mesh.
template <int D, class LocalDynamics>
    requires LocalDynamicsWithKernel<LocalDynamics, Arrayi<D>>
class AllMeshDynamics
{
  public:
    template <typename... Args>
    explicit AllMeshDynamics(Mesh<D> &mesh, Args &&...args)
        : mesh_(mesh), local_(mesh, std::forward<Args>(args)...), implementation_(local_) {}

    void exec(const ExecutionPolicy &policy)
    {
        const auto kernel = implementation_.getComputingKernel(policy);
        forEachCell<D>(policy, MeshRange<D>{Arrayi<D>::Zero(), mesh_.geometry().cells_per_axis},
                       [kernel](const Arrayi<D> &cell)
                       { kernel.update(cell); });
    }
    LocalDynamics &local() { return local_; }
    const KernelImplementation<LocalDynamics> &implementation() const { return implementation_; }

  private:
    Mesh<D> &mesh_;
    LocalDynamics local_;
    KernelImplementation<LocalDynamics> implementation_;
};

/// Applies a local dynamics kernel to the packages of one category.
template <int D, class LocalDynamics>
    requires LocalDynamicsWithKernel<LocalDynamics, PackageIndex>
class MeshPackageDynamics
{
  public:
    template <typename... Args>
    MeshPackageDynamics(Mesh<D> &mesh, std::vector<PackageCategory> categories, Args &&...args)
        : mesh_(mesh), categories_(std::move(categories)), local_(mesh, std::forward<Args>(args)...),
          implementation_(local_) {}

    void exec(const ExecutionPolicy &policy)
    {
        const auto kernel = implementation_.getComputingKernel(policy);
        const MetaCell *meta = mesh_.metaCell().delegatedData(policy);
        const auto categories = categories_;
        forEachPackage<D>(policy, mesh_,
                          [kernel, meta, &categories](PackageIndex package)
                          {
                              for (PackageCategory category : categories)
                                  if (meta[package].category == category)
                                  {
                                      kernel.update(package);
                                      return;
                                  }
                          });
    }
    LocalDynamics &local() { return local_; }
    const KernelImplementation<LocalDynamics> &implementation() const { return implementation_; }

  private:
    Mesh<D> &mesh_;
    std::vector<PackageCategory> categories_;
    LocalDynamics local_;
    KernelImplementation<LocalDynamics> implementation_;
};

} // namespace pkgrid
#endif // PKGRID_EXECUTION_HPP
