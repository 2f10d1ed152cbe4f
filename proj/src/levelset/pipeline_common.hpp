#ifndef PKGRID_SRC_PIPELINE_COMMON_HPP
#define PKGRID_SRC_PIPELINE_COMMON_HPP

#include "pkgrid/levelset.hpp"

#include <stdexcept>

namespace pkgrid::detail
{
// Pipeline stages read topology straight from host arrays; device residency
// is exercised by the execution module only.
inline void requireHostPolicy(const ExecutionPolicy &policy)
{
    if (!policy.onHost())
        throw std::invalid_argument("level-set pipeline stages run on host policies only");
}

template <int D, typename Function>
void forEachNeighborOffset(const Function &function)
{
    constexpr std::size_t n = ipow(3, D);
    for (std::size_t s = 0; s < n; ++s)
    {
        const Arrayi<D> offset = delinearizeRowMajor<D>(s, Arrayi<D>::Constant(3)) - 1;
        if ((offset == 0).all())
            continue;
        function(offset);
    }
}

/// Copies packages [2, total) of one variable into another of the same layout.
template <int D, typename T>
void copyPackages(const ExecutionPolicy &policy, Mesh<D> &mesh, const MeshVariable<T> &from, MeshVariable<T> &to)
{
    const std::size_t ppp = mesh.pointsPerPackage();
    const T *src = from.data();
    T *dst = to.data();
    forEachPackage<D>(policy, mesh,
                      [=](PackageIndex p)
                      {
                          const std::size_t base = static_cast<std::size_t>(p) * ppp;
                          std::copy(src + base, src + base + ppp, dst + base);
                      });
}

} // namespace pkgrid::detail
#endif // PKGRID_SRC_PIPELINE_COMMON_HPP
