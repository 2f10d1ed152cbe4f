#include "pipeline_common.hpp"

#include <atomic>

namespace pkgrid
{
namespace
{
template <int D>
struct StencilEntry
{
    Arrayi<D> shift;
    Real weight;
    Vecd<D> gradient_weight;
};

/// Convolution of the smoothed interior indicator H(-phi) with W and grad W.
/// Sums are normalized by the discrete kernel sum on the full lattice so that
/// a point surrounded by interior gets exactly 1.
template <int D>
class KernelIntegrals
{
  public:
    KernelIntegrals(Mesh<D> &mesh, LevelSetLayer<D> &layer, const SmoothingKernel<D> &kernel)
        : mesh_(mesh), layer_(layer)
    {
        const Real ds = mesh.dataSpacing();
        const int reach = static_cast<int>(std::ceil(kernel.cutoffRadius() / ds));
        const Arrayi<D> extent = Arrayi<D>::Constant(2 * reach + 1);
        Real sum = 0.0;
        for (std::size_t s = 0; s < ipow(2 * reach + 1, D); ++s)
        {
            const Arrayi<D> shift = delinearizeRowMajor<D>(s, extent) - reach;
            const Vecd<D> displacement = ds * shift.template cast<Real>().matrix();
            const Real w = kernel.W(displacement.norm());
            if (w <= 0.0)
                continue;
            stencil_.push_back({shift, w, kernel.gradW(displacement)});
            sum += w;
        }
        for (StencilEntry<D> &entry : stencil_)
        {
            entry.weight /= sum;
            entry.gradient_weight /= sum;
        }
    }

    class UpdateKernel
    {
      public:
        UpdateKernel(const ExecutionPolicy &policy, KernelIntegrals &local)
            : mesh_(&local.mesh_), phi_(local.mesh_.meshData(local.layer_.phi(), policy)),
              integral_(local.mesh_.meshData(local.layer_.kernelIntegral(), policy)),
              gradient_integral_(local.mesh_.meshData(local.layer_.kernelGradientIntegral(), policy)),
              neighborhoods_(local.mesh_.cellNeighborhood().delegatedData(policy)), stencil_(local.stencil_.data()),
              stencil_size_(local.stencil_.size()), data_points_(local.mesh_.geometry().dataPointsPerAxis()),
              epsilon_(local.mesh_.dataSpacing()) {}

        void update(PackageIndex p) const
        {
            const int pkg = phi_.pkg_size;
            const Arrayi<D> cell = mesh_->cellOfPackage(p);
            for (std::size_t i = 0; i < phi_.points_per_package; ++i)
            {
                const Arrayi<D> data = delinearizeRowMajor<D>(i, Arrayi<D>::Constant(pkg));
                const Arrayi<D> origin = cell * pkg + data;
                Real integral = 0.0;
                Vecd<D> gradient = Vecd<D>::Zero();
                for (std::size_t s = 0; s < stencil_size_; ++s)
                {
                    const StencilEntry<D> &entry = stencil_[s];
                    const Real heaviside = smoothedHeaviside(-valueAt(p, cell, data, origin, entry.shift), epsilon_);
                    integral += heaviside * entry.weight;
                    gradient += heaviside * entry.gradient_weight;
                }
                integral_.package(p)[i] = integral;
                gradient_integral_.package(p)[i] = gradient;
            }
        }

      private:
        // Points beyond the mesh take the value of the nearest boundary point.
        Real valueAt(PackageIndex p, const Arrayi<D> &cell, const Arrayi<D> &data, const Arrayi<D> &origin,
                     const Arrayi<D> &shift) const
        {
            const int pkg = phi_.pkg_size;
            const Arrayi<D> target = origin + shift;
            if (!inRange<D>(target, data_points_))
            {
                const Arrayi<D> clamped = target.max(0).min(data_points_ - 1);
                const DataPackagePair<D> pair = generalShift<D>(*mesh_, cell, data, clamped - origin);
                return phi_(pair.package, pair.data);
            }
            const Arrayi<D> local = data + shift;
            if ((local >= -pkg).all() && (local < 2 * pkg).all())
            {
                const DataPackagePair<D> pair = neighbourIndexShift<D>(local, neighborhoods_[p], pkg);
                return phi_(pair.package, pair.data);
            }
            const DataPackagePair<D> pair = generalShift<D>(*mesh_, cell, data, shift);
            return phi_(pair.package, pair.data);
        }

        const Mesh<D> *mesh_;
        MeshData<Real, D> phi_, integral_;
        MeshData<Vecd<D>, D> gradient_integral_;
        const CellNeighborhood<D> *neighborhoods_;
        const StencilEntry<D> *stencil_;
        std::size_t stencil_size_;
        Arrayi<D> data_points_;
        Real epsilon_;
    };

  private:
    Mesh<D> &mesh_;
    LevelSetLayer<D> &layer_;
    std::vector<StencilEntry<D>> stencil_;
};
} // namespace
//=================================================================================================//
template <int D>
void computeKernelIntegrals(LevelSetLayer<D> &layer, const SmoothingKernel<D> &kernel, const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    MeshPackageDynamics<D, KernelIntegrals<D>> integrals(layer.mesh(), {PackageCategory::Inner, PackageCategory::Core},
                                                          layer, kernel);
    integrals.exec(policy);
}
//=================================================================================================//
template <int D>
CleaningReport cleanSmallFeatures(LevelSetLayer<D> &layer, const SmoothingKernel<D> &kernel,
                                  const CleaningOptions &options, const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    Mesh<D> &mesh = layer.mesh();
    const std::size_t ppp = mesh.pointsPerPackage();
    const Real ds = mesh.dataSpacing();
    Real *phi = layer.phi().data();
    const Real *integral = layer.kernelIntegral().data();
    CleaningReport report;
    bool integrals_current = false;
    for (int round = 0; round < options.max_rounds; ++round)
    {
        computeKernelIntegrals(layer, kernel, policy);
        integrals_current = true;
        std::atomic<std::size_t> modified{0};
        // Each point reads only its own phi and integral, so in place is safe.
        forEachPackage<D>(policy, mesh,
                          [&](PackageIndex p)
                          {
                              const std::size_t base = static_cast<std::size_t>(p) * ppp;
                              std::size_t local = 0;
                              for (std::size_t i = base; i < base + ppp; ++i)
                                  if (phi[i] > -ds && phi[i] <= 0.0 && integral[i] < options.threshold)
                                  {
                                      phi[i] = ds;
                                      ++local;
                                  }
                              modified += local;
                          });
        if (modified == 0)
            break;
        report.modified_points += modified;
        ++report.rounds;
        reinitializeLevelSet(layer, options.reinit_steps, options.cfl, policy);
        integrals_current = false;
    }
    if (!integrals_current)
        computeKernelIntegrals(layer, kernel, policy);
    return report;
}
//=================================================================================================//
template void computeKernelIntegrals<2>(LevelSetLayer<2> &, const SmoothingKernel<2> &, const ExecutionPolicy &);
template void computeKernelIntegrals<3>(LevelSetLayer<3> &, const SmoothingKernel<3> &, const ExecutionPolicy &);
template CleaningReport cleanSmallFeatures<2>(LevelSetLayer<2> &, const SmoothingKernel<2> &, const CleaningOptions &,
                                              const ExecutionPolicy &);
template CleaningReport cleanSmallFeatures<3>(LevelSetLayer<3> &, const SmoothingKernel<3> &, const CleaningOptions &,
                                              const ExecutionPolicy &);
} // namespace pkgrid
