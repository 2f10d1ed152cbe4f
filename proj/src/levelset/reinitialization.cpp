#include "pipeline_common.hpp"

namespace pkgrid
{
namespace
{
/// One pseudo-time step of phi_t + S(phi0)(|grad phi| - 1) = 0, read from phi,
/// written to phi_buffer.
template <int D>
class ReinitializationStep
{
  public:
    ReinitializationStep(Mesh<D> &mesh, LevelSetLayer<D> &layer, const std::vector<Real> &phi0, Real cfl)
        : mesh_(mesh), layer_(layer), phi0_(phi0), cfl_(cfl) {}

    class UpdateKernel
    {
      public:
        UpdateKernel(const ExecutionPolicy &policy, ReinitializationStep &local)
            : phi_(local.mesh_.meshData(local.layer_.phi(), policy)),
              buffer_(local.mesh_.meshData(local.layer_.phiBuffer(), policy)), phi0_(local.phi0_.data()),
              neighborhoods_(local.mesh_.cellNeighborhood().delegatedData(policy)),
              data_spacing_(local.mesh_.dataSpacing()), pseudo_dt_(local.cfl_ * local.mesh_.dataSpacing()) {}

        void update(PackageIndex p) const
        {
            const Arrayi<D> extent = Arrayi<D>::Constant(phi_.pkg_size);
            const std::size_t base = static_cast<std::size_t>(p) * phi_.points_per_package;
            for (std::size_t i = 0; i < phi_.points_per_package; ++i)
            {
                const Real phi0 = phi0_[base + i];
                const Real smoothed_sign = phi0 / std::sqrt(phi0 * phi0 + data_spacing_ * data_spacing_);
                const Vecd<D> upwind = regularizedCentralDifference<D>(phi_, neighborhoods_[p],
                                                                       delinearizeRowMajor<D>(i, extent),
                                                                       GodunovUpwind{phi0 >= 0.0 ? 1.0 : -1.0});
                const Real magnitude = upwind.norm() / data_spacing_;
                buffer_.package(p)[i] = phi_.package(p)[i] - pseudo_dt_ * smoothed_sign * (magnitude - 1.0);
            }
        }

      private:
        MeshData<Real, D> phi_, buffer_;
        const Real *phi0_;
        const CellNeighborhood<D> *neighborhoods_;
        Real data_spacing_, pseudo_dt_;
    };

  private:
    Mesh<D> &mesh_;
    LevelSetLayer<D> &layer_;
    const std::vector<Real> &phi0_;
    Real cfl_;
};

template <int D>
class UpdateLevelSetGradient
{
  public:
    UpdateLevelSetGradient(Mesh<D> &mesh, LevelSetLayer<D> &layer) : mesh_(mesh), layer_(layer) {}

    class UpdateKernel
    {
      public:
        UpdateKernel(const ExecutionPolicy &policy, UpdateLevelSetGradient &local)
            : phi_(local.mesh_.meshData(local.layer_.phi(), policy)),
              gradient_(local.mesh_.meshData(local.layer_.phiGradient(), policy)),
              neighborhoods_(local.mesh_.cellNeighborhood().delegatedData(policy)),
              data_spacing_(local.mesh_.dataSpacing()) {}

        void update(PackageIndex p) const
        {
            const Arrayi<D> extent = Arrayi<D>::Constant(phi_.pkg_size);
            for (std::size_t i = 0; i < phi_.points_per_package; ++i)
                gradient_.package(p)[i] = regularizedCentralDifference<D>(phi_, neighborhoods_[p],
                                                                          delinearizeRowMajor<D>(i, extent),
                                                                          CentralAverage{}) /
                                          data_spacing_;
        }

      private:
        MeshData<Real, D> phi_;
        MeshData<Vecd<D>, D> gradient_;
        const CellNeighborhood<D> *neighborhoods_;
        Real data_spacing_;
    };

  private:
    Mesh<D> &mesh_;
    LevelSetLayer<D> &layer_;
};

std::vector<PackageCategory> bandCategories() { return {PackageCategory::Inner, PackageCategory::Core}; }
} // namespace
//=================================================================================================//
template <int D>
Real bandGradientResidual(LevelSetLayer<D> &layer)
{
    Mesh<D> &mesh = layer.mesh();
    const MeshData<Real, D> phi = mesh.meshData(layer.phi());
    const CellNeighborhood<D> *neighborhoods = mesh.cellNeighborhood().data();
    const Arrayi<D> extent = Arrayi<D>::Constant(mesh.pkgSize());
    const Real ds = mesh.dataSpacing();
    Real sum = 0.0;
    std::size_t count = 0;
    for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
    {
        if (mesh.category(p) != PackageCategory::Core)
            continue;
        for (std::size_t i = 0; i < mesh.pointsPerPackage(); ++i)
        {
            const Real value = phi.package(p)[i];
            const Vecd<D> upwind = regularizedCentralDifference<D>(phi, neighborhoods[p], delinearizeRowMajor<D>(i, extent),
                                                                   GodunovUpwind{value >= 0.0 ? 1.0 : -1.0});
            sum += std::abs(upwind.norm() / ds - 1.0);
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<Real>(count);
}
//=================================================================================================//
template <int D>
std::vector<Real> reinitializeLevelSet(LevelSetLayer<D> &layer, int n_steps, Real cfl, const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    if (n_steps < 0 || !(cfl > 0.0))
        throw std::invalid_argument("reinitialization needs n_steps >= 0 and cfl > 0");
    Mesh<D> &mesh = layer.mesh();
    const std::vector<Real> phi0(layer.phi().hostData().begin(), layer.phi().hostData().end());
    MeshPackageDynamics<D, ReinitializationStep<D>> step(mesh, bandCategories(), layer, phi0, cfl);
    std::vector<Real> residuals;
    residuals.reserve(static_cast<std::size_t>(n_steps));
    for (int n = 0; n < n_steps; ++n)
    {
        step.exec(policy);
        detail::copyPackages(policy, mesh, layer.phiBuffer(), layer.phi());
        residuals.push_back(bandGradientResidual(layer));
    }
    return residuals;
}
//=================================================================================================//
template <int D>
void updateLevelSetGradient(LevelSetLayer<D> &layer, const ExecutionPolicy &policy)
{
    detail::requireHostPolicy(policy);
    MeshPackageDynamics<D, UpdateLevelSetGradient<D>> update(layer.mesh(), bandCategories(), layer);
    update.exec(policy);
}
//=================================================================================================//
template Real bandGradientResidual<2>(LevelSetLayer<2> &);
template Real bandGradientResidual<3>(LevelSetLayer<3> &);
template std::vector<Real> reinitializeLevelSet<2>(LevelSetLayer<2> &, int, Real, const ExecutionPolicy &);
template std::vector<Real> reinitializeLevelSet<3>(LevelSetLayer<3> &, int, Real, const ExecutionPolicy &);
template void updateLevelSetGradient<2>(LevelSetLayer<2> &, const ExecutionPolicy &);
template void updateLevelSetGradient<3>(LevelSetLayer<3> &, const ExecutionPolicy &);
} // namespace pkgrid
