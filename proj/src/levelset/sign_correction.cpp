#include "pipeline_common.hpp"

#include <atomic>
#include <limits>
#include <numeric>

namespace pkgrid
{
namespace
{
enum CellSign : std::int8_t
{
    kInside = -1,
    kInterface = 0,
    kOutside = 1,
    kUnknown = 2
};

inline std::int8_t signOf(Real phi) { return phi > 0.0 ? std::int8_t(kOutside) : std::int8_t(kInside); }

template <int D>
std::int8_t resolveCell(const GridGeometry<D> &geometry, const Arrayi<D> &cell, const std::vector<std::int8_t> &state,
                        const UnsignedInt *background, const Real *phi, const int *trusted, std::size_t ppp)
{
    bool touches_interface = false;
    int positive = 0, negative = 0;
    detail::forEachNeighborOffset<D>(
        [&](const Arrayi<D> &offset)
        {
            const Arrayi<D> neighbor = cell + offset;
            if (!geometry.cellInRange(neighbor))
                return;
            const std::int8_t s = state[geometry.linearCell(neighbor)];
            touches_interface |= s == kInterface;
            positive += s == kOutside;
            negative += s == kInside;
        });
    if (!touches_interface)
    {
        if (positive + negative == 0)
            return kUnknown;
        return positive > negative ? kOutside : kInside;
    }

    // Next to the surface: copy the sign of the closest trusted data point.
    const Vecd<D> center = geometry.cellCenter(cell);
    Real best = std::numeric_limits<Real>::infinity();
    std::int8_t result = kUnknown;
    detail::forEachNeighborOffset<D>(
        [&](const Arrayi<D> &offset)
        {
            const Arrayi<D> neighbor = cell + offset;
            if (!geometry.cellInRange(neighbor) || state[geometry.linearCell(neighbor)] != kInterface)
                return;
            const PackageIndex p = background[geometry.linearCell(neighbor)];
            const std::size_t base = static_cast<std::size_t>(p) * ppp;
            for (std::size_t i = 0; i < ppp; ++i)
            {
                if (!trusted[base + i])
                    continue;
                const Real d = (geometry.dataPointPosition(neighbor, geometry.dataFromLinear(i)) - center).squaredNorm();
                if (d < best)
                {
                    best = d;
                    result = signOf(phi[base + i]);
                }
            }
        });
    return result;
}
} // namespace
//=================================================================================================//
template <int D>
SignCorrectionReport correctSignConsistency(LevelSetLayer<D> &layer, Real trust_band, const ExecutionPolicy &policy,
                                            const LevelSetLayer<D> *parent)
{
    detail::requireHostPolicy(policy);
    Mesh<D> &mesh = layer.mesh();
    const GridGeometry<D> &geometry = mesh.geometry();
    const std::size_t ppp = mesh.pointsPerPackage();
    const std::size_t n_packages = mesh.numPackages();
    const int pkg = geometry.pkg_size;
    Real *phi = layer.phi().data();
    int *trusted = layer.nearInterfaceId().data();
    UnsignedInt *background = mesh.cellPackageIndex().data();
    SignCorrectionReport report;

    std::vector<std::uint8_t> interface_package(n_packages, 0);
    std::fill_n(trusted, 2 * ppp, 0);
    forEachPackage<D>(policy, mesh,
                      [&](PackageIndex p)
                      {
                          const std::size_t base = static_cast<std::size_t>(p) * ppp;
                          bool any = false;
                          for (std::size_t i = 0; i < ppp; ++i)
                          {
                              trusted[base + i] = std::abs(phi[base + i]) < trust_band ? 1 : 0;
                              any |= trusted[base + i] != 0;
                          }
                          interface_package[p] = any;
                      });
    report.trusted_points = static_cast<std::size_t>(std::count(trusted, trusted + n_packages * ppp, 1));
    if (report.trusted_points == 0)
        throw std::runtime_error("no data point inside the trust band; the surface misses the mesh");

    // Step A: per-cell sign tags diffused by synchronous sweeps.
    const std::size_t n_cells = geometry.totalCells();
    std::vector<std::int8_t> state(n_cells);
    std::vector<LinearCellIndex> unknown;
    for (std::size_t c = 0; c < n_cells; ++c)
    {
        const UnsignedInt p = background[c];
        if (p >= kNumSingularPackages)
            state[c] = interface_package[p] ? kInterface : kUnknown;
        else if (parent != nullptr)
            state[c] = p == kNegativeFarField ? kInside : kOutside;
        else
            state[c] = kUnknown;
        if (state[c] == kUnknown)
            unknown.push_back(static_cast<LinearCellIndex>(c));
    }
    std::vector<std::int8_t> resolved(unknown.size());
    while (!unknown.empty())
    {
        ++report.cell_sweeps;
        parallelChunks(policy, unknown.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t i = begin; i != end; ++i)
                               resolved[i] = resolveCell<D>(geometry, geometry.cellFromLinear(unknown[i]), state,
                                                            background, phi, trusted, ppp);
                       });
        std::size_t kept = 0;
        for (std::size_t i = 0; i < unknown.size(); ++i)
        {
            if (resolved[i] == kUnknown)
                unknown[kept++] = unknown[i];
            else
                state[unknown[i]] = resolved[i];
        }
        if (kept == unknown.size())
            break; // isolated pocket with no signed neighbor
        unknown.resize(kept);
        resolved.resize(kept);
    }
    for (LinearCellIndex c : unknown)
        state[c] = kOutside;

    std::atomic<std::size_t> flipped{0};
    for (std::size_t c = 0; c < n_cells; ++c)
    {
        const UnsignedInt p = background[c];
        if (p < kNumSingularPackages)
        {
            const UnsignedInt stamp = state[c] == kInside ? kNegativeFarField : kPositiveFarField;
            if (stamp != p)
            {
                background[c] = stamp;
                ++report.restamped_cells;
            }
        }
    }
    forEachPackage<D>(policy, mesh,
                      [&](PackageIndex p)
                      {
                          const std::int8_t s = state[mesh.metaCell().data()[p].linear_cell];
                          if (s == kInterface)
                              return;
                          const std::size_t base = static_cast<std::size_t>(p) * ppp;
                          std::size_t local = 0;
                          for (std::size_t i = 0; i < ppp; ++i)
                          {
                              const Real corrected = s == kInside ? -std::abs(phi[base + i]) : std::abs(phi[base + i]);
                              local += (corrected > 0.0) != (phi[base + i] > 0.0);
                              phi[base + i] = corrected;
                          }
                          flipped += local;
                      });

    // Restamped cells change what neighborhoods see; slots outside the mesh keep their value.
    CellNeighborhood<D> *neighborhoods = mesh.cellNeighborhood().data();
    forEachPackage<D>(policy, mesh,
                      [&](PackageIndex p)
                      {
                          const Arrayi<D> cell = mesh.cellOfPackage(p);
                          for (std::size_t s = 0; s < CellNeighborhood<D>::kSize; ++s)
                          {
                              const Arrayi<D> neighbor = cell + CellNeighborhood<D>::slotOffset(s) - 1;
                              if (geometry.cellInRange(neighbor))
                                  neighborhoods[p].slots[s] = background[geometry.linearCell(neighbor)];
                          }
                      });

    // Step B: untrusted points of interface packages take the sign of their
    // face neighbors, again by synchronous sweeps.
    std::vector<std::int8_t> point_sign(n_packages * ppp);
    std::fill_n(point_sign.begin(), ppp, kInside);
    std::fill_n(point_sign.begin() + ppp, ppp, kOutside);
    std::vector<std::size_t> pending;
    for (PackageIndex p = kNumSingularPackages; p < n_packages; ++p)
    {
        const std::size_t base = static_cast<std::size_t>(p) * ppp;
        for (std::size_t i = 0; i < ppp; ++i)
        {
            const bool open = interface_package[p] && !trusted[base + i];
            point_sign[base + i] = open ? std::int8_t(kInterface) : signOf(phi[base + i]);
            if (open)
                pending.push_back(base + i);
        }
    }
    const MeshData<Real, D> phi_view = mesh.meshData(layer.phi());
    std::vector<std::int8_t> decided(pending.size());
    while (!pending.empty())
    {
        ++report.data_sweeps;
        parallelChunks(policy, pending.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t j = begin; j != end; ++j)
                           {
                               const auto p = static_cast<PackageIndex>(pending[j] / ppp);
                               const Arrayi<D> data = geometry.dataFromLinear(pending[j] % ppp);
                               int positive = 0, negative = 0;
                               Real closest = std::numeric_limits<Real>::infinity();
                               std::int8_t closest_sign = kInterface;
                               for (int k = 0; k < D; ++k)
                                   for (int direction : {-1, 1})
                                   {
                                       const DataPackagePair<D> pair = neighbourIndexShift<D>(
                                           data + direction * unitIndex<D>(k), neighborhoods[p], pkg);
                                       const std::size_t index =
                                           static_cast<std::size_t>(pair.package) * ppp + phi_view.offset(pair.data);
                                       const std::int8_t s = point_sign[index];
                                       if (s == kInterface)
                                           continue;
                                       positive += s == kOutside;
                                       negative += s == kInside;
                                       const Real magnitude = std::abs(phi[index]);
                                       if (magnitude < closest)
                                       {
                                           closest = magnitude;
                                           closest_sign = s;
                                       }
                                   }
                               if (positive != negative)
                                   closest_sign = positive > negative ? kOutside : kInside;
                               decided[j] = closest_sign;
                           }
                       });
        std::size_t kept = 0;
        for (std::size_t j = 0; j < pending.size(); ++j)
        {
            if (decided[j] == kInterface)
                pending[kept++] = pending[j];
            else
                point_sign[pending[j]] = decided[j];
        }
        if (kept == pending.size())
            break;
        pending.resize(kept);
        decided.resize(kept);
    }
    for (std::size_t index : pending)
        point_sign[index] = signOf(phi[index]);

    forEachPackage<D>(policy, mesh,
                      [&](PackageIndex p)
                      {
                          if (!interface_package[p])
                              return;
                          const std::size_t base = static_cast<std::size_t>(p) * ppp;
                          std::size_t local = 0;
                          for (std::size_t i = 0; i < ppp; ++i)
                          {
                              const Real value = phi[base + i];
                              const Real corrected = point_sign[base + i] == kInside ? -std::abs(value) : std::abs(value);
                              local += (corrected > 0.0) != (value > 0.0);
                              phi[base + i] = corrected;
                          }
                          flipped += local;
                      });
    report.flipped_points = flipped.load();
    return report;
}
//=================================================================================================//
template SignCorrectionReport correctSignConsistency<2>(LevelSetLayer<2> &, Real, const ExecutionPolicy &,
                                                        const LevelSetLayer<2> *);
template SignCorrectionReport correctSignConsistency<3>(LevelSetLayer<3> &, Real, const ExecutionPolicy &,
                                                        const LevelSetLayer<3> *);
} // namespace pkgrid
