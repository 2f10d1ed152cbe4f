#include "pkgrid/particles.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pkgrid
{
namespace
{
/// Particles binned into a uniform grid of cubic cells, sorted by cell.
template <int D>
class CellLinkedList
{
  public:
    CellLinkedList(const std::vector<Vecd<D>> &positions, const Vecd<D> &lower, const Vecd<D> &upper, Real cell_size)
        : lower_(lower), cell_size_(cell_size)
    {
        for (int k = 0; k < D; ++k)
            extent_[k] = std::max(1, static_cast<int>(std::ceil((upper[k] - lower[k]) / cell_size)));
        std::size_t n_cells = 1;
        for (int k = 0; k < D; ++k)
            n_cells *= static_cast<std::size_t>(extent_[k]);
        offsets_.assign(n_cells + 1, 0);
        std::vector<std::size_t> cell_of(positions.size());
        for (std::size_t i = 0; i < positions.size(); ++i)
        {
            cell_of[i] = linearizeRowMajor<D>(cellOf(positions[i]), extent_);
            ++offsets_[cell_of[i] + 1];
        }
        for (std::size_t c = 0; c < n_cells; ++c)
            offsets_[c + 1] += offsets_[c];
        members_.resize(positions.size());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < positions.size(); ++i)
            members_[fill[cell_of[i]]++] = i;
    }

    Arrayi<D> cellOf(const Vecd<D> &p) const
    {
        Arrayi<D> cell;
        for (int k = 0; k < D; ++k)
            cell[k] = std::clamp(static_cast<int>(std::floor((p[k] - lower_[k]) / cell_size_)), 0, extent_[k] - 1);
        return cell;
    }

    /// Calls function(j) for every particle in the 3^D cells around p, in a fixed order.
    template <typename Function>
    void forEachNear(const Vecd<D> &p, const Function &function) const
    {
        const Arrayi<D> center = cellOf(p);
        for (std::size_t s = 0; s < ipow(3, D); ++s)
        {
            const Arrayi<D> cell = center + delinearizeRowMajor<D>(s, Arrayi<D>::Constant(3)) - 1;
            if (!inRange<D>(cell, extent_))
                continue;
            const std::size_t c = linearizeRowMajor<D>(cell, extent_);
            for (std::size_t m = offsets_[c]; m < offsets_[c + 1]; ++m)
                function(members_[m]);
        }
    }

  private:
    Vecd<D> lower_;
    Real cell_size_;
    Arrayi<D> extent_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> members_;
};

template <int D>
std::pair<Vecd<D>, Vecd<D>> probeDomain(const LevelSetLayer<D> &layer)
{
    const GridGeometry<D> &g = layer.geometry();
    const Real half = 0.5 * g.dataSpacing();
    return {(g.lower_corner.array() + half).matrix(), (g.upperCorner().array() - half).matrix()};
}
} // namespace
//=================================================================================================//
void RelaxationParams::validate() const
{
    if (steps < 0)
        throw std::invalid_argument("relaxation steps must be non-negative");
    if (!(step_scale > 0.0 && step_scale <= 1.0))
        throw std::invalid_argument("step_scale must lie in (0, 1]");
    if (surface_offset && !(*surface_offset >= 0.0))
        throw std::invalid_argument("surface_offset must be non-negative");
    if (!(smoothing_ratio > 0.0))
        throw std::invalid_argument("smoothing ratio must be positive");
}
//=================================================================================================//
template <int D>
ParticleSet<D> generateLatticeParticles(const LevelSetLayer<D> &layer, Real dp)
{
    if (!(dp > 0.0))
        throw std::invalid_argument("particle spacing must be positive");
    const GridGeometry<D> &g = layer.geometry();
    Arrayi<D> count;
    for (int k = 0; k < D; ++k)
        count[k] = static_cast<int>(std::floor((g.upperCorner()[k] - g.lower_corner[k]) / dp + 1.0e-9));
    ParticleSet<D> particles;
    particles.reference_spacing = dp;
    std::size_t total = 1;
    for (int k = 0; k < D; ++k)
        total *= static_cast<std::size_t>(std::max(count[k], 0));
    for (std::size_t i = 0; i < total; ++i)
    {
        const Vecd<D> p = g.lower_corner + dp * (delinearizeRowMajor<D>(i, count).template cast<Real>() + 0.5).matrix();
        if (layer.probePhiClamped(p) <= 0.0)
            particles.positions.push_back(p);
    }
    return particles;
}
//=================================================================================================//
template <int D>
ParticleSet<D> relaxParticles(LevelSetLayer<D> &layer, const ParticleSet<D> &particles, const RelaxationParams &params,
                              const ExecutionPolicy &policy)
{
    params.validate();
    const Real dp = particles.reference_spacing;
    const SmoothingKernel<D> kernel(params.smoothing_ratio * dp);
    const Real offset = params.surface_offset.value_or(0.5 * dp);
    const Real volume = particles.volume();
    const Real max_move = params.step_scale * dp;
    updateLevelSetGradient(layer, policy);
    computeKernelIntegrals(layer, kernel, policy);

    Mesh<D> &mesh = layer.mesh();
    const MeshData<Real, D> phi = mesh.meshData(layer.phi());
    const MeshData<Vecd<D>, D> gradient = mesh.meshData(layer.phiGradient());
    const MeshData<Vecd<D>, D> surface = mesh.meshData(layer.kernelGradientIntegral());
    const auto [lower, upper] = probeDomain(layer);
    auto clampInside = [lower = lower, upper = upper](const Vecd<D> &p)
    { return Vecd<D>(p.cwiseMax(lower).cwiseMin(upper)); };

    ParticleSet<D> current = particles;
    std::vector<Vecd<D>> force(current.size());
    std::vector<Vecd<D>> next(current.size());
    const Real cutoff = kernel.cutoffRadius();
    for (int step = 0; step < params.steps; ++step)
    {
        const CellLinkedList<D> cells(current.positions, layer.geometry().lower_corner, layer.geometry().upperCorner(),
                                      cutoff);
        parallelChunks(policy, current.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t i = begin; i != end; ++i)
                           {
                               const Vecd<D> &xi = current.positions[i];
                               Vecd<D> f = Vecd<D>::Zero();
                               cells.forEachNear(xi,
                                                 [&](std::size_t j)
                                                 {
                                                     if (j == i)
                                                         return;
                                                     const Vecd<D> displacement = xi - current.positions[j];
                                                     if (displacement.squaredNorm() < cutoff * cutoff)
                                                         f -= kernel.gradW(displacement) * volume;
                                                 });
                               // The integral points outward; its negative stands in for
                               // the neighbors missing beyond the surface.
                               f -= probe<D, Vecd<D>>(mesh, surface, clampInside(xi));
                               force[i] = f;
                           }
                       });
        Real max_force = 0.0;
        for (const Vecd<D> &f : force)
            max_force = std::max(max_force, f.norm());
        const Real dt_square = max_force > 0.0 ? 0.0625 * kernel.smoothingLength() / max_force : 0.0;

        parallelChunks(policy, current.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t i = begin; i != end; ++i)
                           {
                               Vecd<D> move = 0.5 * dt_square * force[i];
                               const Real length = move.norm();
                               if (length > max_move)
                                   move *= max_move / length;
                               const Vecd<D> before = current.positions[i];
                               Vecd<D> x = clampInside(before + move);
                               for (int pass = 0; pass < 4; ++pass)
                               {
                                   const Real value = probe<D, Real>(mesh, phi, x);
                                   if (value <= -offset)
                                       break;
                                   const Vecd<D> g = probe<D, Vecd<D>>(mesh, gradient, x);
                                   const Real norm = g.norm();
                                   if (!(norm > 0.0))
                                       break;
                                   x = clampInside(x - (value + offset) * g / norm);
                               }
                               // Never leave the body: fall back to the last contained position.
                               if (probe<D, Real>(mesh, phi, x) > 0.0 && probe<D, Real>(mesh, phi, clampInside(before)) <= 0.0)
                                   x = before;
                               next[i] = x;
                           }
                       });
        current.positions.swap(next);
    }
    return current;
}
//=================================================================================================//
template <int D>
void jitterParticles(ParticleSet<D> &particles, Real amplitude, std::uint64_t seed)
{
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<Real> uniform(-amplitude, amplitude);
    for (Vecd<D> &p : particles.positions)
        for (int k = 0; k < D; ++k)
            p[k] += uniform(engine);
}
//=================================================================================================//
template <int D>
DistanceStatistics nearestNeighborStatistics(const ParticleSet<D> &particles)
{
    DistanceStatistics stats;
    if (particles.size() < 2)
        return stats;
    Vecd<D> lower = particles.positions.front(), upper = lower;
    for (const Vecd<D> &p : particles.positions)
    {
        lower = lower.cwiseMin(p);
        upper = upper.cwiseMax(p);
    }
    const Real radius = 2.0 * particles.reference_spacing;
    const CellLinkedList<D> cells(particles.positions, lower, (upper.array() + radius).matrix(), radius);
    std::vector<Real> nearest;
    nearest.reserve(particles.size());
    for (std::size_t i = 0; i < particles.size(); ++i)
    {
        Real best = std::numeric_limits<Real>::infinity();
        cells.forEachNear(particles.positions[i],
                          [&](std::size_t j)
                          {
                              if (j != i)
                                  best = std::min(best, (particles.positions[i] - particles.positions[j]).norm());
                          });
        if (best <= radius)
            nearest.push_back(best);
    }
    stats.counted = nearest.size();
    if (nearest.empty())
        return stats;
    Real sum = 0.0;
    for (Real d : nearest)
        sum += d;
    stats.mean = sum / static_cast<Real>(nearest.size());
    Real variance = 0.0;
    for (Real d : nearest)
        variance += (d - stats.mean) * (d - stats.mean);
    stats.stddev = std::sqrt(variance / static_cast<Real>(nearest.size()));
    stats.coefficient_of_variation = stats.mean > 0.0 ? stats.stddev / stats.mean : 0.0;
    return stats;
}
//=================================================================================================//
namespace
{
void appendShortest(std::string &out, Real value)
{
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    out.append(buffer, result.ptr);
}
} // namespace

template <int D>
std::string exportParticles(const ParticleSet<D> &particles, const std::string &format)
{
    auto coordinates = [](const Vecd<D> &p)
    {
        std::array<Real, 3> xyz{0.0, 0.0, 0.0};
        for (int k = 0; k < D; ++k)
            xyz[k] = p[k];
        return xyz;
    };
    std::string out;
    if (format == "csv")
    {
        out = "x,y,z\n";
        for (const Vecd<D> &p : particles.positions)
        {
            const auto xyz = coordinates(p);
            for (int k = 0; k < 3; ++k)
            {
                appendShortest(out, xyz[k]);
                out += k < 2 ? ',' : '\n';
            }
        }
        return out;
    }
    if (format == "ply")
    {
        static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");
        out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(particles.size()) +
              "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
        const std::size_t header = out.size();
        out.resize(header + particles.size() * 3 * sizeof(Real));
        char *cursor = out.data() + header;
        for (const Vecd<D> &p : particles.positions)
        {
            const auto xyz = coordinates(p);
            std::memcpy(cursor, xyz.data(), sizeof(xyz));
            cursor += sizeof(xyz);
        }
        return out;
    }
    throw std::invalid_argument("unknown particle format '" + format + "' (expected ply or csv)");
}
//=================================================================================================//
ParticleSet<3> parseParticlesCsv(std::string_view text, Real dp)
{
    ParticleSet<3> particles;
    particles.reference_spacing = dp;
    std::size_t line_end = text.find('\n');
    if (text.substr(0, line_end) != "x,y,z")
        throw std::invalid_argument("particle CSV must start with the header x,y,z");
    std::size_t cursor = line_end == std::string_view::npos ? text.size() : line_end + 1;
    while (cursor < text.size())
    {
        line_end = text.find('\n', cursor);
        const std::string_view line = text.substr(cursor, line_end == std::string_view::npos ? text.npos : line_end - cursor);
        cursor = line_end == std::string_view::npos ? text.size() : line_end + 1;
        if (line.empty())
            continue;
        Vecd<3> p;
        const char *first = line.data();
        const char *last = line.data() + line.size();
        for (int k = 0; k < 3; ++k)
        {
            const auto result = std::from_chars(first, last, p[k]);
            if (result.ec != std::errc())
                throw std::invalid_argument("malformed particle CSV line");
            first = result.ptr;
            if (k < 2)
            {
                if (first == last || *first != ',')
                    throw std::invalid_argument("malformed particle CSV line");
                ++first;
            }
        }
        if (first != last)
            throw std::invalid_argument("malformed particle CSV line");
        particles.positions.push_back(p);
    }
    return particles;
}
//=================================================================================================//
#define PKGRID_INSTANTIATE(D)                                                                                          \
    template ParticleSet<D> generateLatticeParticles<D>(const LevelSetLayer<D> &, Real);                               \
    template ParticleSet<D> relaxParticles<D>(LevelSetLayer<D> &, const ParticleSet<D> &, const RelaxationParams &,    \
                                              const ExecutionPolicy &);                                                \
    template void jitterParticles<D>(ParticleSet<D> &, Real, std::uint64_t);                                           \
    template DistanceStatistics nearestNeighborStatistics<D>(const ParticleSet<D> &);                                  \
    template std::string exportParticles<D>(const ParticleSet<D> &, const std::string &);
PKGRID_INSTANTIATE(2)
PKGRID_INSTANTIATE(3)
#undef PKGRID_INSTANTIATE
} // namespace pkgrid
