#ifndef PKGRID_PARTICLES_HPP
#define PKGRID_PARTICLES_HPP

#include "pkgrid/levelset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pkgrid
{
template <int D>
struct ParticleSet
{
    std::vector<Vecd<D>> positions;
    Real reference_spacing = 1.0; ///< dp

    Real volume() const { return std::pow(reference_spacing, D); }
    std::size_t size() const { return positions.size(); }
};

struct RelaxationParams
{
    int steps = 100;
    Real step_scale = 0.2;                ///< cap on one move, in units of dp
    std::optional<Real> surface_offset;   ///< defaults to 0.5 dp
    Real smoothing_ratio = 1.3;           ///< h / dp

    void validate() const;
};

/// Lattice points lower + (i + 0.5) dp of the layer's bounds where phi <= 0.
template <int D>
ParticleSet<D> generateLatticeParticles(const LevelSetLayer<D> &layer, Real dp);

/// Pairwise kernel repulsion balanced by the level-set surface term, followed
/// by projection of particles that come closer than surface_offset to the
/// zero level. Recomputes the layer's gradient and kernel integrals with the
/// particle smoothing length first.
template <int D>
ParticleSet<D> relaxParticles(LevelSetLayer<D> &layer, const ParticleSet<D> &particles, const RelaxationParams &params,
                              const ExecutionPolicy &policy = ExecutionPolicy::sequential());

/// Uniform random displacement in [-amplitude, amplitude]^D per particle.
template <int D>
void jitterParticles(ParticleSet<D> &particles, Real amplitude, std::uint64_t seed);

struct DistanceStatistics
{
    Real mean = 0.0;
    Real stddev = 0.0;
    Real coefficient_of_variation = 0.0;
    std::size_t counted = 0;
};

/// Nearest-neighbor distance statistics (neighbors searched within 2 dp).
template <int D>
DistanceStatistics nearestNeighborStatistics(const ParticleSet<D> &particles);

/// "ply" (binary little-endian, double x/y/z) or "csv" (header x,y,z). 2D sets get z = 0.
template <int D>
std::string exportParticles(const ParticleSet<D> &particles, const std::string &format);

/// Reads back what exportParticles writes as CSV.
ParticleSet<3> parseParticlesCsv(std::string_view text, Real dp = 1.0);

} // namespace pkgrid
#endif // PKGRID_PARTICLES_HPP
