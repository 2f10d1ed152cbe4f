#ifndef PKGRID_ARTIFACT_HPP
#define PKGRID_ARTIFACT_HPP

#include "pkgrid/levelset.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace pkgrid
{
// Binary level-set artifact, little-endian:
//   "PKGGRID1", u32 dimension, u32 layer count, then per layer
//   f64 lower[D], f64 coarse_cell_size, i32 cells[D], i32 pkg_size,
//   u64 packages, packages x (u32 linear cell, u8 category),
//   packages x 3^D u32 neighborhood slots,
//   u64 cells, cells x u32 background, packages x points x f64 phi.
// Singular packages are included so a reload needs no geometry.

class ArtifactError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

template <int D>
std::string serializeArtifact(const MultiResolutionLevelSet<D> &levelset);

/// Throws ArtifactError on a bad magic, a dimension other than D, or truncation.
template <int D>
MultiResolutionLevelSet<D> deserializeArtifact(std::string_view bytes);

/// Dimension stored in the header.
int artifactDimension(std::string_view bytes);

std::string readFileBytes(const std::filesystem::path &path);
void writeFileBytes(const std::filesystem::path &path, std::string_view bytes);

} // namespace pkgrid
#endif // PKGRID_ARTIFACT_HPP
