#ifndef PKGRID_SIMD_KERNELS_HPP
#define PKGRID_SIMD_KERNELS_HPP

#include <cstddef>
#include <span>

// Data-parallel inner loops over package storage. Each kernel has a scalar
// reference version and vector variants; the variant is picked at run time
// from the CPU features (override with PKGRID_SIMD=scalar|avx2). All variants
// produce bit-identical results: no fused multiply-add, same summation order.
namespace pkgrid::simd
{
enum class Level
{
    Scalar,
    Avx2
};

const char *levelName(Level level);
bool isSupported(Level level);
/// Best level supported by this CPU and build.
Level detectedLevel();
Level activeLevel();
/// Selects a level; unsupported requests fall back to Scalar. Returns the level in effect.
Level setActiveLevel(Level level);

/// values[i] += constant
void addConstant(std::span<double> values, double constant);

/// 7-point Laplacian of an n^3 block stored with a one-point halo as an
/// (n+2)^3 row-major array; writes n^3 row-major results.
void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing);

namespace scalar
{
void addConstant(std::span<double> values, double constant);
void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing);
} // namespace scalar

namespace avx2
{
void addConstant(std::span<double> values, double constant);
void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing);
} // namespace avx2

} // namespace pkgrid::simd
#endif // PKGRID_SIMD_KERNELS_HPP
