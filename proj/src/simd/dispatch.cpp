#include "pkgrid/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace pkgrid::simd
{
namespace
{
Level initialLevel()
{
    const char *requested = std::getenv("PKGRID_SIMD");
    if (requested && std::strcmp(requested, "scalar") == 0)
        return Level::Scalar;
    return detectedLevel();
}

std::atomic<Level> &currentLevel()
{
    static std::atomic<Level> level{initialLevel()};
    return level;
}
} // namespace

const char *levelName(Level level)
{
    return level == Level::Avx2 ? "avx2" : "scalar";
}

bool isSupported(Level level)
{
    switch (level)
    {
    case Level::Scalar:
        return true;
    case Level::Avx2:
#if defined(PKGRID_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

Level detectedLevel()
{
    return isSupported(Level::Avx2) ? Level::Avx2 : Level::Scalar;
}

Level activeLevel() { return currentLevel().load(std::memory_order_relaxed); }

Level setActiveLevel(Level level)
{
    const Level effective = isSupported(level) ? level : Level::Scalar;
    currentLevel().store(effective, std::memory_order_relaxed);
    return effective;
}

void addConstant(std::span<double> values, double constant)
{
    if (activeLevel() == Level::Avx2)
        avx2::addConstant(values, constant);
    else
        scalar::addConstant(values, constant);
}

void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing)
{
    if (activeLevel() == Level::Avx2)
        avx2::laplacianPadded3d(padded, out, n, data_spacing);
    else
        scalar::laplacianPadded3d(padded, out, n, data_spacing);
}
} // namespace pkgrid::simd
